import io

import numpy as np
import pytest
import scipy.sparse as sp

from hashfactor.ingest import (
    CooccurrenceMatrix,
    InteractionDataset,
    ParseError,
    UserHashtagMatrix,
    build_matrices,
    format_summary,
    parse_tweets,
    parse_tweets_text,
    summarize,
)


class TestParse:
    def test_case_fold_merges_hashtags(self):
        d = parse_tweets_text("u1\tObama,News\nu2\tobama\n")
        assert d.users == ("u1", "u2")
        assert d.hashtags == ("obama", "news")
        assert d.tweets[1] == (1, (0,))

    def test_duplicates_collapse(self):
        d = parse_tweets_text("u1\t#Love,#love,LOVE\n")
        assert d.hashtags == ("love",)
        assert d.tweets == ((0, (0,)),)

    def test_comments_blank_lines_and_crlf(self):
        d = parse_tweets_text("# header\r\n\r\nu1\ta,b\r\n#not a tweet\nu1\tc\n")
        assert d.n_tweets == 2
        assert d.hashtags == ("a", "b", "c")
        assert d.n_users == 1

    def test_user_ids_are_not_normalized(self):
        d = parse_tweets_text("User\tx\nuser\tx\n")
        assert d.users == ("User", "user")

    def test_empty_stream(self):
        d = parse_tweets(io.StringIO(""))
        assert (d.n_users, d.n_hashtags, d.n_tweets) == (0, 0, 0)

    @pytest.mark.parametrize("text, lineno", [
        ("u1\ta\nno tab here\n", 2),
        ("u1\t#,#\n", 1),
        ("# c\nu1\t  \n", 2),
        ("\tfoo\n", 1),
    ])
    def test_malformed_lines_report_line_number(self, text, lineno):
        with pytest.raises(ParseError) as info:
            parse_tweets_text(text)
        assert info.value.lineno == lineno
        assert f"line {lineno}" in str(info.value)

    def test_corpus_sized_like_the_reference_table(self):
        # 6,503 tweets, 2,976 users, 6,814 hashtags.
        lines = []
        for i in range(6503):
            lines.append(f"user{i % 2976}\th{i},h{6503 + i % 311}")
        d = parse_tweets_text("\n".join(lines) + "\n")
        assert (d.n_tweets, d.n_users, d.n_hashtags) == (6503, 2976, 6814)

    def test_tsv_round_trip(self, small_corpus):
        again = parse_tweets_text(small_corpus.to_tsv())
        assert again == small_corpus


class TestDatasetInvariants:
    def test_rejects_out_of_range_indices(self):
        with pytest.raises(ValueError):
            InteractionDataset(("u",), ("a",), ((0, (1,)),))
        with pytest.raises(ValueError):
            InteractionDataset(("u",), ("a",), ((1, (0,)),))

    def test_rejects_duplicate_hashtags_in_tweet(self):
        with pytest.raises(ValueError):
            InteractionDataset(("u",), ("a",), ((0, (0, 0)),))

    def test_hashtags_normalized_nonempty(self, small_corpus):
        for tag in small_corpus.hashtags:
            assert tag and tag == tag.lower() and not tag.startswith("#")


def _dataset(tweets, n_users=2, n_tags=3):
    return InteractionDataset(tuple(f"u{i}" for i in range(n_users)),
                              tuple("abcdefgh"[:n_tags]),
                              tuple((u, tuple(sorted(t))) for u, t in tweets))


class TestBuildMatrices:
    def test_single_tweet_three_hashtags(self):
        X, Y = build_matrices(_dataset([(0, (0, 1, 2))]))
        assert X.entries() == [(0, 0), (0, 1), (0, 2)]
        assert Y.get(0, 1) == Y.get(0, 2) == Y.get(1, 2) == 1
        assert Y.get(1, 0) == 1

    def test_accumulation_over_tweets(self):
        X, Y = build_matrices(_dataset([(0, (0, 1)), (1, (0, 1))]))
        assert Y.get(0, 1) == 2
        assert X.nnz == 4

    def test_singleton_adds_no_pairs(self):
        X, Y = build_matrices(_dataset([(0, (0,))]))
        assert X.entries() == [(0, 0)]
        assert Y.counts.nnz == 0

    def test_repeat_adoption_stays_binary(self):
        X, _ = build_matrices(_dataset([(0, (0, 1)), (0, (0,))]))
        assert X.entries() == [(0, 0), (0, 1)]

    def test_invariants_on_synthetic(self, small_corpus):
        X, Y = build_matrices(small_corpus)
        C = Y.counts
        assert (C != C.T).nnz == 0
        assert not C.diagonal().any()
        expected_pairs = sum(len(t) * (len(t) - 1) // 2 for _, t in small_corpus.tweets)
        assert Y.pair_total() == expected_pairs
        used = {}
        for u, tags in small_corpus.tweets:
            used.setdefault(u, set()).update(tags)
        counts = X.row_counts()
        assert np.count_nonzero(counts) <= small_corpus.n_users
        for u in range(small_corpus.n_users):
            assert counts[u] <= len(used.get(u, ()))
            assert set(X.adopted(u).tolist()) == used.get(u, set())

    def test_rebuild_is_identical(self, small_corpus):
        X1, Y1 = build_matrices(small_corpus)
        X2, Y2 = build_matrices(small_corpus)
        assert X1 == X2 and Y1 == Y2
        assert np.array_equal(Y1.counts.data, Y2.counts.data)
        assert np.array_equal(Y1.counts.indices, Y2.counts.indices)


class TestMatrixTypes:
    def test_x_rejects_duplicates(self):
        with pytest.raises(ValueError):
            UserHashtagMatrix(2, 2, [0, 0], [1, 1])

    def test_x_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            UserHashtagMatrix(2, 2, [0], [2])

    def test_x_without(self):
        X = UserHashtagMatrix.from_entries(2, 3, [(0, 0), (0, 2), (1, 1)])
        assert X.without([(0, 2)]).entries() == [(0, 0), (1, 1)]

    def test_y_rejects_asymmetric_or_diagonal(self):
        with pytest.raises(ValueError):
            CooccurrenceMatrix(2, sp.csr_matrix(np.array([[0, 1], [0, 0]])))
        with pytest.raises(ValueError):
            CooccurrenceMatrix(2, sp.csr_matrix(np.array([[1, 0], [0, 0]])))


def test_summary_block():
    d = parse_tweets_text("a\tx,y,z\nb\tx,y\nc\tw\n")
    stats = summarize(d)
    assert stats["# of users"] == 3
    assert stats["# of tweets"] == 3
    assert stats["# of hashtags"] == 4
    assert stats["Max # of paired hashtags adopted by users"] == 3
    assert stats["Min # of paired hashtags adopted by users"] == 0
    assert stats["Max # of times given paired hashtag used"] == 2
    assert stats["Min # of times given paired hashtag used"] == 0
    text = format_summary(stats)
    assert "# of users: 3\n" in text
    assert text.endswith("\n")
