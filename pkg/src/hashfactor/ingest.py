"""Interaction logs: parsing, the dataset model, and the X / Y matrices.

Input format is one tweet per line::

    user_id<TAB>hashtag1,hashtag2,...

Lines starting with ``#`` in column 0 are comments. Hashtags are
lowercased and stripped of a leading ``#``; duplicates within a tweet
collapse. Users and hashtags get indices in order of first appearance.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np
import scipy.sparse as sp


class ParseError(ValueError):
    """Raised for a malformed input line; carries the 1-based line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def normalize_hashtag(tag: str) -> str:
    tag = tag.strip()
    if tag.startswith("#"):
        tag = tag[1:]
    return tag.strip().lower()


@dataclass(frozen=True)
class InteractionDataset:
    """Tweets as (user index, hashtag-index set) records.

    ``users`` and ``hashtags`` are tuples whose positions are the indices
    used by ``tweets``. Tweets keep hashtags as sorted tuples so the
    dataset is hashable and has a single canonical form.
    """

    users: tuple[str, ...] = ()
    hashtags: tuple[str, ...] = ()
    tweets: tuple[tuple[int, tuple[int, ...]], ...] = ()

    def __post_init__(self):
        n_users, n_tags = len(self.users), len(self.hashtags)
        for u, tags in self.tweets:
            if not 0 <= u < n_users:
                raise ValueError(f"tweet user index {u} out of range")
            if len(set(tags)) != len(tags):
                raise ValueError("tweet hashtag set contains duplicates")
            for t in tags:
                if not 0 <= t < n_tags:
                    raise ValueError(f"tweet hashtag index {t} out of range")

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def n_hashtags(self) -> int:
        return len(self.hashtags)

    @property
    def n_tweets(self) -> int:
        return len(self.tweets)

    @classmethod
    def from_records(cls, records: Iterable[tuple[str, Sequence[str]]]) -> "InteractionDataset":
        """Build a dataset from ``(user_id, [hashtag, ...])`` string records.

        Hashtags are normalized; indices follow first appearance. A record
        whose hashtag list is empty after normalization raises ValueError.
        """
        user_index: dict[str, int] = {}
        tag_index: dict[str, int] = {}
        tweets = []
        for user, tags in records:
            seen: dict[str, None] = {}
            for raw in tags:
                tag = normalize_hashtag(raw)
                if tag:
                    seen.setdefault(tag, None)
            if not seen:
                raise ValueError(f"tweet by {user!r} has no hashtags")
            u = user_index.setdefault(user, len(user_index))
            idx = tuple(sorted(tag_index.setdefault(t, len(tag_index)) for t in seen))
            tweets.append((u, idx))
        return cls(tuple(user_index), tuple(tag_index), tuple(tweets))

    def records(self) -> list[tuple[str, list[str]]]:
        """Inverse of :meth:`from_records` (hashtags in first-appearance order)."""
        return [(self.users[u], [self.hashtags[t] for t in tags]) for u, tags in self.tweets]

    def to_tsv(self) -> str:
        return "".join(f"{user}\t{','.join(tags)}\n" for user, tags in self.records())

    def write_tsv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_tsv())


def parse_tweets(stream: TextIO | Iterable[str]) -> InteractionDataset:
    """Parse a line-oriented tweet log into an :class:`InteractionDataset`.

    Raises :class:`ParseError` with the offending line number when a line
    has no TAB, an empty user id, or no hashtags left after normalization.
    """
    records = []
    for lineno, line in enumerate(stream, start=1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        if "\t" not in line:
            raise ParseError(lineno, "expected user_id<TAB>hashtags")
        user, _, tags = line.partition("\t")
        user = user.strip()
        if not user:
            raise ParseError(lineno, "empty user id")
        normalized = [t for t in (normalize_hashtag(x) for x in tags.split(",")) if t]
        if not normalized:
            raise ParseError(lineno, "empty hashtag list")
        records.append((user, normalized))
    return InteractionDataset.from_records(records)


def parse_tweets_text(text: str) -> InteractionDataset:
    return parse_tweets(io.StringIO(text))


def read_tweets(path) -> InteractionDataset:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_tweets(fh)


@dataclass(frozen=True, eq=False)
class UserHashtagMatrix:
    """Binary N x M adoption matrix stored as sorted, unique (row, col) pairs.

    Absent positions are unknown, not negative feedback.
    """

    n_users: int
    n_hashtags: int
    rows: np.ndarray
    cols: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        if rows.shape != cols.shape or rows.ndim != 1:
            raise ValueError("rows and cols must be 1-d arrays of equal length")
        if rows.size:
            if rows.min() < 0 or rows.max() >= self.n_users:
                raise ValueError("row index out of range")
            if cols.min() < 0 or cols.max() >= self.n_hashtags:
                raise ValueError("column index out of range")
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        if rows.size > 1:
            dup = (rows[1:] == rows[:-1]) & (cols[1:] == cols[:-1])
            if dup.any():
                raise ValueError("duplicate (i, j) entry")
        rows.setflags(write=False)
        cols.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)

    @classmethod
    def from_entries(cls, n_users: int, n_hashtags: int, entries: Iterable[tuple[int, int]]):
        pairs = np.array(sorted(set(entries)), dtype=np.int64).reshape(-1, 2)
        return cls(n_users, n_hashtags, pairs[:, 0], pairs[:, 1])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_users, self.n_hashtags)

    @property
    def nnz(self) -> int:
        return int(self.rows.size)

    def entries(self) -> list[tuple[int, int]]:
        return list(zip(self.rows.tolist(), self.cols.tolist()))

    def tocsr(self) -> sp.csr_matrix:
        data = np.ones(self.nnz, dtype=np.float64)
        return sp.csr_matrix((data, (self.rows, self.cols)), shape=self.shape)

    def adopted(self, user: int) -> np.ndarray:
        """Sorted hashtag indices adopted by ``user``."""
        lo, hi = np.searchsorted(self.rows, [user, user + 1])
        return self.cols[lo:hi]

    def row_counts(self) -> np.ndarray:
        return np.bincount(self.rows, minlength=self.n_users)

    def without(self, removed: Iterable[tuple[int, int]]) -> "UserHashtagMatrix":
        """Copy of this matrix with the given entries set to 0."""
        drop = set(map(tuple, removed))
        keep = np.array([(i, j) not in drop for i, j in self.entries()], dtype=bool)
        return UserHashtagMatrix(self.n_users, self.n_hashtags, self.rows[keep], self.cols[keep])

    def sparsity(self) -> float:
        total = self.n_users * self.n_hashtags
        return 1.0 - self.nnz / total if total else 1.0

    def __eq__(self, other):
        if not isinstance(other, UserHashtagMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
        )


@dataclass(frozen=True, eq=False)
class CooccurrenceMatrix:
    """Symmetric M x M co-use counts with a zero diagonal (CSR, int64)."""

    n_hashtags: int
    counts: sp.csr_matrix = field(repr=False)

    def __post_init__(self):
        counts = sp.csr_matrix(self.counts, dtype=np.int64)
        if counts.shape != (self.n_hashtags, self.n_hashtags):
            raise ValueError("co-occurrence matrix must be M x M")
        counts.eliminate_zeros()
        counts.sort_indices()
        if counts.nnz and counts.data.min() < 0:
            raise ValueError("co-occurrence counts must be nonnegative")
        if counts.diagonal().any():
            raise ValueError("co-occurrence diagonal must be zero")
        if (counts != counts.T).nnz:
            raise ValueError("co-occurrence matrix must be symmetric")
        object.__setattr__(self, "counts", counts)

    def get(self, j: int, k: int) -> int:
        return int(self.counts[j, k])

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.counts.sum(axis=1)).ravel()

    def pair_total(self) -> int:
        """Sum over the strict upper triangle."""
        return int(self.counts.sum()) // 2

    def __eq__(self, other):
        if not isinstance(other, CooccurrenceMatrix):
            return NotImplemented
        return self.n_hashtags == other.n_hashtags and (self.counts != other.counts).nnz == 0


def build_matrices(d: InteractionDataset) -> tuple[UserHashtagMatrix, CooccurrenceMatrix]:
    """Build the adoption matrix X and the co-occurrence matrix Y.

    Each tweet with h hashtags adds 1 to y_jk for each of its h(h-1)/2
    unordered pairs.
    """
    adopted = set()
    pair_rows, pair_cols = [], []
    upper_idx: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for u, tags in d.tweets:
        for t in tags:
            adopted.add((u, t))
        arr = np.asarray(tags, dtype=np.int64)
        if arr.size > 1:
            if arr.size not in upper_idx:
                upper_idx[arr.size] = np.triu_indices(arr.size, k=1)
            a, b = upper_idx[arr.size]
            pair_rows.append(arr[a])
            pair_cols.append(arr[b])
    X = UserHashtagMatrix.from_entries(d.n_users, d.n_hashtags, adopted)
    m = d.n_hashtags
    if pair_rows:
        r = np.concatenate(pair_rows)
        c = np.concatenate(pair_cols)
        ones = np.ones(r.size, dtype=np.int64)
        upper = sp.coo_matrix((ones, (r, c)), shape=(m, m)).tocsr()
        counts = upper + upper.T
    else:
        counts = sp.csr_matrix((m, m), dtype=np.int64)
    return X, CooccurrenceMatrix(m, counts)


def summarize(d: InteractionDataset, X: UserHashtagMatrix | None = None,
              Y: CooccurrenceMatrix | None = None) -> dict[str, int | float]:
    """Dataset statistics keyed like the usual corpus-description table.

    "Paired hashtags adopted by a user" counts the distinct co-occurring
    pairs across that user's tweets.
    """
    if X is None or Y is None:
        X, Y = build_matrices(d)
    per_user: dict[int, set] = {}
    for u, tags in d.tweets:
        s = per_user.setdefault(u, set())
        for a in range(len(tags)):
            for b in range(a + 1, len(tags)):
                s.add((tags[a], tags[b]))
    pairs_by_user = [len(per_user.get(u, ())) for u in range(d.n_users)]
    upper = sp.triu(Y.counts, k=1)
    return {
        "# of users": d.n_users,
        "# of tweets": d.n_tweets,
        "Max # of paired hashtags adopted by users": max(pairs_by_user, default=0),
        "Min # of paired hashtags adopted by users": min(pairs_by_user, default=0),
        "Max # of times given paired hashtag used": int(upper.data.max()) if upper.nnz else 0,
        # Pairs that never co-occur exist whenever M >= 2 and Y is not complete.
        "Min # of times given paired hashtag used": (
            0 if upper.nnz < d.n_hashtags * (d.n_hashtags - 1) // 2 else int(upper.data.min())
        ),
        "# of hashtags": d.n_hashtags,
        "# of adoptions": X.nnz,
        "sparsity": X.sparsity(),
    }


def format_summary(stats: dict[str, int | float]) -> str:
    lines = []
    for key, value in stats.items():
        if isinstance(value, float):
            lines.append(f"{key}: {value:.6f}")
        else:
            lines.append(f"{key}: {value}")
    return "\n".join(lines) + "\n"
