"""Synthetic hashtag corpora with planted topical consistency.

Hashtags are partitioned into topics of power-law size. Each user gets one
or two home topics and a power-law number of tweets. A tweet draws its
hashtags from one of the user's home topics with probability
``within_topic_prob`` (popularity-weighted inside the topic), otherwise
uniformly from the whole vocabulary.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .ingest import InteractionDataset


@dataclass(frozen=True)
class SynthParams:
    n_users: int = 500
    n_hashtags: int = 800
    n_topics: int = 40
    tweets_per_user: tuple[int, int] = (2, 30)
    hashtags_per_tweet: tuple[int, int] = (2, 5)
    within_topic_prob: float = 0.8
    power_exponent: float = 2.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "tweets_per_user", tuple(int(x) for x in self.tweets_per_user))
        object.__setattr__(self, "hashtags_per_tweet", tuple(int(x) for x in self.hashtags_per_tweet))
        if self.n_users < 1 or self.n_hashtags < 1:
            raise ValueError("need at least one user and one hashtag")
        if not 1 <= self.n_topics <= self.n_hashtags:
            raise ValueError("n_topics must lie in [1, n_hashtags]")
        lo, hi = self.tweets_per_user
        if not 1 <= lo <= hi:
            raise ValueError("tweets_per_user must be a nonempty range with min >= 1")
        lo, hi = self.hashtags_per_tweet
        if not 1 <= lo <= hi:
            raise ValueError("hashtags_per_tweet must be a nonempty range with min >= 1")
        if lo > self.n_hashtags:
            raise ValueError("hashtags_per_tweet minimum exceeds the vocabulary size")
        if not 0.0 <= self.within_topic_prob <= 1.0:
            raise ValueError("within_topic_prob must lie in [0, 1]")
        if not self.power_exponent > 1.0:
            raise ValueError("power_exponent must be > 1")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "SynthParams":
        return cls(**json.loads(text))


def _power_law_int(rng: np.random.Generator, lo: int, hi: int, alpha: float, size: int) -> np.ndarray:
    """Integers on [lo, hi] with P(k) proportional to k^-alpha."""
    ks = np.arange(lo, hi + 1)
    p = ks.astype(np.float64) ** -alpha
    return rng.choice(ks, size=size, p=p / p.sum())


def topic_sizes(rng: np.random.Generator, n_hashtags: int, n_topics: int, alpha: float) -> np.ndarray:
    """Power-law topic sizes summing to ``n_hashtags``, each at least 1."""
    raw = rng.pareto(alpha - 1.0, size=n_topics) + 1.0
    spare = n_hashtags - n_topics
    share = raw / raw.sum() * spare
    sizes = np.floor(share).astype(np.int64)
    # Largest-remainder rounding keeps the total exact.
    remainder = spare - sizes.sum()
    order = np.argsort(-(share - sizes), kind="stable")
    sizes[order[:remainder]] += 1
    return sizes + 1


def generate(params: SynthParams) -> InteractionDataset:
    rng = np.random.default_rng(params.seed)
    m, alpha = params.n_hashtags, params.power_exponent
    sizes = topic_sizes(rng, m, params.n_topics, alpha)
    perm = rng.permutation(m)
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    topics = [perm[bounds[t]:bounds[t + 1]] for t in range(params.n_topics)]
    # Zipf-like popularity inside each topic.
    popularity = [np.arange(1, s + 1, dtype=np.float64) ** -(alpha - 1.0) for s in sizes]
    popularity = [p / p.sum() for p in popularity]
    topic_p = sizes / sizes.sum()

    n_tweets = _power_law_int(rng, *params.tweets_per_user, alpha, params.n_users)
    h_lo, h_hi = params.hashtags_per_tweet
    names = [f"h{j:05d}" for j in range(m)]
    records = []
    for u in range(params.n_users):
        n_home = 1 if rng.random() < 0.5 or params.n_topics == 1 else 2
        home = rng.choice(params.n_topics, size=n_home, replace=False, p=topic_p)
        user = f"u{u:05d}"
        for _ in range(n_tweets[u]):
            h = int(rng.integers(h_lo, h_hi + 1))
            if rng.random() < params.within_topic_prob:
                t = home[int(rng.integers(n_home))]
                pool, p = topics[t], popularity[t]
                if h >= pool.size:
                    tags = pool
                else:
                    tags = rng.choice(pool, size=h, replace=False, p=p)
            else:
                tags = rng.choice(m, size=h, replace=False)
            records.append((user, [names[j] for j in tags]))
    return InteractionDataset.from_records(records)
