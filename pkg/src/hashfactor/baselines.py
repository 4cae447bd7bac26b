"""Comparison methods: binary-weight MF, kNN over correlations, and coin flips."""

from __future__ import annotations

import numpy as np

from .correlation import Normalization, WeightMatrix, correlation_matrix
from .factorization import FactorModel, TrainConfig, rank_candidates, train
from .ingest import CooccurrenceMatrix, UserHashtagMatrix


def build_binary_weight_matrix(X: UserHashtagMatrix) -> WeightMatrix:
    """Weight 1 on every observed adoption and nothing elsewhere."""
    return WeightMatrix(X.n_users, X.n_hashtags, X.rows, X.cols, np.ones(X.nnz))


def train_mf(X: UserHashtagMatrix, config: TrainConfig = TrainConfig()) -> FactorModel:
    return train(X, build_binary_weight_matrix(X), config)


def knn_correlation_scores(X: UserHashtagMatrix, Y: CooccurrenceMatrix, user: int,
                           normalize: Normalization = "adopted",
                           C=None) -> np.ndarray:
    """Averaged correlation of every hashtag with ``user``'s adopted set.

    Returns a length-M array; adopted hashtags are NaN since they are not
    candidates. A user with nothing adopted scores 0 everywhere. ``C`` may
    pass a precomputed :func:`correlation_matrix` when scoring many users.
    """
    if not 0 <= user < X.n_users:
        raise IndexError(f"user {user} out of range for N={X.n_users}")
    if C is None:
        C = correlation_matrix(Y)
    adopted = X.adopted(user)
    scores = np.zeros(X.n_hashtags)
    if adopted.size:
        sub = C[:, adopted]
        total = np.asarray(sub.sum(axis=1)).ravel()
        if normalize == "adopted":
            scores = total / adopted.size
        elif normalize == "correlated":
            linked = np.asarray((Y.counts[:, adopted] > 0).sum(axis=1)).ravel()
            scores = np.divide(total, linked, out=np.zeros_like(total), where=linked > 0)
        else:
            raise ValueError(f"unknown normalization {normalize!r}")
    scores = np.minimum(scores, 1.0)
    scores[adopted] = np.nan
    return scores


def knn_recommend(X, Y, user: int, k: int = 10, C=None) -> list[tuple[int, float]]:
    scores = knn_correlation_scores(X, Y, user, C=C)
    return rank_candidates(np.nan_to_num(scores, nan=-np.inf), X.adopted(user), k)


def knn_predict(X: UserHashtagMatrix, Y: CooccurrenceMatrix, rows, cols,
                normalize: Normalization = "adopted") -> np.ndarray:
    """kNN scores at the requested (user, hashtag) positions.

    Positions that are adopted in ``X`` get 1.
    """
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    C = correlation_matrix(Y)
    out = np.empty(rows.size)
    for u in np.unique(rows):
        at = rows == u
        scores = knn_correlation_scores(X, Y, int(u), normalize, C=C)
        out[at] = np.nan_to_num(scores[cols[at]], nan=1.0)
    return out


def random_predict(X: UserHashtagMatrix | None, heldout, seed: int) -> np.ndarray:
    """An independent fair 0/1 draw per held-out entry. ``X`` is unused."""
    n = len(heldout)
    rng = np.random.default_rng(seed)
    return rng.integers(0, 2, size=n).astype(np.float64)
