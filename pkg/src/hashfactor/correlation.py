"""Hashtag correlation and the hWMF weight matrix.

The correlation of a candidate hashtag j with an anchor hashtag k is the
share of j's co-occurrences that involve k, measured against j's
co-occurrences with every *other* hashtag::

    corr(k, j) = y_jk / sum_{t != k} y_jt

The measure is asymmetric. It is capped at 1 and defined as 0 when the
denominator vanishes.

Weights: 1 on observed adoptions; on unknown (i, j) the correlations of j
with the user's adopted hashtags, summed over the co-occurring ones and
divided by the number of adopted hashtags.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.sparse as sp

from .ingest import CooccurrenceMatrix, UserHashtagMatrix

Normalization = Literal["adopted", "correlated"]


def corr(Y: CooccurrenceMatrix, k: int, j: int) -> float:
    """Correlation of candidate ``j`` with anchor ``k`` (row j normalizes)."""
    m = Y.n_hashtags
    if not (0 <= j < m and 0 <= k < m):
        raise IndexError(f"hashtag index out of range for M={m}")
    if j == k:
        raise ValueError("corr is undefined for j == k")
    row = Y.counts.getrow(j)
    y_jk = float(Y.counts[j, k])
    denom = float(row.sum()) - y_jk
    if denom <= 0:
        return 0.0
    return min(1.0, y_jk / denom)


def correlation_matrix(Y: CooccurrenceMatrix) -> sp.csr_matrix:
    """Sparse C with C[j, k] = corr(k, j), stored only where y_jk >= 1.

    Entries with a zero denominator are dropped, so C may have fewer
    stored values than Y.
    """
    counts = Y.counts.tocsr().astype(np.float64)
    row_sums = np.asarray(counts.sum(axis=1)).ravel()
    row_of = np.repeat(np.arange(counts.shape[0]), np.diff(counts.indptr))
    denom = row_sums[row_of] - counts.data
    data = np.zeros_like(counts.data)
    ok = denom > 0
    data[ok] = np.minimum(1.0, counts.data[ok] / denom[ok])
    C = sp.csr_matrix((data, counts.indices.copy(), counts.indptr.copy()), shape=counts.shape)
    C.eliminate_zeros()
    return C


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """Sparse N x M learning weights in (0, 1]; zeros are not stored.

    ``rows``/``cols`` are in row-major sorted order, matching the CSR layout
    returned by :meth:`tocsr`.
    """

    n_users: int
    n_hashtags: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        if not (rows.shape == cols.shape == values.shape) or rows.ndim != 1:
            raise ValueError("rows, cols and values must be 1-d arrays of equal length")
        if values.size and (values.min() <= 0 or values.max() > 1):
            raise ValueError("weights must lie in (0, 1]")
        order = np.lexsort((cols, rows))
        for name, arr in (("rows", rows[order]), ("cols", cols[order]), ("values", values[order])):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_csr(cls, W: sp.spmatrix) -> "WeightMatrix":
        coo = sp.coo_matrix(W)
        keep = coo.data != 0
        return cls(coo.shape[0], coo.shape[1], coo.row[keep], coo.col[keep], coo.data[keep])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_users, self.n_hashtags)

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    def tocsr(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.values, (self.rows, self.cols)), shape=self.shape)

    def as_dict(self) -> dict[tuple[int, int], float]:
        return {(i, j): w for i, j, w in zip(self.rows.tolist(), self.cols.tolist(), self.values.tolist())}

    def to_tsv(self) -> str:
        return "".join(
            f"{i}\t{j}\t{w!r}\n" for i, j, w in zip(self.rows.tolist(), self.cols.tolist(), self.values.tolist())
        )

    def __eq__(self, other):
        if not isinstance(other, WeightMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
            and np.array_equal(self.values, other.values)
        )


def correlated_average(X: UserHashtagMatrix, Y: CooccurrenceMatrix,
                       normalize: Normalization = "adopted") -> sp.csr_matrix:
    """N x M matrix of averaged correlations, before observed entries are fixed to 1.

    ``normalize="adopted"`` divides by |A_i|, the user's full adopted set;
    ``"correlated"`` divides by how many adopted hashtags co-occur with j.
    Rows of users with no adoptions are all zero.
    """
    if X.n_hashtags != Y.n_hashtags:
        raise ValueError("X and Y disagree on the number of hashtags")
    Xc = X.tocsr()
    C = correlation_matrix(Y)
    sums = (Xc @ C.T).tocsr()
    if normalize == "adopted":
        denom = X.row_counts().astype(np.float64)
        row_of = np.repeat(np.arange(sums.shape[0]), np.diff(sums.indptr))
        sums.data = sums.data / denom[row_of]
    elif normalize == "correlated":
        linked = (Y.counts > 0).astype(np.float64)
        n_linked = (Xc @ linked.T).tocsr()
        # ``sums`` has a subset of n_linked's pattern: C drops zero-denominator pairs.
        n_at = np.asarray(n_linked[sums.nonzero()]).ravel()
        sums = sums.tocoo()
        sums = sp.csr_matrix((sums.data / n_at, (sums.row, sums.col)), shape=sums.shape)
    else:
        raise ValueError(f"unknown normalization {normalize!r}")
    sums.eliminate_zeros()
    return sums


def build_weight_matrix(X: UserHashtagMatrix, Y: CooccurrenceMatrix,
                        normalize: Normalization = "adopted") -> WeightMatrix:
    """The hWMF weights: 1 where x_ij = 1, averaged correlation elsewhere."""
    avg = correlated_average(X, Y, normalize).tocoo()
    m = X.n_hashtags
    observed_keys = X.rows * m + X.cols  # sorted, since X is row-major
    unknown = ~np.isin(avg.row.astype(np.int64) * m + avg.col, observed_keys, assume_unique=False)
    rows = np.concatenate([X.rows, avg.row[unknown]])
    cols = np.concatenate([X.cols, avg.col[unknown]])
    vals = np.concatenate([np.ones(X.nnz), avg.data[unknown]])
    # Averages of values in [0, 1] can round a hair above 1.
    vals = np.minimum(vals, 1.0)
    return WeightMatrix(X.n_users, X.n_hashtags, rows, cols, vals)
