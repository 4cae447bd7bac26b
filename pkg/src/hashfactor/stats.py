"""Usage-consistency test: within-user vs cross-user hashtag correlations.

``hc_u`` samples correlations between two hashtags of the same user,
``hc_r`` between a hashtag of one user and a hashtag of another. A
one-sided Welch t-test asks whether ``hc_u`` is larger.

The Student-t tail comes from the regularized incomplete beta function,
evaluated with the modified Lentz continued fraction.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .ingest import CooccurrenceMatrix, InteractionDataset, UserHashtagMatrix

_CF_EPS = 1e-16
_CF_TINY = 1e-300
_CF_MAX_ITER = 100_000


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for I_x(a, b), valid for x < (a + 1) / (a + b + 2)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = _CF_TINY if abs(d) < _CF_TINY else d
        c = 1.0 + aa / c
        c = _CF_TINY if abs(c) < _CF_TINY else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = _CF_TINY if abs(d) < _CF_TINY else d
        c = 1.0 + aa / c
        c = _CF_TINY if abs(c) < _CF_TINY else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc_regularized(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_sf(t: float, dof: float) -> float:
    """P(T > t) for Student's t with ``dof`` degrees of freedom."""
    if not dof > 0:
        raise ValueError("dof must be positive")
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    x = dof / (dof + t * t)
    tail = 0.5 * betainc_regularized(0.5 * dof, 0.5, x)
    return tail if t > 0 else 1.0 - tail


def student_t_cdf(t: float, dof: float) -> float:
    return 1.0 - student_t_sf(t, dof)


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    p_value_one_sided: float
    dof: float
    reject_at: float = 0.001

    @property
    def reject(self) -> bool:
        return self.p_value_one_sided < self.reject_at

    def format_line(self) -> str:
        level = f"{self.reject_at:g}"
        return (f"t={self.t_statistic:.6g} dof={self.dof:.6g} p={self.p_value_one_sided:.6g} "
                f"reject@{level}={'yes' if self.reject else 'no'}")


def welch_t_test(a: Sequence[float], b: Sequence[float],
                 alternative: Literal["greater", "less"] = "greater",
                 alpha: float = 0.001, pooled: bool = False) -> TTestResult:
    """One-sided two-sample t-test of mean(a) > mean(b) (or < with "less").

    Welch's statistic with Welch-Satterthwaite degrees of freedom by
    default; ``pooled=True`` assumes equal variances instead.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na, nb = a.size, b.size
    if na < 2 or nb < 2:
        raise ValueError("each sample needs at least two values")
    va, vb = a.var(ddof=1), b.var(ddof=1)
    if va == 0 and vb == 0:
        raise ValueError("both samples have zero variance; t is undefined")
    diff = a.mean() - b.mean()
    if pooled:
        dof = float(na + nb - 2)
        sp2 = ((na - 1) * va + (nb - 1) * vb) / dof
        se = math.sqrt(sp2 * (1.0 / na + 1.0 / nb))
    else:
        qa, qb = va / na, vb / nb
        se = math.sqrt(qa + qb)
        dof = (qa + qb) ** 2 / (qa * qa / (na - 1) + qb * qb / (nb - 1))
    t = float(diff / se)
    if alternative == "greater":
        p = student_t_sf(t, dof)
    elif alternative == "less":
        p = student_t_cdf(t, dof)
    else:
        raise ValueError(f"unsupported alternative {alternative!r}")
    return TTestResult(t, p, float(dof), alpha)


@dataclass(frozen=True, eq=False)
class ConsistencySample:
    hc_u: np.ndarray
    hc_r: np.ndarray
    seed: int

    def __post_init__(self):
        if self.hc_u.size != self.hc_r.size or self.hc_u.size == 0:
            raise ValueError("hc_u and hc_r must be nonempty and of equal length")


class _LeaveOut:
    """Per-user co-occurrence contributions, for subtracting a user's own tweets."""

    def __init__(self, Y: CooccurrenceMatrix, dataset: InteractionDataset):
        if dataset.n_hashtags != Y.n_hashtags:
            raise ValueError("leave-out dataset does not match Y")
        self.pairs: dict[int, Counter] = {}
        self.rows: dict[int, Counter] = {}
        for u, tags in dataset.tweets:
            if len(tags) < 2:
                continue
            pc = self.pairs.setdefault(u, Counter())
            rc = self.rows.setdefault(u, Counter())
            for x in tags:
                rc[x] += len(tags) - 1
            for p in range(len(tags)):
                for q in range(p + 1, len(tags)):
                    pc[(tags[p], tags[q])] += 1


def _pick(rng, starts: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    """One uniform position inside each [start, start + size) block."""
    return starts + (rng.random(sizes.size) * sizes).astype(np.int64)


def _pick_pair(rng, starts: np.ndarray, sizes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two distinct uniform positions inside each block (sizes >= 2)."""
    a = (rng.random(sizes.size) * sizes).astype(np.int64)
    b = (rng.random(sizes.size) * (sizes - 1)).astype(np.int64)
    b += b >= a
    return starts + a, starts + b


def build_consistency_sample(X: UserHashtagMatrix, Y: CooccurrenceMatrix, n_pairs: int = 5000,
                             seed: int = 0, leave_out: InteractionDataset | None = None
                             ) -> ConsistencySample:
    """Draw ``n_pairs`` within-user and ``n_pairs`` cross-user correlations.

    Within-user: a user with at least two hashtags, then an ordered pair
    (h_i, h_j) of distinct hashtags from that user. Cross-user: two
    distinct users, h_i from the first and h_j from the second, redrawn
    when h_i == h_j. All draws are with replacement; the value is
    corr(h_i, h_j) with h_j's row as the normalizer.

    When ``leave_out`` (the dataset X and Y came from) is given, each
    correlation is computed from co-occurrences that exclude the tweets
    of the sampled users, so a pair never supports itself.
    """
    if n_pairs < 2:
        raise ValueError("n_pairs must be >= 2")
    counts = X.row_counts()
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(np.int64)
    eligible = np.flatnonzero(counts >= 2)
    active = np.flatnonzero(counts >= 1)
    if eligible.size == 0:
        raise ValueError("no user has two or more adopted hashtags")
    if active.size < 2:
        raise ValueError("cross-user pairs need at least two users with hashtags")
    rng = np.random.default_rng(seed)

    users_u = eligible[rng.integers(eligible.size, size=n_pairs)]
    pa, pb = _pick_pair(rng, starts[users_u], counts[users_u])
    ui, uj = X.cols[pa], X.cols[pb]

    ru = np.empty(n_pairs, dtype=np.int64)
    rr = np.empty(n_pairs, dtype=np.int64)
    ri = np.empty(n_pairs, dtype=np.int64)
    rj = np.empty(n_pairs, dtype=np.int64)
    todo = np.arange(n_pairs)
    for _ in range(1000):
        if todo.size == 0:
            break
        a = rng.integers(active.size, size=todo.size)
        b = rng.integers(active.size - 1, size=todo.size)
        b += b >= a
        u, r = active[a], active[b]
        hi = X.cols[_pick(rng, starts[u], counts[u])]
        hj = X.cols[_pick(rng, starts[r], counts[r])]
        ok = hi != hj
        done = todo[ok]
        ru[done], rr[done], ri[done], rj[done] = u[ok], r[ok], hi[ok], hj[ok]
        todo = todo[~ok]
    else:
        if todo.size:
            raise ValueError("could not draw distinct cross-user hashtag pairs")

    lo = _LeaveOut(Y, leave_out) if leave_out is not None else None
    hc_u = _correlations(Y, ui, uj, lo, (users_u,))
    hc_r = _correlations(Y, ri, rj, lo, (ru, rr))
    return ConsistencySample(hc_u, hc_r, seed)


def _correlations(Y: CooccurrenceMatrix, k: np.ndarray, j: np.ndarray,
                  lo: "_LeaveOut | None", users: tuple[np.ndarray, ...]) -> np.ndarray:
    y = np.asarray(Y.counts[j, k], dtype=np.float64).ravel()
    row = Y.row_sums()[j].astype(np.float64)
    if lo is not None:
        for n in range(y.size):
            key = (int(k[n]), int(j[n])) if k[n] < j[n] else (int(j[n]), int(k[n]))
            jn = int(j[n])
            for who in users:
                u = int(who[n])
                pc = lo.pairs.get(u)
                if pc is not None:
                    y[n] -= pc.get(key, 0)
                    row[n] -= lo.rows[u].get(jn, 0)
    denom = row - y
    out = np.zeros(y.size)
    ok = denom > 0
    out[ok] = np.minimum(1.0, y[ok] / denom[ok])
    return out


def consistency_test(X, Y, n_pairs: int = 5000, seed: int = 0, alpha: float = 0.001,
                     leave_out: InteractionDataset | None = None, pooled: bool = False) -> TTestResult:
    sample = build_consistency_sample(X, Y, n_pairs, seed, leave_out)
    return welch_t_test(sample.hc_u, sample.hc_r, "greater", alpha, pooled)
