"""Weighted low-rank factorization trained by alternating gradient steps.

Minimizes::

    L(U, V) = ||W * (X - U V^T)||_F^2 + gamma1 ||U||_F^2 + gamma2 ||V||_F^2

where ``*`` is the Hadamard product and the data term runs over the stored
positions of W only. U V^T is never materialized during training; every
product is a sparse contraction over W's pattern, so one iteration costs
O(nnz(W) * d + (N + M) * d).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from ._kernels import sampled_dot
from .correlation import WeightMatrix
from .ingest import UserHashtagMatrix

log = logging.getLogger(__name__)

EPS = 1e-12
MODEL_MAGIC = "hwmf-model"
MODEL_VERSION = "v1"


class TrainingDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    d: int = 10
    gamma1: float = 0.2
    gamma2: float = 0.2
    lam: float = 0.001
    max_iters: int = 500
    rel_tol: float = 1e-5
    rng_seed: int = 0
    nonneg_projection: bool = True
    paper_exact_grad: bool = False

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError("d must be a positive integer")
        for name in ("gamma1", "gamma2", "lam", "rel_tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 0:
            raise ValueError("max_iters must be a nonnegative integer")

    def check_shape(self, n_users: int, n_hashtags: int) -> None:
        if self.d > min(n_users, n_hashtags):
            raise ValueError(f"d={self.d} exceeds min(N, M)={min(n_users, n_hashtags)}")


@dataclass(eq=False)
class FactorModel:
    U: np.ndarray
    V: np.ndarray
    config: TrainConfig
    trace: list[float] = field(default_factory=list)
    converged: bool = False

    @property
    def n_users(self) -> int:
        return self.U.shape[0]

    @property
    def n_hashtags(self) -> int:
        return self.V.shape[0]

    @property
    def d(self) -> int:
        return self.U.shape[1]

    def score(self, i: int, j: int) -> float:
        return float(self.U[i] @ self.V[j])

    def score_entries(self, rows, cols) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        return np.einsum("ij,ij->i", self.U[rows], self.V[cols])

    def user_scores(self, i: int) -> np.ndarray:
        return self.V @ self.U[i]

    def save(self, path) -> None:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(format_model(self))

    def save_trace(self, path) -> None:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(format_trace(self.trace))


def format_model(model: FactorModel) -> str:
    n, d = model.U.shape
    m = model.V.shape[0]
    lines = [f"{MODEL_MAGIC} {MODEL_VERSION} {n} {m} {d}"]
    for row in np.vstack([model.U, model.V]) if n + m else []:
        lines.append(" ".join(f"{x:.17g}" for x in row))
    return "\n".join(lines) + "\n"


def parse_model(text: str, config: TrainConfig | None = None) -> FactorModel:
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty model file")
    head = lines[0].split()
    if len(head) != 5 or head[0] != MODEL_MAGIC or head[1] != MODEL_VERSION:
        raise ValueError(f"bad model header: {lines[0]!r}")
    n, m, d = (int(x) for x in head[2:])
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != n + m:
        raise ValueError(f"expected {n + m} factor rows, found {len(body)}")
    mat = np.array([[float(x) for x in ln.split()] for ln in body], dtype=np.float64).reshape(n + m, d)
    if config is None:
        config = TrainConfig(d=d)
    return FactorModel(U=mat[:n].copy(), V=mat[n:].copy(), config=config)


def load_model(path, config: TrainConfig | None = None) -> FactorModel:
    with open(path, encoding="ascii") as fh:
        return parse_model(fh.read(), config)


def format_trace(trace) -> str:
    return "iter,objective\n" + "".join(f"{t},{v:.17g}\n" for t, v in enumerate(trace, start=1))


def _csr_shell(rows: np.ndarray, cols: np.ndarray, shape) -> sp.csr_matrix:
    """CSR matrix whose ``data`` slots line up one-to-one with (rows, cols),
    which must be sorted row-major."""
    indptr = np.searchsorted(rows, np.arange(shape[0] + 1))
    return sp.csr_matrix((np.zeros(rows.size), cols.copy(), indptr), shape=shape)


class _WeightedProblem:
    """W's sparsity pattern with X looked up on it, plus reusable CSR shells."""

    def __init__(self, X: UserHashtagMatrix, W: WeightMatrix):
        if X.shape != W.shape:
            raise ValueError(f"X is {X.shape} but W is {W.shape}")
        self.shape = W.shape
        self.rows = W.rows
        self.cols = W.cols
        self.w = W.values
        self.w2 = W.values ** 2
        xc = X.tocsr()
        self.x = np.asarray(xc[self.rows, self.cols]).ravel() if W.nnz else np.zeros(0)
        n, m = self.shape
        self._R = _csr_shell(self.rows, self.cols, (n, m))
        self._perm_t = np.lexsort((self.rows, self.cols))
        self._RT = _csr_shell(self.cols[self._perm_t], self.rows[self._perm_t], (m, n))

    def check_factors(self, U: np.ndarray, V: np.ndarray) -> None:
        n, m = self.shape
        if U.ndim != 2 or V.ndim != 2 or U.shape[0] != n or V.shape[0] != m or U.shape[1] != V.shape[1]:
            raise ValueError(f"factor shapes {U.shape}, {V.shape} incompatible with {self.shape}")

    def predict(self, U: np.ndarray, V: np.ndarray) -> np.ndarray:
        return sampled_dot(self.rows, self.cols, U, V)

    def objective(self, U, V, gamma1, gamma2, pred=None) -> float:
        if pred is None:
            pred = self.predict(U, V)
        resid = self.w * (self.x - pred)
        return float(resid @ resid + gamma1 * np.vdot(U, U) + gamma2 * np.vdot(V, V))

    def _coeffs(self, pred, paper_exact: bool) -> np.ndarray:
        # Per-position c such that the data gradient is 2 C V (or 2 C^T U).
        diff = pred - self.x
        return (self.w * diff) if paper_exact else (self.w2 * diff)

    def grad_u(self, U, V, gamma1, paper_exact=False, pred=None) -> np.ndarray:
        if pred is None:
            pred = self.predict(U, V)
        self._R.data[:] = self._coeffs(pred, paper_exact)
        reg = gamma1 if paper_exact else 2.0 * gamma1
        return 2.0 * (self._R @ V) + reg * U

    def grad_v(self, U, V, gamma2, paper_exact=False, pred=None) -> np.ndarray:
        if pred is None:
            pred = self.predict(U, V)
        self._RT.data[:] = self._coeffs(pred, paper_exact)[self._perm_t]
        reg = gamma2 if paper_exact else 2.0 * gamma2
        return 2.0 * (self._RT @ U) + reg * V


def objective(X: UserHashtagMatrix, W: WeightMatrix, U, V, gamma1: float, gamma2: float) -> float:
    prob = _WeightedProblem(X, W)
    prob.check_factors(np.asarray(U), np.asarray(V))
    return prob.objective(np.asarray(U, dtype=float), np.asarray(V, dtype=float), gamma1, gamma2)


def grad_u(X, W, U, V, gamma1: float, paper_exact: bool = False) -> np.ndarray:
    """dL/dU.

    With ``paper_exact`` the rule -2(W.X)V + 2(W.(UV^T))V + gamma1 U is used
    instead: weights enter linearly and the regularizer is not doubled. It
    is the true gradient only for binary W and gamma1 -> gamma1 / 2.
    """
    prob = _WeightedProblem(X, W)
    U, V = np.asarray(U, dtype=float), np.asarray(V, dtype=float)
    prob.check_factors(U, V)
    return prob.grad_u(U, V, gamma1, paper_exact)


def grad_v(X, W, U, V, gamma2: float, paper_exact: bool = False) -> np.ndarray:
    prob = _WeightedProblem(X, W)
    U, V = np.asarray(U, dtype=float), np.asarray(V, dtype=float)
    prob.check_factors(U, V)
    return prob.grad_v(U, V, gamma2, paper_exact)


def init_factors(n_users: int, n_hashtags: int, d: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    U = rng.random((n_users, d))
    V = rng.random((n_hashtags, d))
    return U, V


def _step(prob: _WeightedProblem, U, V, pred, config: TrainConfig):
    """One U step then one V step; ``pred`` is U V^T on W's pattern for the inputs."""
    exact, lam = config.paper_exact_grad, config.lam
    U = U - lam * prob.grad_u(U, V, config.gamma1, exact, pred)
    if config.nonneg_projection:
        np.maximum(U, 0.0, out=U)
    V = V - lam * prob.grad_v(U, V, config.gamma2, exact)
    if config.nonneg_projection:
        np.maximum(V, 0.0, out=V)
    pred = prob.predict(U, V)
    return U, V, pred, prob.objective(U, V, config.gamma1, config.gamma2, pred)


def train(X: UserHashtagMatrix, W: WeightMatrix, config: TrainConfig = TrainConfig()) -> FactorModel:
    """Alternate a gradient step on U, then on V, until the objective settles.

    Stops when the relative change of L drops below ``config.rel_tol`` or
    after ``config.max_iters`` iterations. ``trace[t]`` is L after
    iteration t + 1.
    """
    n, m = X.shape
    config.check_shape(n, m)
    prob = _WeightedProblem(X, W)
    U, V = init_factors(n, m, config.d, config.rng_seed)
    lam = config.lam

    pred = prob.predict(U, V)
    prev = prob.objective(U, V, config.gamma1, config.gamma2, pred)
    trace: list[float] = []
    converged = False
    for it in range(config.max_iters):
        U, V, pred, cur = _step(prob, U, V, pred, config)
        if not np.isfinite(cur):
            raise TrainingDiverged(
                f"objective became non-finite at iteration {it + 1}; "
                f"learning step lambda={lam:g} is too large for this problem"
            )
        trace.append(cur)
        if abs(cur - prev) / max(prev, EPS) < config.rel_tol:
            converged = True
            break
        prev = cur
    log.debug("trained d=%d in %d iterations, L=%s", config.d, len(trace), trace[-1] if trace else prev)
    return FactorModel(U=U, V=V, config=config, trace=trace, converged=converged)


def predict(model: FactorModel) -> np.ndarray:
    """Dense reconstruction U V^T. Use :meth:`FactorModel.score_entries` for large N * M."""
    return model.U @ model.V.T


def recommend(model: FactorModel, X: UserHashtagMatrix, user: int, k: int) -> list[tuple[int, float]]:
    """Top-k unadopted hashtags for ``user`` by reconstructed score.

    Ties go to the lower hashtag index.
    """
    if not 0 <= user < model.n_users:
        raise IndexError(f"user {user} out of range for N={model.n_users}")
    if k < 1:
        raise ValueError("k must be >= 1")
    return rank_candidates(model.user_scores(user), X.adopted(user), k)


def rank_candidates(scores: np.ndarray, adopted, k: int) -> list[tuple[int, float]]:
    scores = np.asarray(scores, dtype=np.float64)
    candidate = np.ones(scores.size, dtype=bool)
    candidate[np.asarray(adopted, dtype=np.int64)] = False
    idx = np.flatnonzero(candidate)
    order = np.lexsort((idx, -scores[idx]))
    top = idx[order[:k]]
    return [(int(j), float(scores[j])) for j in top]


def with_seed(config: TrainConfig, seed: int) -> TrainConfig:
    return replace(config, rng_seed=seed)
