"""Per-iteration training cost as a function of the latent dimension."""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Sequence

from .correlation import WeightMatrix
from .factorization import TrainConfig, _step, _WeightedProblem, init_factors
from .ingest import UserHashtagMatrix


@dataclass(frozen=True)
class BenchRow:
    d: int
    nnz_w: int
    seconds_per_iter: float


def _runner(X, W, d, config, seed):
    cfg = replace(config, d=d, rng_seed=seed)
    prob = _WeightedProblem(X, W)
    U0, V0 = init_factors(X.n_users, X.n_hashtags, d, seed)
    _step(prob, U0, V0, prob.predict(U0, V0), cfg)  # warm-up, compiles the kernel

    def run(n_iters):
        U, V = U0.copy(), V0.copy()
        pred = prob.predict(U, V)
        start = time.perf_counter()
        for _ in range(n_iters):
            U, V, pred, _obj = _step(prob, U, V, pred, cfg)
        return (time.perf_counter() - start) / n_iters

    return run


def time_iterations(X: UserHashtagMatrix, W: WeightMatrix, d: int, n_iters: int = 20,
                    repeats: int = 5, config: TrainConfig = TrainConfig(), seed: int = 0) -> float:
    """Best over ``repeats`` of the mean wall time of one training iteration.

    Setup (pattern preprocessing, initialization, kernel warm-up) is not timed.
    The minimum is the least noise-contaminated estimate on a shared machine.
    """
    run = _runner(X, W, d, config, seed)
    return min(run(n_iters) for _ in range(repeats))


def bench(X: UserHashtagMatrix, W: WeightMatrix, dims: Sequence[int] = (5, 10, 15, 20, 25),
          n_iters: int = 20, repeats: int = 5, config: TrainConfig = TrainConfig(),
          seed: int = 0) -> list[BenchRow]:
    """Time every d; repeats are interleaved across dims so drift hits all of them alike."""
    runners = [_runner(X, W, d, config, seed) for d in dims]
    best = [float("inf")] * len(dims)
    for _ in range(repeats):
        for n, run in enumerate(runners):
            best[n] = min(best[n], run(n_iters))
    return [BenchRow(d, W.nnz, t) for d, t in zip(dims, best)]


def format_bench(rows: Sequence[BenchRow]) -> str:
    lines = ["d\tnnz_w\tms_per_iter\tratio_to_first"]
    base = rows[0].seconds_per_iter if rows else 1.0
    for r in rows:
        lines.append(f"{r.d}\t{r.nnz_w}\t{r.seconds_per_iter * 1e3:.3f}\t{r.seconds_per_iter / base:.3f}")
    return "\n".join(lines) + "\n"
