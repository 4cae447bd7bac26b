"""Hold-out masking, RMSE, and the (method x fraction x d x seed) experiment grid."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .baselines import build_binary_weight_matrix, knn_predict, random_predict
from .correlation import build_weight_matrix
from .factorization import TrainConfig, train
from .ingest import InteractionDataset, UserHashtagMatrix, build_matrices

log = logging.getLogger(__name__)

METHODS = ("hwmf", "mf", "knn", "random")
DEFAULT_FRACTIONS = (0.1, 0.2, 0.3, 0.4, 0.5)
DEFAULT_DIMS = (5, 10, 15, 20, 25)
CSV_HEADER = "method,fraction,d,seed,rmse,runtime_s"


@dataclass(frozen=True, eq=False)
class EvalSplit:
    masked_X: UserHashtagMatrix
    heldout_rows: np.ndarray
    heldout_cols: np.ndarray
    fraction: float
    seed: int

    @property
    def heldout(self) -> list[tuple[int, int]]:
        return list(zip(self.heldout_rows.tolist(), self.heldout_cols.tolist()))

    def __len__(self):
        return int(self.heldout_rows.size)


def heldout_size(n_entries: int, fraction: float) -> int:
    # Round half up; Python's round() would send 0.5 to 0.
    return int(math.floor(fraction * n_entries + 0.5))


def make_split(X: UserHashtagMatrix, fraction: float, seed: int) -> EvalSplit:
    """Hide a uniform random ``fraction`` of X's entries.

    The hidden entries become the held-out set; all have truth value 1.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")
    if X.nnz == 0:
        raise ValueError("cannot split an empty matrix")
    n_out = heldout_size(X.nnz, fraction)
    if n_out == 0:
        raise ValueError(f"fraction {fraction} holds out no entries of {X.nnz}")
    rng = np.random.default_rng(seed)
    picked = np.sort(rng.choice(X.nnz, size=n_out, replace=False))
    keep = np.ones(X.nnz, dtype=bool)
    keep[picked] = False
    masked = UserHashtagMatrix(X.n_users, X.n_hashtags, X.rows[keep], X.cols[keep])
    return EvalSplit(masked, X.rows[picked], X.cols[picked], fraction, seed)


def rmse(pred: Sequence[float], truth: Sequence[float]) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise ValueError("pred and truth must be 1-d sequences of equal length")
    if pred.size == 0:
        raise ValueError("rmse of an empty sample is undefined")
    return float(np.sqrt(np.mean((pred - truth) ** 2)))


def mask_dataset(d: InteractionDataset, heldout: Iterable[tuple[int, int]]) -> InteractionDataset:
    """Drop held-out (user, hashtag) adoptions from every tweet of that user.

    Tweets left without hashtags are removed. Indices are preserved.
    """
    hidden = set(map(tuple, heldout))
    tweets = []
    for u, tags in d.tweets:
        kept = tuple(t for t in tags if (u, t) not in hidden)
        if kept:
            tweets.append((u, kept))
    return InteractionDataset(d.users, d.hashtags, tuple(tweets))


@dataclass(frozen=True)
class ReportRow:
    method: str
    fraction: float
    d: int
    seed: int
    rmse: float
    runtime_s: float

    def sort_key(self):
        return (self.method, self.fraction, self.d, self.seed)


@dataclass
class ExperimentReport:
    rows: list[ReportRow] = field(default_factory=list)
    failures: list[tuple[str, float, int, int, str]] = field(default_factory=list)

    def sorted(self) -> "ExperimentReport":
        return ExperimentReport(sorted(self.rows, key=ReportRow.sort_key), sorted(self.failures))

    def to_csv(self, timing: bool = True) -> str:
        lines = [CSV_HEADER]
        for r in sorted(self.rows, key=ReportRow.sort_key):
            runtime = f"{r.runtime_s:.6f}" if timing else "0"
            lines.append(f"{r.method},{r.fraction:g},{r.d},{r.seed},{r.rmse:.17g},{runtime}")
        return "\n".join(lines) + "\n"

    def summary(self) -> dict[tuple[str, float, int], tuple[float, float, int]]:
        """Mean, sample std and count of RMSE per (method, fraction, d)."""
        groups: dict[tuple[str, float, int], list[float]] = {}
        for r in self.rows:
            groups.setdefault((r.method, r.fraction, r.d), []).append(r.rmse)
        out = {}
        for key in sorted(groups):
            vals = np.asarray(groups[key])
            std = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
            out[key] = (float(vals.mean()), std, int(vals.size))
        return out

    def mean_rmse(self, method: str, fraction: float, d: int) -> float:
        return self.summary()[(method, fraction, d)][0]


def evaluate_cell(dataset: InteractionDataset, method: str, fraction: float, d: int, seed: int,
                  config: TrainConfig = TrainConfig(), strict_y_mask: bool = False,
                  matrices=None) -> ReportRow:
    """Score one grid cell; ``matrices`` may carry a prebuilt (X, Y)."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    start = time.perf_counter()
    X, Y = matrices if matrices is not None else build_matrices(dataset)
    split = make_split(X, fraction, seed)
    Xm = split.masked_X
    if strict_y_mask and method in ("hwmf", "knn"):
        _, Y = build_matrices(mask_dataset(dataset, split.heldout))
    cfg = replace(config, d=d, rng_seed=seed)
    if method == "hwmf":
        model = train(Xm, build_weight_matrix(Xm, Y), cfg)
        pred = model.score_entries(split.heldout_rows, split.heldout_cols)
    elif method == "mf":
        model = train(Xm, build_binary_weight_matrix(Xm), cfg)
        pred = model.score_entries(split.heldout_rows, split.heldout_cols)
    elif method == "knn":
        pred = knn_predict(Xm, Y, split.heldout_rows, split.heldout_cols)
    else:
        pred = random_predict(Xm, split.heldout, seed)
    score = rmse(pred, np.ones(len(split)))
    if not math.isfinite(score):
        raise ArithmeticError(f"non-finite RMSE for {method} at fraction={fraction}, d={d}")
    return ReportRow(method, fraction, d, seed, score, time.perf_counter() - start)


def _cell_task(args):
    dataset, method, fraction, d, seed, config, strict = args
    try:
        return evaluate_cell(dataset, method, fraction, d, seed, config, strict)
    except Exception as exc:  # recorded by the caller
        return (method, fraction, d, seed, f"{type(exc).__name__}: {exc}")


def run_experiment(dataset: InteractionDataset,
                   methods: Sequence[str] = ("hwmf",),
                   fractions: Sequence[float] = DEFAULT_FRACTIONS,
                   dims: Sequence[int] = (10,),
                   seeds: Sequence[int] = (0,),
                   config: TrainConfig = TrainConfig(),
                   strict_y_mask: bool = False,
                   workers: int = 1) -> ExperimentReport:
    """Evaluate every (method, fraction, d, seed) cell.

    hWMF weights come from the masked X and, unless ``strict_y_mask``, the
    unmasked co-occurrence matrix. A failing cell lands in
    ``report.failures`` and the rest of the grid still runs.
    """
    if not (methods and fractions and dims and seeds):
        raise ValueError("every grid axis must be nonempty")
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; expected one of {METHODS}")
    cells = [(m, f, d, s) for m in methods for f in fractions for d in dims for s in seeds]
    report = ExperimentReport()
    if workers > 1:
        tasks = [(dataset, m, f, d, s, config, strict_y_mask) for m, f, d, s in cells]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_cell_task, tasks))
    else:
        matrices = build_matrices(dataset)
        results = []
        for m, f, d, s in cells:
            try:
                results.append(evaluate_cell(dataset, m, f, d, s, config, strict_y_mask, matrices))
            except Exception as exc:
                results.append((m, f, d, s, f"{type(exc).__name__}: {exc}"))
    for res in results:
        if isinstance(res, ReportRow):
            report.rows.append(res)
        else:
            log.warning("cell %s failed: %s", res[:4], res[4])
            report.failures.append(res)
    return report.sorted()


def plot_report_svg(report: ExperimentReport, path, d: int | None = None) -> None:
    """Line chart of mean RMSE against held-out fraction, one line per method."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "hashfactor"
    summary = report.summary()
    fig, ax = plt.subplots(figsize=(6, 4))
    for method in sorted({k[0] for k in summary}):
        dims = sorted({k[2] for k in summary if k[0] == method})
        dd = d if d is not None else dims[0]
        pts = sorted((k[1], v[0]) for k, v in summary.items() if k[0] == method and k[2] == dd)
        if pts:
            xs, ys = zip(*pts)
            ax.plot(xs, ys, marker="o", label=f"{method} (d={dd})")
    ax.set_xlabel("held-out fraction")
    ax.set_ylabel("RMSE")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
