"""Command-line entry point: ``hashfactor <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .baselines import build_binary_weight_matrix, knn_recommend
from .bench import bench, format_bench
from .correlation import build_weight_matrix
from .evaluation import METHODS, plot_report_svg, run_experiment
from .factorization import TrainConfig, TrainingDiverged, load_model, recommend, train
from .ingest import ParseError, build_matrices, format_summary, read_tweets, summarize
from .stats import consistency_test
from .synth import SynthParams, generate

log = logging.getLogger("hashfactor")

SEED_ENV = "HASHFACTOR_SEED"


class CliError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _int_range(text: str) -> tuple[int, int]:
    parts = _int_list(text)
    if len(parts) == 1:
        parts = parts * 2
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected LO,HI, got {text!r}")
    return parts[0], parts[1]


def _methods(text: str) -> list[str]:
    names = [x.strip() for x in text.split(",") if x.strip()]
    bad = [n for n in names if n not in METHODS]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"invalid method {text!r}; choose from {','.join(METHODS)}")
    return names


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    defaults = TrainConfig()
    p.add_argument("--d", type=int, default=defaults.d, help="latent dimension")
    p.add_argument("--gamma1", type=float, default=defaults.gamma1)
    p.add_argument("--gamma2", type=float, default=defaults.gamma2)
    p.add_argument("--lambda", dest="lam", type=float, default=defaults.lam, help="learning step")
    p.add_argument("--max-iters", type=int, default=defaults.max_iters)
    p.add_argument("--rel-tol", type=float, default=defaults.rel_tol)
    p.add_argument("--no-projection", action="store_true", help="do not clamp factors at 0")
    p.add_argument("--paper-exact-grad", action="store_true",
                   help="linear weights and un-doubled regularizer in the gradient")


def _config(args, seed: int) -> TrainConfig:
    return TrainConfig(d=args.d, gamma1=args.gamma1, gamma2=args.gamma2, lam=args.lam,
                       max_iters=args.max_iters, rel_tol=args.rel_tol, rng_seed=seed,
                       nonneg_projection=not args.no_projection,
                       paper_exact_grad=args.paper_exact_grad)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise CliError(f"{SEED_ENV} must be an integer, got {env!r}")


def _load(path: str):
    p = Path(path)
    if not p.is_file():
        raise CliError(f"file not found: {path}")
    return read_tweets(p)


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def cmd_synth(args) -> int:
    params = SynthParams(
        n_users=args.n_users, n_hashtags=args.n_hashtags, n_topics=args.n_topics,
        tweets_per_user=args.tweets_per_user, hashtags_per_tweet=args.hashtags_per_tweet,
        within_topic_prob=args.within_topic_prob, power_exponent=args.power_exponent,
        seed=_seed(args),
    )
    data = generate(params)
    _write(args.output, data.to_tsv())
    if args.output and args.output != "-":
        _write(args.output + ".params.json", params.to_json())
    return 0


def cmd_ingest(args) -> int:
    data = _load(args.input)
    X, Y = build_matrices(data)
    _write(args.output, format_summary(summarize(data, X, Y)))
    if args.weights_out:
        _write(args.weights_out, build_weight_matrix(X, Y).to_tsv())
    return 0


def cmd_train(args) -> int:
    if not args.output:
        raise CliError("train needs --output for the model file")
    data = _load(args.input)
    X, Y = build_matrices(data)
    config = _config(args, _seed(args))
    if args.method == "hwmf":
        W = build_weight_matrix(X, Y)
    elif args.method == "mf":
        W = build_binary_weight_matrix(X)
    else:
        raise CliError(f"train supports hwmf and mf, not {args.method}")
    model = train(X, W, config)
    model.save(args.output)
    model.save_trace(args.trace or args.output + ".trace.csv")
    return 0


def cmd_recommend(args) -> int:
    data = _load(args.input)
    X, Y = build_matrices(data)
    try:
        user = data.users.index(args.user)
    except ValueError:
        raise CliError(f"unknown user {args.user!r}")
    if args.method == "knn":
        ranked = knn_recommend(X, Y, user, args.k)
    else:
        if not args.model:
            raise CliError("recommend needs --model unless --method knn")
        if not Path(args.model).is_file():
            raise CliError(f"file not found: {args.model}")
        model = load_model(args.model)
        if model.U.shape[0] != X.n_users or model.V.shape[0] != X.n_hashtags:
            raise CliError("model shape does not match the corpus")
        ranked = recommend(model, X, user, args.k)
    _write(args.output, "".join(f"{data.hashtags[j]}\t{s:.17g}\n" for j, s in ranked))
    return 0


def cmd_evaluate(args) -> int:
    data = _load(args.input)
    seed = _seed(args)
    dims = args.dims if args.dims else [args.d]
    seeds = list(range(seed, seed + args.seeds))
    report = run_experiment(data, args.method, args.fractions, dims, seeds,
                            config=_config(args, seed), strict_y_mask=args.strict_y_mask,
                            workers=args.workers)
    _write(args.output, report.to_csv(timing=not args.no_timing))
    if args.svg:
        plot_report_svg(report, args.svg)
    for cell in report.failures:
        print(f"cell failed: method={cell[0]} fraction={cell[1]} d={cell[2]} seed={cell[3]}: {cell[4]}",
              file=sys.stderr)
    return 1 if report.failures else 0


def cmd_ttest(args) -> int:
    data = _load(args.input)
    X, Y = build_matrices(data)
    result = consistency_test(X, Y, n_pairs=args.n_pairs, seed=_seed(args), alpha=args.alpha,
                              leave_out=data if args.leave_out else None, pooled=args.pooled)
    _write(args.output, result.format_line() + "\n")
    return 0


def cmd_bench(args) -> int:
    if args.input:
        data = _load(args.input)
    else:
        data = generate(SynthParams(n_users=args.n_users, n_hashtags=args.n_hashtags, seed=_seed(args)))
    X, Y = build_matrices(data)
    W = build_weight_matrix(X, Y)
    config = _config(args, _seed(args))
    rows = bench(X, W, args.dims or [5, 10, 15, 20, 25], n_iters=args.iters,
                 repeats=args.repeats, config=config, seed=_seed(args))
    _write(args.output, format_bench(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hashfactor",
                                     description="Hashtag recommendation by weighted matrix factorization.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(p, needs_input=True):
        p.add_argument("--input", required=needs_input, help="tweet log (user<TAB>tag,tag,...)")
        p.add_argument("--output", help="output file (default: stdout)")
        p.add_argument("--seed", type=int, default=None, help=f"RNG seed (fallback: ${SEED_ENV}, then 0)")

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    common(p, needs_input=False)
    defaults = SynthParams()
    p.add_argument("--n-users", type=int, default=defaults.n_users)
    p.add_argument("--n-hashtags", type=int, default=defaults.n_hashtags)
    p.add_argument("--n-topics", type=int, default=defaults.n_topics)
    p.add_argument("--tweets-per-user", type=_int_range, default=defaults.tweets_per_user, metavar="LO,HI")
    p.add_argument("--hashtags-per-tweet", type=_int_range, default=defaults.hashtags_per_tweet, metavar="LO,HI")
    p.add_argument("--within-topic-prob", type=float, default=defaults.within_topic_prob)
    p.add_argument("--power-exponent", type=float, default=defaults.power_exponent)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="summarize a corpus")
    common(p)
    p.add_argument("--weights-out", help="also dump the hWMF weights as i<TAB>j<TAB>w")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="train a model; writes the model and its trace CSV")
    common(p)
    _add_train_flags(p)
    p.add_argument("--method", choices=("hwmf", "mf"), default="hwmf")
    p.add_argument("--trace", help="trace CSV path (default: OUTPUT.trace.csv)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("recommend", help="top-k hashtags for one user")
    common(p)
    p.add_argument("--model", help="model file from `train`")
    p.add_argument("--user", required=True, help="user id as it appears in the corpus")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--method", choices=("hwmf", "mf", "knn"), default="hwmf")
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("evaluate", help="hold-out RMSE grid; writes a CSV report")
    common(p)
    _add_train_flags(p)
    p.add_argument("--method", type=_methods, default=["hwmf"], metavar="{hwmf,mf,knn,random}[,...]")
    p.add_argument("--fractions", type=_float_list, default=[0.1, 0.2, 0.3, 0.4, 0.5])
    p.add_argument("--dims", type=_int_list, default=None, help="latent dimensions (overrides --d)")
    p.add_argument("--seeds", type=int, default=1, help="number of seeds, starting at --seed")
    p.add_argument("--strict-y-mask", action="store_true", help="rebuild Y without held-out adoptions")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--svg", help="also write an RMSE-vs-fraction chart")
    p.add_argument("--no-timing", action="store_true", help="write runtime_s as 0 for reproducible output")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ttest", help="within-user vs cross-user correlation t-test")
    common(p)
    p.add_argument("--n-pairs", type=int, default=5000)
    p.add_argument("--alpha", type=float, default=0.001)
    p.add_argument("--leave-out", action="store_true",
                   help="exclude the sampled users' own tweets from each correlation")
    p.add_argument("--pooled", action="store_true", help="pooled-variance t-test instead of Welch")
    p.set_defaults(func=cmd_ttest)

    p = sub.add_parser("bench", help="per-iteration time against d")
    common(p, needs_input=False)
    _add_train_flags(p)
    p.add_argument("--dims", type=_int_list, default=None)
    p.add_argument("--iters", type=int, default=20)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--n-users", type=int, default=2000)
    p.add_argument("--n-hashtags", type=int, default=3000)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"hashfactor: error: {exc}", file=sys.stderr)
        return 1
    except (ParseError, TrainingDiverged, ValueError, IndexError, OSError) as exc:
        print(f"hashfactor: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
