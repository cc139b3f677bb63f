"""``latent-oce`` command-line interface.

Subcommands: ``generate``, ``oce``, ``oracle``, ``estimate``, ``bootstrap``
and ``verify``. Levels on the command line and in records are 1-based;
dataset cells are 0-based. Exit codes: 0 success, 1 verification failure,
2 usage, 3 data/model validation, 4 numeric failure, 5 estimation failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .datagen import RngHandle, random_model, sample_ordinal
from .errors import EstimationError, LatentOceError, NumericError
from .estimation import fit_model
from .oce import APPROACHES, POLICIES, InterventionQuery, oce_cumulative
from .oracle import oracle_oce
from .pipeline import SUMMARY_FIELDS, all_shifts, bootstrap_sweep, effect_records, summarize
from .verification import verification_checks

SEED_ENV = "LATENT_OCE_SEED"

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_NUMERIC = 4
EXIT_ESTIMATION = 5

MAX_FAILURE_RATE = 0.5


class UsageError(Exception):
    pass


def _resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return int(np.random.SeedSequence().entropy % (1 << 63))


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_report(args, report: io.RunReport) -> None:
    _emit(io.report_to_text(report, args.format), args.output)


def _add_query(p, levels: bool = True) -> None:
    p.add_argument("-i", "--intervention", dest="i", type=int, required=True, help="intervention node (1-based)")
    p.add_argument("-o", "--outcome", dest="o", type=int, required=True, help="outcome node (1-based)")
    if levels:
        p.add_argument("--from-level", dest="l", type=int, help="level l before the shift (1-based)")
        p.add_argument("--to-level", dest="l_prime", type=int, help="level l' after the shift (1-based)")
    p.add_argument("--policy", choices=POLICIES, default="truncnorm")


def _add_output(p) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", help="write the report here instead of stdout")


def _check_query_args(args, need_levels: bool = True) -> None:
    if args.i == args.o:
        raise UsageError("intervention and outcome nodes must differ")
    if need_levels and (args.l is None or args.l_prime is None):
        raise UsageError("--from-level and --to-level are required")


def _shifts(args, model) -> list[tuple]:
    if getattr(args, "all_shifts", False):
        return all_shifts(model, args.i, args.o)
    _check_query_args(args)
    return [(args.i, args.o, args.l, args.l_prime)]


def cmd_generate(args) -> int:
    seed = _resolve_seed(args.seed)
    root = RngHandle(seed)
    model = random_model(
        n=args.n,
        expected_neighbors=args.expected_neighbors,
        weight_low=args.weight_low,
        weight_high=args.weight_high,
        level_range=tuple(args.level_range),
        nu=args.nu,
        rng=root.child(0),
    )
    data = sample_ordinal(model, args.N, root.child(1))
    io.write_model(args.model_out, model)
    io.write_dataset(args.data_out, data)
    print(f"seed {seed}")
    return EXIT_OK


def cmd_oce(args, argv) -> int:
    model = io.read_model(args.model)
    if args.i == args.o:
        raise UsageError("intervention and outcome nodes must differ")
    t0 = time.perf_counter()
    if args.cumulative is not None:
        _check_query_args(args)
        if args.method != "closed" or args.policy != "truncnorm":
            raise UsageError("--cumulative is only available for the closed form with the truncnorm policy")
        val = oce_cumulative(model, args.i, args.o, args.l, args.l_prime, args.cumulative)
        records = [io.make_record(args.i, args.o, args.l, args.l_prime, args.cumulative, val, "closed",
                                  cumulative=True)]
    else:
        records = effect_records(model, _shifts(args, model), args.method, args.policy)
    _emit_report(args, io.RunReport(argv, None, time.perf_counter() - t0, records))
    return EXIT_OK


def cmd_oracle(args, argv) -> int:
    model = io.read_model(args.model)
    _check_query_args(args)
    seed = _resolve_seed(args.seed)
    t0 = time.perf_counter()
    est = oracle_oce(model, args.i, args.o, args.l, args.l_prime, args.policy, N=args.N, rng=RngHandle(seed),
                     common_random_numbers=args.crn, workers=args.workers)
    records = [
        io.make_record(args.i, args.o, args.l, args.l_prime, k, v, "oracle", se)
        for k, (v, se) in enumerate(zip(est.value, est.std_err), start=1)
    ]
    _emit_report(args, io.RunReport(argv, seed, time.perf_counter() - t0, records, {"n_samples": est.n_samples}))
    return EXIT_OK


def cmd_estimate(args) -> int:
    data = io.read_dataset(args.data)
    dag = io.read_dag(args.dag)
    io.write_model(args.output, fit_model(data, dag, workers=args.workers))
    return EXIT_OK


def cmd_bootstrap(args, argv) -> int:
    data = io.read_dataset(args.data)
    dag = io.read_dag(args.dag)
    if args.M < 1:
        raise UsageError(f"--M must be at least 1, got {args.M}")
    if args.i == args.o:
        raise UsageError("intervention and outcome nodes must differ")
    if args.all_shifts:
        L = data.level_counts[args.i - 1]
        shifts = [(args.i, args.o, l, lp) for l in range(1, L + 1) for lp in range(1, L + 1) if l != lp]
    else:
        _check_query_args(args)
        shifts = [(args.i, args.o, args.l, args.l_prime)]
    seed = _resolve_seed(args.seed)
    t0 = time.perf_counter()
    res = bootstrap_sweep(data, dag, args.M, shifts, RngHandle(seed), args.method, args.policy, args.workers)
    summary = summarize(res.records)
    extra = {
        "n_replicates": res.n_replicates,
        "n_failures": len(res.failures),
        "failures": [{"replicate": r, "error": msg} for r, msg in res.failures],
        "summary": summary,
    }
    _emit_report(args, io.RunReport(argv, seed, time.perf_counter() - t0, res.records, extra))
    if args.summary:
        Path(args.summary).write_text(io.records_to_csv(summary, SUMMARY_FIELDS))
    if res.failures:
        print(f"{len(res.failures)} of {res.n_replicates} replicates failed", file=sys.stderr)
    if res.failure_rate > MAX_FAILURE_RATE:
        print(f"error: failure rate {res.failure_rate:.0%} exceeds {MAX_FAILURE_RATE:.0%}", file=sys.stderr)
        return EXIT_ESTIMATION
    return EXIT_OK


def cmd_verify(args) -> int:
    seed = _resolve_seed(args.seed if args.seed is not None else 20_240_601)
    checks = verification_checks(N=args.N, rng=RngHandle(seed))
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="latent-oce", description="Ordinal causal effects in latent Gaussian DAGs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="random model and ordinal dataset")
    p.add_argument("--n", type=int, default=16, help="number of nodes")
    p.add_argument("--expected-neighbors", type=float, default=5.0)
    p.add_argument("--weight-low", type=float, default=0.4)
    p.add_argument("--weight-high", type=float, default=1.0)
    p.add_argument("--level-range", type=int, nargs=2, default=(2, 6), metavar=("LOW", "HIGH"))
    p.add_argument("--nu", type=float, default=2.0, help="Dirichlet concentration for level probabilities")
    p.add_argument("--N", type=int, default=500, help="rows in the dataset")
    p.add_argument("--seed", type=int)
    p.add_argument("--model-out", default="model.json")
    p.add_argument("--data-out", default="data.csv")

    p = sub.add_parser("oce", help="ordinal causal effects from a model file")
    p.add_argument("model")
    _add_query(p)
    p.add_argument("--method", choices=APPROACHES, default="closed")
    p.add_argument("--all-shifts", action="store_true", help="every ordered pair l != l'")
    p.add_argument("--cumulative", type=int, metavar="J", help="effect on P(outcome level >= J)")
    _add_output(p)

    p = sub.add_parser("oracle", help="Monte Carlo effect estimate")
    p.add_argument("model")
    _add_query(p)
    p.add_argument("--N", type=int, default=1_000_000, help="draws per arm")
    p.add_argument("--seed", type=int)
    p.add_argument("--crn", action="store_true", help="common random numbers across arms")
    p.add_argument("--workers", type=int)
    _add_output(p)

    p = sub.add_parser("estimate", help="fit a model to ordinal data on a known DAG")
    p.add_argument("data")
    p.add_argument("dag", help="DAG or model file")
    p.add_argument("--output", required=True, help="model file to write")
    p.add_argument("--workers", type=int)

    p = sub.add_parser("bootstrap", help="bootstrap effect estimates on a known DAG")
    p.add_argument("data")
    p.add_argument("dag", help="DAG or model file")
    _add_query(p)
    p.add_argument("--method", choices=APPROACHES, default="closed")
    p.add_argument("--all-shifts", action="store_true")
    p.add_argument("--M", type=int, default=200, help="bootstrap replicates")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--summary", help="write per-level summary CSV here")
    _add_output(p)

    p = sub.add_parser("verify", help="built-in reference cases")
    p.add_argument("--N", type=int, default=10_000_000, help="Monte Carlo rows for the three-variable table")
    p.add_argument("--seed", type=int)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    echo = ["latent-oce", *argv]
    try:
        if args.command == "generate":
            return cmd_generate(args)
        if args.command == "oce":
            return cmd_oce(args, echo)
        if args.command == "oracle":
            return cmd_oracle(args, echo)
        if args.command == "estimate":
            return cmd_estimate(args)
        if args.command == "bootstrap":
            return cmd_bootstrap(args, echo)
        return cmd_verify(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"latent-oce: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EstimationError as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (LatentOceError, ValueError, OSError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
