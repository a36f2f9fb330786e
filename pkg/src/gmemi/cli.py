"""Command line interface: ``gmemi {solve,bench,curve,check}``.

Exit codes: 0 success, 2 configuration error, 3 verification failure
(``check``), 4 the sweep had non-converged trials (CSV is still written).
"""

import argparse
import math
import sys

import numpy as np

from .design import StepConditionError, step_condition_margins, verify_overall_convexity
from .experiments.config import ConfigError, TrialConfig, default_params, load_config, scenario_defaults
from .experiments.curves import penalty_curve, write_curve_csv
from .experiments.models import build_problem
from .experiments.sweep import make_trial_data, run_sweep, write_aggregate_csv, write_detail_csv
from .solver import ConvexityError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERIFY = 3
EXIT_NONCONVERGED = 4

_BENCH_MODELS = {
    "block-sparse": ("gme-lop", "lop"),
    "piecewise-linear": ("gme-tgv", "tgv"),
}


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _ints(text):
    return tuple(int(v) for v in text.split(",") if v.strip())


def _add_sweep_options(p):
    p.add_argument("--detail", help="detail CSV path (default: stdout)")
    p.add_argument("--aggregate", help="aggregate CSV path")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--grid", action="store_true", help="tune lambda and alpha per cell first")
    mode.add_argument("--fixed", action="store_true", help="use the configured parameters (default)")
    p.add_argument("--tuning-trials", type=int, default=3)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--deterministic", action="store_true",
                   help="write wall_time_s as 0.0 so reruns are byte-identical")


def build_parser():
    parser = argparse.ArgumentParser(prog="gmemi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run the sweep described by a config file")
    p.add_argument("--config", required=True)
    _add_sweep_options(p)

    p = sub.add_parser("bench", help="preset sweeps comparing a model with its convex counterpart")
    p.add_argument("scenario", choices=sorted(_BENCH_MODELS))
    p.add_argument("--models", help="comma separated models (default: the preset pair)")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=_ints, help="comma separated measurement counts")
    p.add_argument("--snr-db", type=_floats, help="comma separated SNR levels")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=1e-4)
    p.add_argument("--max-iters", type=int, default=10000)
    p.add_argument("--constraint")
    _add_sweep_options(p)

    p = sub.add_parser("curve", help="penalty values along the step-plus-ramp signal family")
    p.add_argument("kind", choices=["tgv"])
    p.add_argument("--alpha", type=float, default=0.2)
    p.add_argument("--s", type=float, default=0.0, help="ramp slope")
    p.add_argument("--r-min", type=float, default=0.0)
    p.add_argument("--r-max", type=float, default=5.0)
    p.add_argument("--r-steps", type=int, default=51)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--out", help="CSV path (default: stdout)")

    p = sub.add_parser("check", help="verify convexity, step conditions and the metric")
    p.add_argument("--config", required=True)
    return parser


def _bench_config(args):
    sd = scenario_defaults(args.scenario)
    models = tuple(m.strip() for m in args.models.split(",")) if args.models else _BENCH_MODELS[args.scenario]
    params = [default_params(args.scenario, m) for m in models]
    return TrialConfig(
        scenario=args.scenario,
        models=models,
        n=args.n or sd["n"],
        ds=args.d or sd["d"],
        snr_dbs=args.snr_db or sd["snr_db"],
        trials=args.trials,
        rng_seed=args.rng_seed,
        lams=tuple(p[0] for p in params),
        alphas=tuple(p[1] for p in params),
        thetas=tuple(p[2] for p in params),
        threshold=args.threshold,
        max_iters=args.max_iters,
        constraint=args.constraint or sd["constraint"],
    )


def _run_sweep(config, args, out):
    if config.scenario == "penalty-curve":
        raise ConfigError("penalty-curve configs are run with 'curve tgv'")
    records = run_sweep(config, workers=args.workers, grid=args.grid,
                        tuning_trials=args.tuning_trials)
    timings = not args.deterministic
    if args.detail:
        write_detail_csv(records, args.detail, timings=timings)
    else:
        out.write(write_detail_csv(records, timings=timings))
    if args.aggregate:
        write_aggregate_csv(records, args.aggregate)
    failed = [r for r in records if not r.converged]
    if failed:
        print(f"{len(failed)} of {len(records)} trials did not converge", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def _check(config, out):
    """Check every cell on the data of trial 0; return the exit code."""
    if config.scenario == "penalty-curve":
        raise ConfigError("nothing to check for penalty-curve configs")
    ok = True
    for model, d, snr in config.cells():
        lam, alpha, theta = config.params_for(model)
        _, A, y = make_trial_data(config.scenario, config.n, d, snr, config.rng_seed, 0)
        label = f"{model} d={d} snr_db={snr:g}"
        try:
            spec = build_problem(model, A, y, lam, alpha, theta, config.constraint)
        except ConvexityError as exc:
            print(f"{label}: convexity FAIL ({exc})", file=out)
            ok = False
            continue
        conv, lmin = verify_overall_convexity(spec.Q, tol=1e-8 * max(1.0, np.abs(A).max() ** 2 * spec.n))
        print(f"{label}: lambda_min(Q) = {lmin:.6e} {'ok' if conv else 'FAIL'}", file=out)
        ok &= conv
        try:
            params = spec.default_step_params()
        except StepConditionError as exc:
            print(f"{label}: steps FAIL ({exc})", file=out)
            ok = False
            continue
        margins = step_condition_margins(spec.A, spec.L, spec.seed.M, spec.BtB, spec.lam, params)
        steps_ok = all(mg > 0 for i, mg in enumerate(margins) if i != 2) and margins[2] >= 0
        print(f"{label}: step margins = {', '.join(f'{mg:.6e}' for mg in margins)} "
              f"{'ok' if steps_ok else 'FAIL'}", file=out)
        ok &= steps_ok
        eigs = spec.p_metric(params).min_eigenvalues()
        p_ok = all(e > 0 for e in eigs)
        print(f"{label}: lambda_min(P1, P2, P3) = {', '.join(f'{e:.6e}' for e in eigs)} "
              f"{'ok' if p_ok else 'FAIL'}", file=out)
        ok &= p_ok
    return EXIT_OK if ok else EXIT_VERIFY


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            return _run_sweep(load_config(args.config), args, out)
        if args.command == "bench":
            return _run_sweep(_bench_config(args), args, out)
        if args.command == "check":
            return _check(load_config(args.config), out)
        if args.command == "curve":
            if args.r_steps < 1 or not 0 < args.alpha < 1 or args.n < 4:
                raise ConfigError("need r-steps >= 1, alpha in (0, 1) and n >= 4")
            rows = penalty_curve(args.alpha, "identity", np.linspace(args.r_min, args.r_max, args.r_steps),
                                 args.s, args.n)
            write_curve_csv(rows, args.out or out)
            if any(math.isnan(v) for row in rows for v in row[3:]):
                print("some curve rows failed to evaluate", file=sys.stderr)
            return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
