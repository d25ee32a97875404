"""Command-line driver.

    phasetop run --benchmark a --mode adaptive --rounds 6 --out DIR
    phasetop compare --left adaptive/summary.json --right uniform/summary.json
    phasetop report --run DIR

Exit codes: 0 success, 2 bad configuration or arguments, 3 solver failure,
4 I/O failure.  PHASETOP_THREADS caps the BLAS thread pools (set before the
numeric stack loads).
"""

import argparse
import os
import sys


def _apply_thread_env():
    n = os.environ.get("PHASETOP_THREADS")
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, n)


def _build_parser():
    parser = argparse.ArgumentParser(prog="phasetop",
                                     description="adaptive phase-field topology optimization")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a benchmark")
    p_run.add_argument("--benchmark", "-b", default="a", help="benchmark id a..f")
    p_run.add_argument("--mode", choices=("adaptive", "uniform"), default="adaptive")
    p_run.add_argument("--rounds", type=int, default=6)
    p_run.add_argument("--theta1", type=float, default=0.95)
    p_run.add_argument("--theta2", type=float, default=0.95)
    p_run.add_argument("--target-h", type=float, default=None)
    p_run.add_argument("--outer", type=int, default=None, help="override outer iterations")
    p_run.add_argument("--inner", type=int, default=None, help="override inner steps")
    p_run.add_argument("--vertex-budget", type=int, default=None)
    p_run.add_argument("--estimator-tol", type=float, default=None)
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--config", default=None, help="JSON config file; flags override it")
    p_run.add_argument("--figures", action="store_true", help="render figures after the run")

    p_cmp = sub.add_parser("compare", help="compare two run summaries")
    p_cmp.add_argument("--left", required=True, help="adaptive summary.json")
    p_cmp.add_argument("--right", required=True, help="uniform summary.json")

    p_rep = sub.add_parser("report", help="render figures for a finished run")
    p_rep.add_argument("--run", required=True, help="run output directory")
    return parser


def _config_from_args(args):
    import dataclasses

    from .runio import RunConfig
    if args.config:
        base = RunConfig.load(args.config)
    else:
        base = RunConfig()
    overrides = dict(
        benchmark=args.benchmark, mode=args.mode, rounds=args.rounds,
        theta1=args.theta1, theta2=args.theta2, out_dir=args.out,
        target_h=args.target_h, n_outer=args.outer, m_inner=args.inner,
        vertex_budget=args.vertex_budget, estimator_tol=args.estimator_tol,
        figures=args.figures)
    if args.config:
        # only apply flags the user actually moved off their defaults
        defaults = dict(benchmark="a", mode="adaptive", rounds=6, theta1=0.95,
                        theta2=0.95, target_h=None, n_outer=None, m_inner=None,
                        vertex_budget=None, estimator_tol=None, figures=False)
        overrides = {k: v for k, v in overrides.items()
                     if k == "out_dir" or defaults.get(k, object()) != v}
    return dataclasses.replace(base, **overrides)


def main(argv=None) -> int:
    _apply_thread_env()
    args = _build_parser().parse_args(argv)
    from .errors import ConfigError, PhasetopError, SolveError

    try:
        if args.command == "run":
            from .runio import run
            config = _config_from_args(args)
            summary = run(config)
            print(f"benchmark {summary.benchmark} [{summary.mode}] finished: "
                  f"{summary.final_vertices} vertices, "
                  f"objective {summary.final_objective:.6g}, "
                  f"{summary.total_seconds:.1f}s ({summary.stop_reason})")
            return 0
        if args.command == "compare":
            from .runio import RunSummary, compare
            report = compare(RunSummary.load(args.left), RunSummary.load(args.right))
            print(report.format_table())
            return 0
        if args.command == "report":
            from .figures import render_run
            paths = render_run(args.run)
            for p in paths:
                print(p)
            return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolveError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    except (OSError, PhasetopError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    return 2


if __name__ == "__main__":
    sys.exit(main())
