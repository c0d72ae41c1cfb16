"""Command-line interface.

Subcommands: simulate (generate benchmark data), fit (recover a model from a
trajectory), resimulate (integrate a recovered model), reproduce-paper (the
full benchmark study). Exit codes: 0 success, 1 validation error, 2 runtime
failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from . import experiments, library, metrics, signals, systems

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ValueError(f"expected comma-separated floats, got {text!r}")


def _add_integrator_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--t0", type=float, default=None)
    parser.add_argument("--t-end", type=float, default=None)
    parser.add_argument("--dt", type=float, default=None, help="output grid spacing")
    parser.add_argument("--ic", type=str, default=None,
                        help="initial condition, e.g. '-8,7,27'")
    parser.add_argument("--method", choices=("adaptive_rk45", "fixed_rk4"),
                        default="adaptive_rk45")
    parser.add_argument("--rel-tol", type=float, default=1e-8)
    parser.add_argument("--abs-tol", type=float, default=1e-10)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dynrecon",
        description="Reconstruct ODE systems from time series with genetic "
        "algorithms and adaptive search limits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate a benchmark system to CSV")
    sim.add_argument("--system", required=True, choices=systems.BENCHMARK_NAMES)
    sim.add_argument("--out", required=True, help="output trajectory CSV")
    _add_integrator_flags(sim)

    fit = sub.add_parser("fit", help="fit a sparse polynomial model to data")
    fit.add_argument("--data", default=None, help="trajectory CSV (header t,x,...)")
    fit.add_argument("--system", default=None,
                     choices=systems.BENCHMARK_NAMES,
                     help="simulate this benchmark instead of reading --data")
    fit.add_argument("--degree", type=int, default=3)
    fit.add_argument("--mode", choices=("fixed", "dynamic"), default="dynamic")
    fit.add_argument("--config", default=None, help="INI config file")
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--fast", action="store_true", help="reduced search budget")
    fit.add_argument("--derivative-source", choices=("numerical", "analytic"),
                     default=None)
    fit.add_argument("--search-limit", type=float, default=None,
                     help="fixed-mode symmetric search limit")
    fit.add_argument("--out", required=True, help="output run directory")

    res = sub.add_parser("resimulate", help="integrate a recovered model CSV")
    res.add_argument("--model", required=True, help="model CSV from fit")
    res.add_argument("--out", required=True, help="output trajectory CSV")
    res.add_argument("--reference", default=None,
                     help="reference trajectory CSV for comparison metrics")
    _add_integrator_flags(res)

    rep = sub.add_parser(
        "reproduce-paper",
        help="run the full benchmark study (3 systems x fixed/dynamic)",
    )
    rep.add_argument("--fast", action="store_true",
                     help="reduced budgets (minutes instead of hours)")
    rep.add_argument("--seed", type=int, default=0)
    rep.add_argument("--out", default="reproduction", help="output directory root")

    return parser


def _cmd_simulate(args) -> int:
    overrides = {}
    if args.t0 is not None:
        overrides["t0"] = args.t0
    if args.t_end is not None:
        overrides["t_end"] = args.t_end
    if args.dt is not None:
        overrides["dt_out"] = args.dt
    if args.ic is not None:
        overrides["initial_condition"] = _parse_floats(args.ic)
    overrides.update(method=args.method, rel_tol=args.rel_tol, abs_tol=args.abs_tol)
    config = systems.default_integrator(args.system, **overrides)
    traj = systems.integrate(systems.make_benchmark(args.system), config)
    signals.write_csv(traj, args.out)
    print(f"wrote {len(traj)} samples ({', '.join(traj.names)}) to {args.out}")
    return EXIT_OK


def _cmd_fit(args) -> int:
    overrides = dict(
        data=args.data,
        degree=args.degree,
        mode=args.mode,
        seed=args.seed,
        derivative_source=args.derivative_source,
        fixed_search_limit=args.search_limit,
    )
    if args.system is not None:
        overrides["system"] = args.system
    elif args.data is not None:
        overrides["system"] = "csv"
    if args.config is not None:
        config = experiments.load_config(args.config, **overrides)
        if args.fast:
            config = dataclasses.replace(config, fast=True)
    else:
        if args.data is None and args.system is None:
            raise ValueError("fit needs --data or --system")
        overrides = {k: v for k, v in overrides.items() if v is not None}
        config = experiments.ExperimentConfig(fast=args.fast, **overrides)
    report = experiments.run_experiment(config)
    out = experiments.write_report(report, args.out)
    print(experiments.render_report(report))
    print(f"run written to {out} [{report.wall_seconds:.1f}s]")
    return EXIT_OK


def _cmd_resimulate(args) -> int:
    basis, coeffs, names = experiments.read_model_csv(args.model)
    field = library.model_rhs(basis, coeffs, names)
    reference = None
    if args.reference is not None:
        reference = signals.read_csv(args.reference)
    if args.ic is not None:
        ic = _parse_floats(args.ic)
    elif reference is not None:
        ic = tuple(reference.states[0])
    else:
        raise ValueError("resimulate needs --ic or --reference")
    t0 = args.t0 if args.t0 is not None else (
        float(reference.t[0]) if reference is not None else 0.0
    )
    t_end = args.t_end if args.t_end is not None else (
        float(reference.t[-1]) if reference is not None else None
    )
    if t_end is None:
        raise ValueError("resimulate needs --t-end or --reference")
    dt = args.dt if args.dt is not None else (
        reference.dt if reference is not None else 0.01
    )
    config = systems.IntegratorConfig(
        t0=t0, t_end=t_end, dt_out=dt, initial_condition=ic,
        method=args.method, rel_tol=args.rel_tol, abs_tol=args.abs_tol,
    )
    traj = systems.integrate(field, config)
    signals.write_csv(traj, args.out)
    print(f"wrote {len(traj)} samples to {args.out}")
    if reference is not None:
        if reference.states.shape != traj.states.shape:
            raise ValueError("reference grid does not match the resimulation grid")
        rep = metrics.metric_report(reference.states, traj.states, dt, names)
        for name, m in rep.per_signal.items():
            print(f"  {name}: ISE={m.ise:.6g}  MSE(sum)={m.mse:.6g}  R2={m.r2:.6f}")
        print(f"  pooled R2={rep.r2:.6f}")
    return EXIT_OK


def _cmd_reproduce(args) -> int:
    experiments.reproduce(args.out, fast=args.fast, seed=args.seed)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "simulate": _cmd_simulate,
        "fit": _cmd_fit,
        "resimulate": _cmd_resimulate,
        "reproduce-paper": _cmd_reproduce,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except systems.IntegrationError as err:
        print(f"integration failed: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
