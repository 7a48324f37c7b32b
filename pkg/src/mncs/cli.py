"""Command-line front end.

Exit codes: 0 success, 1 numerical failure, 2 configuration error,
3 comparison mismatch.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .diagnostics import (
    DecayFitError,
    DimensionBoundInputs,
    dimension_bound,
    hopf_shift_check,
    kaplan_yorke,
)
from .etd import IntegratorDivergenceError, run_simulation
from .io import SnapshotError, compare_csv, compare_snapshots, load_snapshot
from .kinetics import coupling_gamma, estimate_KA
from .lyapunov import lyapunov_spectrum
from .runner import build_scenario_pair, convergence_study, gamma_sweep, run_scenario_pair

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2
EXIT_MISMATCH = 3


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad number list '{text}'") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad integer list '{text}'") from exc


def _load(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.output_dir is not None:
        cfg = cfg.replace(output_dir=args.output_dir)
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    if args.gamma is not None:
        cfg = cfg.with_gamma(args.gamma)
    return cfg


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


def cmd_run(args) -> int:
    cfg = _load(args)
    final, records = run_simulation(cfg)
    var = records[-1].variance if records else tuple()
    _say(args, f"steps={round(cfg.t_end / cfg.dt)} records={len(records)}")
    _say(args, "final variance: " + ", ".join(f"{v:.6e}" for v in var))
    return EXIT_OK


def cmd_pair(args) -> int:
    cfg = _load(args)
    pair = build_scenario_pair(cfg, gamma_control=args.gamma_control)
    summary = run_scenario_pair(pair)
    _say(args, f"shared ic: {summary.ic_path}")
    _say(args, "chaos final var:   " + ", ".join(f"{v:.6e}" for v in summary.chaos_final_var))
    _say(args, "control final var: " + ", ".join(f"{v:.6e}" for v in summary.control_final_var))
    if summary.control_decay_rate is not None:
        _say(args, f"control decay rate: {summary.control_decay_rate:.4f}")
    if summary.ka_estimate is not None:
        _say(args, f"Jacobian-norm estimate over chaos run: {summary.ka_estimate:.4f}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args)
    result = gamma_sweep(cfg, _floats(args.gammas), output_dir=cfg.output_dir)
    for e in result.entries:
        if e.error:
            _say(args, f"gamma={e.gamma:g}  FAILED: {e.error}")
        else:
            rate = "n/a" if e.decay_rate is None else f"{e.decay_rate:+.3f}"
            bound = "n/a" if e.bound is None else f"{e.bound:.3g}"
            _say(
                args,
                f"gamma={e.gamma:g}  final_var={e.final_var:.3e}  rate={rate}"
                f"  bound={bound}  stabilized={e.stabilized}",
            )
    if result.threshold_gamma is None:
        _say(args, "no stabilization threshold located in this range")
    else:
        _say(args, f"stabilization threshold: gamma = {result.threshold_gamma:g}")
    return EXIT_OK


def cmd_lyapunov(args) -> int:
    cfg = _load(args)
    total = args.total_steps or round(cfg.t_end / cfg.dt)
    spec = lyapunov_spectrum(
        cfg,
        m=args.modes,
        window_steps=args.window_steps,
        total_steps=total,
        transient_steps=args.transient_steps,
    )
    _say(args, "exponents: " + ", ".join(f"{x:+.6f}" for x in spec.exponents))
    if spec.collapsed:
        _say(args, f"collapsed tangent directions: {spec.collapsed}")
    _say(args, f"kaplan-yorke dimension: {kaplan_yorke(spec):.4f}")
    return EXIT_OK


def cmd_bound(args) -> int:
    cfg = _load(args)
    if args.ka is not None:
        ka = args.ka
    elif args.snapshot is not None:
        if cfg.kinetics != "fhn":
            raise ConfigError("snapshot-based Jacobian-norm estimate needs fhn kinetics")
        field, _ = load_snapshot(args.snapshot)
        ka = estimate_KA(field, cfg.build_kinetics().params)
    else:
        raise ConfigError("bound needs --ka or --snapshot")
    diffusing = [d for d in cfg.build_kinetics().diffusion if d > 0]
    if not diffusing:
        raise ConfigError("no diffusing component: d_min undefined")
    inputs = DimensionBoundInputs(
        c0=cfg.c0,
        omega_measure=cfg.build_grid().measure,
        d_min=min(diffusing),
        ka=ka,
        gamma=coupling_gamma(cfg.coupling()),
        dims=2,
        n_components=cfg.n_components,
    )
    _say(args, f"ka={ka:.6g} gamma={inputs.gamma:.6g} d_min={inputs.d_min:g}")
    print(f"{dimension_bound(inputs):.17g}")
    return EXIT_OK


def cmd_hopf(args) -> int:
    rng = np.random.default_rng(args.seed)
    worst = np.inf
    violations = 0
    for k in range(args.trials):
        size = args.sizes[k % len(args.sizes)]
        j = rng.standard_normal((size, size))
        a = rng.standard_normal((size, size))
        b = rng.standard_normal((size, size))
        c = -(a @ a.T) / size - 0.1 * np.eye(size) + 0.5 * (b - b.T)
        report = hopf_shift_check(j, c)
        margin = report.bound + 1e-9 - report.rho
        worst = min(worst, margin)
        if not report.satisfied:
            violations += 1
    _say(args, f"{args.trials} trials, worst margin {worst:.3e}, violations {violations}")
    return EXIT_OK if violations == 0 else EXIT_NUMERICAL


def cmd_converge(args) -> int:
    cfg = _load(args)
    report = convergence_study(cfg, _floats(args.dts), args.t_end)
    for dt, err in zip(report.dts, report.errors):
        _say(args, f"dt={dt:g}  error={err:.6e}")
    for dt, msg in report.failures:
        _say(args, f"dt={dt:g}  FAILED: {msg}")
    if report.exact:
        _say(args, "errors at roundoff level: exact")
    else:
        _say(args, f"observed order: {report.slope:.3f}")
    return EXIT_OK


def _is_snapshot(path: str) -> bool:
    with open(path, "rb") as fh:
        return fh.read(5) == b"MNCS1"


def cmd_compare(args) -> int:
    if _is_snapshot(args.path_a) != _is_snapshot(args.path_b):
        print("cannot compare a snapshot against a CSV", file=sys.stderr)
        return EXIT_MISMATCH
    fn = compare_snapshots if _is_snapshot(args.path_a) else compare_csv
    ok, _diff, note = fn(args.path_a, args.path_b, args.tol)
    _say(args, note)
    return EXIT_OK if ok else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="config file path")
    common.add_argument("--output-dir", type=str, default=None, help="override output directory")
    common.add_argument("--seed", type=int, default=None, help="override RNG seed")
    common.add_argument("--gamma", type=float, default=None, help="override coupling strength")
    common.add_argument("--quiet", action="store_true", help="suppress informational output")

    parser = argparse.ArgumentParser(prog="mncs", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="run one simulation")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("pair", parents=[common], help="chaos/control pair from a shared state")
    p.add_argument("--gamma-control", type=float, default=6.0)
    p.set_defaults(func=cmd_pair)

    p = sub.add_parser("sweep", parents=[common], help="sweep over coupling strengths")
    p.add_argument("--gammas", type=str, required=True, help="comma-separated, ascending")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("lyapunov", parents=[common], help="leading Lyapunov exponents")
    p.add_argument("--modes", type=int, default=4)
    p.add_argument("--window-steps", type=int, default=20)
    p.add_argument("--total-steps", type=int, default=None)
    p.add_argument("--transient-steps", type=int, default=0)
    p.set_defaults(func=cmd_lyapunov)

    p = sub.add_parser("bound", parents=[common], help="attractor-dimension bound")
    p.add_argument("--ka", type=float, default=None, help="Jacobian-norm estimate")
    p.add_argument("--snapshot", type=str, default=None, help="estimate from a snapshot")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("hopf", parents=[common], help="randomized spectral-shift check")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--sizes", type=_ints, default=[2, 3, 4])
    p.set_defaults(func=cmd_hopf)

    p = sub.add_parser("converge", parents=[common], help="observed-order study")
    p.add_argument("--dts", type=str, required=True, help="comma-separated step sizes")
    p.add_argument("--t-end", type=float, required=True)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("compare", parents=[common], help="compare snapshots or CSVs")
    p.add_argument("path_a")
    p.add_argument("path_b")
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SnapshotError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegratorDivergenceError, DecayFitError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
