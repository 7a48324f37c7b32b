"""Scenario orchestration: paired runs, coupling sweeps, step-size studies.

A scenario pair runs the uncoupled (turbulent) and coupled (stabilized)
systems from one shared initial state so that any difference between the
two trajectories is attributable to the coupling alone. Entries of a sweep
likewise share their initial state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import RunConfig
from .diagnostics import (
    DecayFitError,
    DimensionBoundInputs,
    dimension_bound,
    fit_decay_rate,
)
from .etd import IntegratorDivergenceError, run_simulation
from .io import load_snapshot, save_snapshot
from .kinetics import estimate_KA
from .rng import init_field
from .spectral import RealField

__all__ = [
    "ScenarioPair",
    "PairSummary",
    "SweepEntry",
    "SweepResult",
    "ConvergenceReport",
    "build_scenario_pair",
    "run_scenario_pair",
    "gamma_sweep",
    "convergence_study",
]

STABILIZATION_THRESHOLD = 1e-10  # final variance below this counts as collapsed

_FIT_WINDOW = (0.1, 0.9)  # fraction of t_end used for decay fits


@dataclass(frozen=True)
class ScenarioPair:
    """Uncoupled base plus coupled control, differing only in the coupling."""

    base: RunConfig
    control: RunConfig
    shared_ic: str

    def __post_init__(self):
        same = self.base.replace(
            gamma=self.control.gamma, coupling_matrix=self.control.coupling_matrix
        )
        if same != self.control:
            raise ValueError("pair configs may differ only in the coupling")


@dataclass(frozen=True)
class PairSummary:
    chaos_final_var: tuple[float, ...]
    control_final_var: tuple[float, ...]
    control_decay_rate: float | None
    ka_estimate: float | None
    ic_path: str


@dataclass(frozen=True)
class SweepEntry:
    gamma: float
    final_var: float | None
    decay_rate: float | None
    bound: float | None
    stabilized: bool
    error: str | None = None


@dataclass(frozen=True)
class SweepResult:
    entries: tuple[SweepEntry, ...]
    threshold_gamma: float | None  # first gamma whose run stabilized


@dataclass(frozen=True)
class ConvergenceReport:
    dts: tuple[float, ...]
    errors: tuple[float, ...]
    slope: float | None
    exact: bool
    failures: tuple[tuple[float, str], ...]


def build_scenario_pair(
    config: RunConfig, gamma_control: float = 6.0, shared_ic: str | Path | None = None
) -> ScenarioPair:
    base = config.with_gamma(0.0)
    control = config.with_gamma(gamma_control)
    if shared_ic is None:
        root = Path(config.output_dir) if config.output_dir else Path(".")
        shared_ic = root / "ic.mncs1"
    return ScenarioPair(base, control, str(shared_ic))


def _shared_initial_field(config: RunConfig) -> RealField:
    if config.ic_path is not None:
        field, _ = load_snapshot(config.ic_path)
        return field
    return init_field(config.build_grid(), config.seed, config.noise_sigma)


def _fit_window(t_end: float) -> tuple[float, float]:
    return (_FIT_WINDOW[0] * t_end, _FIT_WINDOW[1] * t_end)


def _decay_rate_or_none(records, t_end: float) -> float | None:
    series = [(r.t, r.variance[0]) for r in records]
    try:
        return fit_decay_rate(series, _fit_window(t_end))
    except DecayFitError:
        return None


def run_scenario_pair(pair: ScenarioPair) -> PairSummary:
    """Run both halves from the shared snapshot and summarize the contrast.

    The chaos half's outputs depend only on the base config and the shared
    state, never on whether the control half executes.
    """
    ic = _shared_initial_field(pair.base)
    ic_path = Path(pair.shared_ic)
    ic_path.parent.mkdir(parents=True, exist_ok=True)
    save_snapshot(ic_path, ic, 0.0)
    ic_loaded, _ = load_snapshot(ic_path)

    out_root = Path(pair.base.output_dir) if pair.base.output_dir else None
    is_fhn = pair.base.kinetics == "fhn"
    ka_max = -math.inf

    def track_ka(_t, field):
        nonlocal ka_max
        ka_max = max(ka_max, estimate_KA(field, pair.base.build_kinetics().params))

    chaos_final, chaos_records = run_simulation(
        pair.base,
        initial_field=ic_loaded.copy(),
        output_dir=(out_root / "chaos") if out_root else None,
        on_record=track_ka if is_fhn else None,
    )
    control_final, control_records = run_simulation(
        pair.control,
        initial_field=ic_loaded.copy(),
        output_dir=(out_root / "control") if out_root else None,
    )

    if pair.base.t_end == 0 or not chaos_records:
        from .diagnostics import make_record

        chaos_records = [make_record(chaos_final, 0.0)]
        control_records = [make_record(control_final, 0.0)]
    summary = PairSummary(
        chaos_final_var=chaos_records[-1].variance,
        control_final_var=control_records[-1].variance,
        control_decay_rate=_decay_rate_or_none(control_records, pair.control.t_end),
        ka_estimate=ka_max if (is_fhn and ka_max > -math.inf) else None,
        ic_path=str(ic_path),
    )
    if out_root is not None:
        _write_pair_summary(out_root / "summary.txt", summary)
    return summary


def _write_pair_summary(path: Path, s: PairSummary) -> None:
    lines = [
        f"ic_path = {s.ic_path}",
        f"chaos_final_var = {','.join(f'{v:.17g}' for v in s.chaos_final_var)}",
        f"control_final_var = {','.join(f'{v:.17g}' for v in s.control_final_var)}",
        f"control_decay_rate = "
        + ("none" if s.control_decay_rate is None else f"{s.control_decay_rate:.17g}"),
        f"ka_estimate = "
        + ("none" if s.ka_estimate is None else f"{s.ka_estimate:.17g}"),
    ]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _diffusing_minimum(config: RunConfig) -> float | None:
    kin = config.build_kinetics()
    positive = [d for d in kin.diffusion if d > 0]
    return min(positive) if positive else None


def gamma_sweep(config: RunConfig, gammas, output_dir: str | Path | None = None) -> SweepResult:
    """Run the scenario at each coupling strength from one shared state.

    Each entry records the final variance of the first component, the
    fitted decay rate (None if the log fit is undefined), and the
    attractor-dimension bound evaluated with that run's Jacobian-norm
    estimate. Per-entry integrator failures are recorded and the sweep
    continues.
    """
    gammas = [float(g) for g in gammas]
    if any(b < a for a, b in zip(gammas, gammas[1:])):
        raise ValueError("gammas must be sorted ascending")
    ic = _shared_initial_field(config)
    is_fhn = config.kinetics == "fhn"
    d_min = _diffusing_minimum(config)
    entries = []
    for g in gammas:
        cfg = config.with_gamma(g)
        ka_max = -math.inf

        def track_ka(_t, field, _cfg=cfg):
            nonlocal ka_max
            ka_max = max(ka_max, estimate_KA(field, _cfg.build_kinetics().params))

        try:
            _final, records = run_simulation(
                cfg,
                initial_field=ic.copy(),
                output_dir=(Path(output_dir) / f"gamma_{g:g}") if output_dir else None,
                on_record=track_ka if is_fhn else None,
            )
        except IntegratorDivergenceError as exc:
            entries.append(
                SweepEntry(g, None, None, None, stabilized=False, error=str(exc))
            )
            continue
        final_var = records[-1].variance[0] if records else 0.0
        bound = None
        if is_fhn and ka_max > -math.inf and d_min is not None:
            bound = dimension_bound(
                DimensionBoundInputs(
                    c0=cfg.c0,
                    omega_measure=cfg.build_grid().measure,
                    d_min=d_min,
                    ka=ka_max,
                    gamma=g,
                    dims=2,
                    n_components=cfg.n_components,
                )
            )
        entries.append(
            SweepEntry(
                g,
                final_var,
                _decay_rate_or_none(records, cfg.t_end),
                bound,
                stabilized=final_var < STABILIZATION_THRESHOLD,
            )
        )
    threshold = next((e.gamma for e in entries if e.stabilized), None)
    result = SweepResult(tuple(entries), threshold)
    if output_dir is not None:
        _write_sweep_table(Path(output_dir) / "sweep.csv", result)
    return result


def _write_sweep_table(path: Path, result: SweepResult) -> None:
    lines = ["gamma,final_var,decay_rate,dimension_bound,stabilized,error"]
    for e in result.entries:
        fmt = lambda v: "" if v is None else f"{v:.17g}"
        lines.append(
            f"{e.gamma:.17g},{fmt(e.final_var)},{fmt(e.decay_rate)},"
            f"{fmt(e.bound)},{int(e.stabilized)},{e.error or ''}"
        )
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _steps_for(dt: float, t_end: float) -> int:
    steps = round(t_end / dt)
    if steps < 1 or abs(steps * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise ValueError(f"dt={dt} does not divide t_end={t_end}")
    return steps


def convergence_study(config: RunConfig, dts, t_end: float) -> ConvergenceReport:
    """Observed order of accuracy against a fine-step self-reference.

    Runs the same initial state at every dt plus a reference at min(dt)/4,
    measures root-mean-square errors at t_end, and fits log error against
    log dt. Errors at roundoff level report exact=True instead of a slope.
    A divergence at some dt is recorded, not fatal, as long as three step
    sizes survive.
    """
    dts = sorted(float(dt) for dt in dts)
    if len(dts) < 3:
        raise ValueError("need at least 3 step sizes")
    for dt in dts:
        _steps_for(dt, t_end)
    ic = _shared_initial_field(config)

    def final_state(dt: float) -> np.ndarray:
        cfg = config.replace(dt=dt, t_end=t_end, record_stride=10**9)
        field, _ = run_simulation(cfg, initial_field=ic.copy(), output_dir=None)
        return field.data

    ref = final_state(min(dts) / 4.0)
    ref_rms = float(np.sqrt((ref**2).mean()))
    errors, kept, failures = [], [], []
    for dt in dts:
        try:
            err = float(np.sqrt(((final_state(dt) - ref) ** 2).mean()))
        except IntegratorDivergenceError as exc:
            failures.append((dt, str(exc)))
            continue
        errors.append(err)
        kept.append(dt)
    if len(kept) < 3:
        raise ValueError(f"only {len(kept)} step sizes survived; need 3 for a fit")
    if max(errors) <= 1e-12 * max(ref_rms, 1e-300):
        return ConvergenceReport(tuple(kept), tuple(errors), None, True, tuple(failures))
    slope = float(np.polyfit(np.log(kept), np.log(errors), 1)[0])
    return ConvergenceReport(tuple(kept), tuple(errors), slope, False, tuple(failures))
