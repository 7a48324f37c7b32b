"""Observables and attractor-dimension machinery.

Everything here is a pure function of fields or precomputed spectra; the
tangent-bundle evolution that produces a Lyapunov spectrum lives in
`mncs.lyapunov`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .kinetics import coupling_gamma
from .spectral import GridSpec, RealField, laplacian_symbol

__all__ = [
    "DiagnosticsRecord",
    "LyapunovSpectrum",
    "DimensionBoundInputs",
    "TraceProbeResult",
    "HopfShiftReport",
    "DecayFitError",
    "make_record",
    "spatial_variance",
    "lp_ladder",
    "fit_decay_rate",
    "dimension_bound",
    "trace_probe",
    "kaplan_yorke",
    "hopf_shift_check",
]


class DecayFitError(ValueError):
    """Raised when a log-variance fit window contains nonpositive values."""


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Per-component observables at one instant.

    `lp_ladder` holds the mean-power norms M_k of the pointwise state
    magnitude for k = 2, 4, ..., 2^j_max, or None when not requested.
    """

    t: float
    variance: tuple[float, ...]
    mean: tuple[float, ...]
    l2: tuple[float, ...]
    linf: tuple[float, ...]
    lp_ladder: tuple[float, ...] | None = None


@dataclass(frozen=True)
class LyapunovSpectrum:
    """Exponents sorted descending, with the averaging setup that made them."""

    exponents: tuple[float, ...]
    window: float
    total_time: float
    collapsed: int = 0

    def __post_init__(self):
        lam = self.exponents
        if any(lam[i] < lam[i + 1] for i in range(len(lam) - 1)):
            raise ValueError("exponents must be sorted descending")
        if not all(np.isfinite(lam)):
            raise ValueError("exponents must be finite")


@dataclass(frozen=True)
class DimensionBoundInputs:
    c0: float
    omega_measure: float
    d_min: float
    ka: float
    gamma: float
    dims: int = 2
    n_components: int = 2

    def __post_init__(self):
        if not self.c0 > 0:
            raise ValueError("c0 must be positive")
        if not self.omega_measure > 0:
            raise ValueError("domain measure must be positive")
        if not self.d_min > 0:
            raise ValueError("d_min must be positive")
        if self.dims not in (1, 2, 3):
            raise ValueError("dims must be 1, 2 or 3")


def spatial_variance(field: RealField) -> np.ndarray:
    """Per-component variance: mean of squares minus square of mean."""
    flat = field.data.reshape(field.grid.components, -1)
    return (flat * flat).mean(axis=1) - flat.mean(axis=1) ** 2


def _component_stats(field: RealField):
    grid = field.grid
    flat = field.data.reshape(grid.components, -1)
    mean = flat.mean(axis=1)
    var = (flat * flat).mean(axis=1) - mean**2
    l2 = np.sqrt(grid.cell_area * (flat * flat).sum(axis=1))
    linf = np.abs(flat).max(axis=1)
    return var, mean, l2, linf


def lp_ladder(field: RealField, j_max: int) -> list[float]:
    """Mean-power norms M_k = (mean |u|^k)^(1/k) for k = 2, 4, ..., 2^j_max.

    |u| is the pointwise Euclidean magnitude over components. Powers are
    taken on |u|/max|u| so extreme fields saturate toward the max-abs value
    instead of overflowing; the ladder is nondecreasing in k.
    """
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    peak = np.abs(field.data).max()
    if peak == 0.0:
        return [0.0] * j_max
    scaled_mag = np.sqrt(((field.data / peak) ** 2).sum(axis=0)).ravel()
    top = scaled_mag.max()
    scaled = scaled_mag / top
    top *= peak
    out = []
    for j in range(1, j_max + 1):
        k = 2**j
        out.append(float(top * (scaled**k).mean() ** (1.0 / k)))
    return out


def make_record(
    field: RealField, t: float, lp_jmax: int = 0
) -> DiagnosticsRecord:
    var, mean, l2, linf = _component_stats(field)
    ladder = tuple(lp_ladder(field, lp_jmax)) if lp_jmax >= 1 else None
    return DiagnosticsRecord(
        t=float(t),
        variance=tuple(float(x) for x in var),
        mean=tuple(float(x) for x in mean),
        l2=tuple(float(x) for x in l2),
        linf=tuple(float(x) for x in linf),
        lp_ladder=ladder,
    )


def fit_decay_rate(
    series: Sequence[tuple[float, float]], window: tuple[float, float]
) -> float:
    """Least-squares slope of log(sigma^2) against t over the window.

    The returned rate r satisfies sigma^2 ~ exp(r t).
    """
    t0, t1 = window
    pts = [(t, v) for t, v in series if t0 <= t <= t1]
    if len(pts) < 2:
        raise DecayFitError(f"need >= 2 samples in window [{t0}, {t1}]")
    t = np.array([p[0] for p in pts])
    v = np.array([p[1] for p in pts])
    if (v <= 0).any():
        raise DecayFitError("nonpositive variance in fit window")
    slope = np.polyfit(t, np.log(v), 1)[0]
    return float(slope)


def dimension_bound(inputs: DimensionBoundInputs) -> float:
    """Attractor fractal-dimension bound.

    max(N, c0 |Omega| (max(0, K_A - gamma)/d_min)^(d/2)); the second branch
    vanishes once gamma >= K_A (dimensional collapse to a point attractor).
    """
    excess = max(0.0, inputs.ka - inputs.gamma)
    grown = inputs.c0 * inputs.omega_measure * (excess / inputs.d_min) ** (
        inputs.dims / 2.0
    )
    return float(max(float(inputs.n_components), grown))


class TraceProbeResult(NamedTuple):
    trace_value: float
    m_star: int | None


def trace_probe(
    grid: GridSpec, d_min: float, k_est: float, gamma: float, m: int
) -> TraceProbeResult:
    """Discrete trace of the linearized operator on the m least-damped modes.

    T(m) = -d_min * sum of the m smallest Laplacian eigenvalues
           + m (k_est - gamma).
    Also locates m* = smallest m with T(m) < 0 within the grid's n^2 modes
    (None if the trace never turns negative at this resolution). The zero
    mode contributes no diffusion, so gamma alone must beat k_est for
    m* = 1.
    """
    n_modes = grid.n * grid.n
    if m < 1:
        raise ValueError("m must be >= 1")
    if m > n_modes:
        raise ValueError(f"m={m} exceeds the grid's {n_modes} modes")
    kappa = np.sort(laplacian_symbol(grid).k2.ravel())
    counts = np.arange(1, n_modes + 1)
    traces = -d_min * np.cumsum(kappa) + counts * (k_est - gamma)
    negative = np.nonzero(traces < 0)[0]
    m_star = int(negative[0]) + 1 if negative.size else None
    return TraceProbeResult(float(traces[m - 1]), m_star)


def kaplan_yorke(spec: LyapunovSpectrum) -> float:
    """Fractal-dimension estimate j + (sum_{i<=j} lambda_i)/|lambda_{j+1}|.

    j is the largest index whose partial sum is still nonnegative. Returns 0
    for an entirely contracting spectrum and m (saturated) when even the
    full sum is nonnegative.
    """
    lam = np.asarray(spec.exponents, dtype=np.float64)
    if lam.size == 0:
        raise ValueError("empty spectrum")
    if lam[0] < 0:
        return 0.0
    partial = np.cumsum(lam)
    if partial[-1] >= 0:
        return float(lam.size)
    j = int(np.nonzero(partial >= 0)[0][-1]) + 1
    return float(j + partial[j - 1] / abs(lam[j]))


@dataclass(frozen=True)
class HopfShiftReport:
    rho: float
    sym_growth: float
    gamma: float
    bound: float
    satisfied: bool


def hopf_shift_check(j: np.ndarray, c: np.ndarray) -> HopfShiftReport:
    """Field-of-values check that coupling shifts spectral growth by gamma.

    Verifies max Re eig(J + C) <= lambda_max((J + J^T)/2) - gamma + 1e-9:
    the damping supplied by C raises the instability a reaction Jacobian
    must reach before any eigenvalue of J + C crosses the imaginary axis.
    """
    j = np.atleast_2d(np.asarray(j, dtype=np.float64))
    c = np.atleast_2d(np.asarray(c, dtype=np.float64))
    if j.shape != c.shape or j.shape[0] != j.shape[1]:
        raise ValueError(f"need square matrices of equal size, got {j.shape} vs {c.shape}")
    if not (np.isfinite(j).all() and np.isfinite(c).all()):
        raise ValueError("matrix entries must be finite")
    gamma = coupling_gamma(c)
    sym_growth = float(np.linalg.eigvalsh(0.5 * (j + j.T))[-1])
    rho = float(np.linalg.eigvals(j + c).real.max())
    bound = sym_growth - gamma
    return HopfShiftReport(rho, sym_growth, gamma, bound, rho <= bound + 1e-9)
