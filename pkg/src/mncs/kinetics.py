"""Reaction terms, their Jacobians, and the coupling matrix.

Two kinetics families are provided: the two-component excitable model with
soft clamping (the simulated system) and a scalar cubic model used to
verify the dissipativity inequality u.f(u) <= mu |u|^2 - alpha |u|^p + beta.

The coupling strength gamma is always derived from the matrix C as
-lambda_max((C + C^T)/2); it is never stored independently, so the
negative-coupling condition (gamma > 0) cannot silently drift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import RealField

__all__ = [
    "FhnParams",
    "CubicParams",
    "DissipativityParams",
    "CouplingMatrix",
    "DissipativityReport",
    "FhnKinetics",
    "CubicKinetics",
    "fhn_reaction",
    "fhn_jacobian",
    "opnorm_2x2",
    "estimate_KA",
    "coupling_gamma",
    "check_dissipativity",
]


@dataclass(frozen=True)
class FhnParams:
    """Two-component excitable kinetics with soft clamping.

    fu = (u - u^3/3 - v) / eps,  fv = eps (u + beta_kin - gamma_kin v),
    both evaluated at values clamped to [-clamp, clamp]. Clamping is part
    of the reaction definition, not an error path.
    """

    eps: float = 0.2
    beta_kin: float = 0.0
    gamma_kin: float = 0.5
    du: float = 1.0
    dv: float = 0.0
    clamp: float = 5.0

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.du < 0 or self.dv < 0:
            raise ValueError("diffusion coefficients must be >= 0")
        if not self.clamp > 0:
            raise ValueError("clamp half-width must be positive")


@dataclass(frozen=True)
class CubicParams:
    """Scalar kinetics f(u) = mu u - alpha_c u^3."""

    mu: float
    alpha_c: float = 1.0

    def __post_init__(self):
        if not self.alpha_c > 0:
            raise ValueError("cubic coefficient must be positive")


@dataclass(frozen=True)
class DissipativityParams:
    """Constants of the bound u.f(u) <= mu u^2 - alpha |u|^p + beta_d."""

    mu: float
    alpha: float
    beta_d: float = 0.0
    p: float = 4.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.beta_d < 0:
            raise ValueError("beta_d must be >= 0")
        if not (2 < self.p <= 4):
            raise ValueError("exponent p must satisfy 2 < p <= 4")


@dataclass(frozen=True)
class CouplingMatrix:
    """N x N coupling matrix; gamma is recomputed from c on every access."""

    c: np.ndarray

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.c, dtype=np.float64))
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError(f"coupling matrix must be square, got {c.shape}")
        if not np.isfinite(c).all():
            raise ValueError("coupling matrix must be finite")
        object.__setattr__(self, "c", c)

    @property
    def gamma(self) -> float:
        return coupling_gamma(self.c)

    @property
    def negative_coupling_holds(self) -> bool:
        return self.gamma > 0


def fhn_reaction(u, v, p: FhnParams):
    """Reaction terms (fu, fv); accepts scalars or arrays.

    Inputs are soft-clamped to [-clamp, clamp] before evaluation.
    """
    uc = np.clip(u, -p.clamp, p.clamp)
    vc = np.clip(v, -p.clamp, p.clamp)
    fu = (uc - uc**3 / 3.0 - vc) / p.eps
    fv = p.eps * (uc + p.beta_kin - p.gamma_kin * vc)
    return fu, fv


def _fhn_jacobian_entries(u, v, p: FhnParams):
    """Pointwise Jacobian entries (a, b, c, d) of the clamped reaction.

    Columns belonging to a saturated input are zero: the clamp makes the
    reaction locally constant in that direction.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    uc = np.clip(u, -p.clamp, p.clamp)
    live_u = np.abs(u) <= p.clamp
    live_v = np.abs(v) <= p.clamp
    a = np.where(live_u, (1.0 - uc**2) / p.eps, 0.0)
    b = np.where(live_v, -1.0 / p.eps, 0.0)
    c = np.where(live_u, p.eps, 0.0)
    d = np.where(live_v, -p.eps * p.gamma_kin, 0.0)
    return a, b, c, d


def fhn_jacobian(u: float, v: float, p: FhnParams) -> np.ndarray:
    """2x2 Jacobian [[dfu/du, dfu/dv], [dfv/du, dfv/dv]] at one point."""
    a, b, c, d = _fhn_jacobian_entries(u, v, p)
    return np.array([[a, b], [c, d]], dtype=np.float64)


def opnorm_2x2(m: np.ndarray) -> float:
    """Largest singular value of a 2x2 matrix, closed form."""
    m = np.asarray(m, dtype=np.float64)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError("matrix entries must be finite")
    s = float((m**2).sum())
    det = float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    disc = max(s * s - 4.0 * det * det, 0.0)
    return float(np.sqrt(0.5 * (s + np.sqrt(disc))))


def _opnorm_entries(a, b, c, d):
    """Vectorized largest singular value for per-point 2x2 matrices."""
    s = a * a + b * b + c * c + d * d
    det = a * d - b * c
    disc = np.maximum(s * s - 4.0 * det * det, 0.0)
    return np.sqrt(0.5 * (s + np.sqrt(disc)))


def estimate_KA(field: RealField, p: FhnParams) -> float:
    """Max over grid points of the Jacobian operator norm.

    This is the instability budget the coupling strength must exceed for
    the attractor-dimension bound to collapse to a point.
    """
    if field.grid.components != 2:
        raise ValueError("Jacobian-norm estimate needs a 2-component field")
    a, b, c, d = _fhn_jacobian_entries(field.data[0], field.data[1], p)
    return float(_opnorm_entries(a, b, c, d).max())


def coupling_gamma(c: np.ndarray) -> float:
    """gamma = -lambda_max((C + C^T)/2); positive iff the coupling damps."""
    c = np.atleast_2d(np.asarray(c, dtype=np.float64))
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError(f"coupling matrix must be square, got {c.shape}")
    if not np.isfinite(c).all():
        raise ValueError("coupling matrix must be finite")
    sym = 0.5 * (c + c.T)
    return float(-np.linalg.eigvalsh(sym)[-1])


@dataclass(frozen=True)
class DissipativityReport:
    min_margin: float
    argmin_u: float
    passed: bool


def check_dissipativity(
    model: CubicParams,
    d: DissipativityParams,
    sample_range: float,
    samples: int = 1001,
) -> DissipativityReport:
    """Scan g(u) = mu u^2 - alpha |u|^p + beta_d - u f(u) on [-range, range].

    Passes iff min g >= -1e-12, i.e. the claimed constants actually bound
    u f(u) over the sampled interval.
    """
    if samples < 100:
        raise ValueError("need at least 100 samples for the scan")
    if not sample_range > 0:
        raise ValueError("sample_range must be positive")
    u = np.linspace(-sample_range, sample_range, samples)
    f = model.mu * u - model.alpha_c * u**3
    g = d.mu * u**2 - d.alpha * np.abs(u) ** d.p + d.beta_d - u * f
    i = int(np.argmin(g))
    min_margin = float(g[i])
    return DissipativityReport(min_margin, float(u[i]), min_margin >= -1e-12)


class FhnKinetics:
    """Reaction model driving the simulated two-component system."""

    def __init__(self, params: FhnParams):
        self.params = params

    @property
    def n_components(self) -> int:
        return 2

    @property
    def diffusion(self) -> tuple[float, ...]:
        return (self.params.du, self.params.dv)

    def reaction(self, state: np.ndarray) -> np.ndarray:
        fu, fv = fhn_reaction(state[0], state[1], self.params)
        return np.stack([fu, fv])

    def jacobian_apply(self, state: np.ndarray, tangent: np.ndarray) -> np.ndarray:
        """Pointwise J(u(x)) . w(x); tangent may carry leading batch axes."""
        a, b, c, d = _fhn_jacobian_entries(state[0], state[1], self.params)
        wu = tangent[..., 0, :, :]
        wv = tangent[..., 1, :, :]
        return np.stack([a * wu + b * wv, c * wu + d * wv], axis=-3)


class CubicKinetics:
    """Scalar cubic model f(u) = mu u - alpha_c u^3 with one diffusivity."""

    def __init__(self, params: CubicParams, d0: float = 1.0):
        if d0 < 0:
            raise ValueError("diffusion coefficient must be >= 0")
        self.params = params
        self.d0 = d0

    @property
    def n_components(self) -> int:
        return 1

    @property
    def diffusion(self) -> tuple[float, ...]:
        return (self.d0,)

    def reaction(self, state: np.ndarray) -> np.ndarray:
        u = state[0]
        return (self.params.mu * u - self.params.alpha_c * u**3)[None]

    def jacobian_apply(self, state: np.ndarray, tangent: np.ndarray) -> np.ndarray:
        fprime = self.params.mu - 3.0 * self.params.alpha_c * state[0] ** 2
        return fprime * tangent
