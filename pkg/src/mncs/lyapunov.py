"""Tangent-bundle evolution for the Lyapunov spectrum.

m tangent fields ride along the base trajectory using the same exponential
tables; the reaction is replaced by its pointwise Jacobian-vector product
(plus the coupling residual). Every window the bundle is re-orthonormalized
by modified Gram-Schmidt and the log diagonal scales accumulate into the
exponents.

The flat grid inner product equals the coefficient inner product for an
orthonormal transform, so all QR work happens directly on coefficients.
"""

from __future__ import annotations

import numpy as np
from scipy.fft import dctn, idctn

from .config import RunConfig
from .diagnostics import LyapunovSpectrum
from .etd import DIVERGENCE_LIMIT, IntegratorDivergenceError, SplitSpec, precompute_tables
from .rng import init_field
from .spectral import RealField, dct2_forward, laplacian_symbol

__all__ = ["lyapunov_spectrum", "leading_mode_basis"]

_COLLAPSE_FLOOR = 1e-300


def leading_mode_basis(grid, diffusion, gamma_eff: float, m: int) -> np.ndarray:
    """Deterministic orthonormal start frame: the m least-damped modes.

    Candidate (component, mode) pairs are ranked by the linear symbol
    -d_comp k^2 - gamma_eff, descending, ties broken by flat index. Each
    tangent is a unit coefficient at one winning entry, so for a linear
    problem the frame already diagonalizes the flow and the computed
    exponents are the per-mode rates themselves.
    """
    n_total = grid.components * grid.n * grid.n
    if not 1 <= m <= n_total:
        raise ValueError(f"m must be in [1, {n_total}], got {m}")
    d = np.asarray(diffusion, dtype=np.float64)
    k2 = laplacian_symbol(grid).k2
    symbols = (-d[:, None, None] * k2[None] - gamma_eff).ravel()
    order = np.argsort(-symbols, kind="stable")[:m]
    frame = np.zeros((m, n_total))
    frame[np.arange(m), order] = 1.0
    return frame.reshape(m, grid.components, grid.n, grid.n)


def _mgs_qr(tangents: np.ndarray):
    """In-place modified Gram-Schmidt; returns (tangents, diag, collapsed_idx)."""
    m = tangents.shape[0]
    flat = tangents.reshape(m, -1)
    diag = np.empty(m)
    collapsed = []
    for j in range(m):
        r = float(np.linalg.norm(flat[j]))
        diag[j] = r
        if not np.isfinite(r) or r < _COLLAPSE_FLOOR:
            collapsed.append(j)
            continue
        flat[j] /= r
        if j + 1 < m:
            proj = flat[j + 1 :] @ flat[j]
            flat[j + 1 :] -= proj[:, None] * flat[j]
    return tangents, diag, collapsed


def lyapunov_spectrum(
    config: RunConfig,
    m: int,
    window_steps: int,
    total_steps: int,
    transient_steps: int = 0,
    initial_field: RealField | None = None,
) -> LyapunovSpectrum:
    """Leading m Lyapunov exponents of the flow described by `config`.

    The base trajectory starts from the config's initial state (optionally
    after `transient_steps` of burn-in) and runs `total_steps` more steps;
    exponents are the accumulated log scales divided by the accumulated
    time, sorted descending. Collapsed tangent directions (QR diagonal
    underflow) are dropped and counted in the result.
    """
    if window_steps < 1 or total_steps < 1:
        raise ValueError("window_steps and total_steps must be >= 1")
    grid = config.build_grid()
    kinetics = config.build_kinetics()
    split = SplitSpec.from_coupling(config.coupling())
    tables = precompute_tables(grid, kinetics.diffusion, split, config.dt)
    h = config.dt

    if initial_field is None:
        if config.ic_path is not None:
            from .io import load_snapshot

            initial_field, _ = load_snapshot(config.ic_path)
        else:
            initial_field = init_field(grid, config.seed, config.noise_sigma)
    base = dct2_forward(initial_field).coeffs
    # the frame lives directly in coefficient space
    tangents = leading_mode_basis(grid, kinetics.diffusion, split.gamma_eff, m)

    base_prev = None
    tan_prev = None  # reset after every QR: the bundle basis changed
    logsum = np.zeros(m)
    collapsed_total = 0
    step = 0

    def advance(step_idx: int, with_tangents: bool):
        nonlocal base, tangents, base_prev, tan_prev
        u_phys = idctn(base, type=2, norm="ortho", axes=(-2, -1))
        nl = kinetics.reaction(u_phys)
        if split.has_residual:
            nl = nl + np.einsum("ij,j...->i...", split.residual, u_phys)
        nl_hat = dctn(nl, type=2, norm="ortho", axes=(-2, -1))
        new_base = tables.e * base + tables.q1 * nl_hat
        if base_prev is not None:
            new_base += tables.q2 * (nl_hat - base_prev)
        peak = np.max(np.abs(new_base))
        if not np.isfinite(peak) or peak > DIVERGENCE_LIMIT:
            raise IntegratorDivergenceError(
                step_idx, step_idx * h, f"max |coefficient| = {peak:g}"
            )
        if with_tangents:
            w_phys = idctn(tangents, type=2, norm="ortho", axes=(-2, -1))
            mw = kinetics.jacobian_apply(u_phys, w_phys)
            if split.has_residual:
                mw = mw + np.einsum("ij,mj...->mi...", split.residual, w_phys)
            mw_hat = dctn(mw, type=2, norm="ortho", axes=(-2, -1))
            new_tan = tables.e[None] * tangents + tables.q1[None] * mw_hat
            if tan_prev is not None:
                new_tan += tables.q2[None] * (mw_hat - tan_prev)
            tangents = new_tan
            tan_prev = mw_hat
        base = new_base
        base_prev = nl_hat

    for k in range(transient_steps):
        advance(k, with_tangents=False)

    while step < total_steps:
        advance(transient_steps + step, with_tangents=True)
        step += 1
        if step % window_steps == 0 or step == total_steps:
            tangents, diag, collapsed = _mgs_qr(tangents)
            if collapsed:
                keep = [j for j in range(tangents.shape[0]) if j not in collapsed]
                if not keep:
                    raise RuntimeError("entire tangent bundle collapsed")
                tangents = tangents[keep]
                logsum = logsum[keep]
                diag = diag[keep]
                collapsed_total += len(collapsed)
            logsum += np.log(diag)
            tan_prev = None

    exponents = np.sort(logsum / (total_steps * h))[::-1]
    return LyapunovSpectrum(
        exponents=tuple(float(x) for x in exponents),
        window=window_steps * h,
        total_time=total_steps * h,
        collapsed=collapsed_total,
    )
