"""Portable deterministic initial-condition generator.

Noise fields must be reproducible bit-for-bit from a 64-bit seed without
reference to any ecosystem's random library, so the generator is pinned
algorithmically:

  * SplitMix64 stream: output k (k = 0, 1, ...) is mix(seed + (k+1) * PHI)
    with PHI = 0x9E3779B97F4A7C15 and the standard mix (xor-shift 30 /
    mul 0xBF58476D1CE4E5B9 / xor-shift 27 / mul 0x94D049BB133111EB /
    xor-shift 31), all modulo 2^64.
  * Uniform doubles from the high 53 bits: u = ((x >> 11) + 0.5) * 2^-53.
    Zero is unreachable (min is 2^-54), so the Box-Muller log is always
    safe; the single all-ones pattern rounds to 1.0, which is harmless.
  * Box-Muller pairs: z0 = sqrt(-2 ln u1) cos(2 pi u2),
    z1 = sqrt(-2 ln u1) sin(2 pi u2) from consecutive uniforms.
  * Samples fill the field component-major, row-major.
"""

from __future__ import annotations

import numpy as np

from .spectral import GridSpec, RealField

__all__ = ["splitmix64", "normal_samples", "init_field"]

_PHI = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed: int, count: int, start: int = 0) -> np.ndarray:
    """Outputs start .. start+count-1 of the SplitMix64 stream for `seed`."""
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        x = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + idx * _PHI
        x ^= x >> np.uint64(30)
        x *= _MIX1
        x ^= x >> np.uint64(27)
        x *= _MIX2
        x ^= x >> np.uint64(31)
    return x


def _uniform_open01(bits: np.ndarray) -> np.ndarray:
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def normal_samples(seed: int, count: int) -> np.ndarray:
    """First `count` standard-normal draws of the pinned stream."""
    pairs = (count + 1) // 2
    bits = splitmix64(seed, 2 * pairs)
    u = _uniform_open01(bits)
    u1, u2 = u[0::2], u[1::2]
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(2 * pairs)
    z[0::2] = r * np.cos(2.0 * np.pi * u2)
    z[1::2] = r * np.sin(2.0 * np.pi * u2)
    return z[:count]


def init_field(grid: GridSpec, seed: int, sigma: float) -> RealField:
    """I.i.d. normal(0, sigma) noise on every component and grid point."""
    if sigma < 0:
        raise ValueError("noise amplitude must be >= 0")
    count = grid.components * grid.n * grid.n
    if sigma == 0.0:
        return RealField(grid, np.zeros(grid.field_shape()))
    data = sigma * normal_samples(seed, count)
    return RealField(grid, data.reshape(grid.field_shape()))
