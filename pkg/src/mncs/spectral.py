"""Cosine-basis spectral representation of fields on a square no-flux box.

The orthonormal DCT-II over cell midpoints x_j = (j + 1/2) L/n diagonalizes
the Laplacian under zero-normal-derivative boundaries. Its symbol is
-(k_x^2 + k_y^2) with k_m = pi m / L, and the (0, 0) entry is exactly zero:
diffusion exerts no damping on the spatial mean of a field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import dctn, idctn

__all__ = [
    "GridSpec",
    "RealField",
    "SpectralField",
    "LaplacianSymbol",
    "dct2_forward",
    "dct2_inverse",
    "laplacian_symbol",
    "apply_laplacian",
]


@dataclass(frozen=True)
class GridSpec:
    """Square 2D grid: n midpoints per axis on [0, length]^2.

    n must be even and >= 4 so that grid-halving convergence studies stay
    on valid grids.
    """

    n: int
    length: float
    components: int = 2
    dims: int = 2

    def __post_init__(self):
        if self.n < 4 or self.n % 2 != 0:
            raise ValueError(f"grid size must be an even integer >= 4, got {self.n}")
        if not self.length > 0:
            raise ValueError(f"domain length must be positive, got {self.length}")
        if self.components < 1:
            raise ValueError(f"need at least one component, got {self.components}")
        if self.dims != 2:
            raise ValueError("only 2D grids are supported")

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @property
    def cell_area(self) -> float:
        return (self.length / self.n) ** 2

    @property
    def measure(self) -> float:
        """Domain measure |Omega| = length^dims."""
        return self.length**self.dims

    def wavenumbers(self) -> np.ndarray:
        """k_m = pi m / L for m = 0 .. n-1."""
        return np.pi * np.arange(self.n) / self.length

    def sample_points(self) -> np.ndarray:
        """Midpoint samples x_j = (j + 1/2) L / n."""
        return (np.arange(self.n) + 0.5) * self.spacing

    def field_shape(self) -> tuple[int, int, int]:
        return (self.components, self.n, self.n)


def _check_shape(grid: GridSpec, data: np.ndarray, what: str) -> None:
    if data.shape != grid.field_shape():
        raise ValueError(
            f"{what} has shape {data.shape}, expected {grid.field_shape()}"
        )


@dataclass
class RealField:
    """Multi-component state sampled on the midpoint grid, shape (N, n, n)."""

    grid: GridSpec
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        _check_shape(self.grid, self.data, "field data")

    def check_finite(self) -> None:
        """NaN/Inf anywhere is a hard integrator-failure signal."""
        if not np.isfinite(self.data).all():
            raise ValueError("field contains non-finite values")

    def copy(self) -> "RealField":
        return RealField(self.grid, self.data.copy())


@dataclass
class SpectralField:
    """Orthonormal DCT-II coefficients of a RealField, shape (N, n, n)."""

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.float64)
        _check_shape(self.grid, self.coeffs, "spectral coefficients")

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy())


@dataclass(frozen=True)
class LaplacianSymbol:
    """k2[m][l] = (pi m / L)^2 + (pi l / L)^2; entry (0, 0) is the zero mode."""

    grid: GridSpec
    k2: np.ndarray


def dct2_forward(field: RealField) -> SpectralField:
    """Orthonormal 2D DCT-II per component; Parseval holds exactly."""
    coeffs = dctn(field.data, type=2, norm="ortho", axes=(-2, -1))
    return SpectralField(field.grid, coeffs)


def dct2_inverse(spec: SpectralField) -> RealField:
    """Inverse of dct2_forward (orthonormal DCT-III per axis)."""
    data = idctn(spec.coeffs, type=2, norm="ortho", axes=(-2, -1))
    return RealField(spec.grid, data)


def laplacian_symbol(grid: GridSpec) -> LaplacianSymbol:
    k = grid.wavenumbers()
    k2 = k[:, None] ** 2 + k[None, :] ** 2
    return LaplacianSymbol(grid, k2)


def apply_laplacian(field: RealField, d_coeff: float) -> RealField:
    """d * Laplacian of each component, computed in coefficient space.

    Constants are annihilated exactly: the (0, 0) symbol entry is zero.
    """
    if d_coeff < 0:
        raise ValueError(f"diffusion coefficient must be >= 0, got {d_coeff}")
    sym = laplacian_symbol(field.grid)
    spec = dct2_forward(field)
    spec.coeffs *= -d_coeff * sym.k2
    return dct2_inverse(spec)
