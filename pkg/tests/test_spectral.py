"""Spectral core: transforms against a brute-force cosine-sum oracle and
the Laplacian against a ghost-point finite-difference closure."""

import numpy as np
import pytest

from mncs import (
    GridSpec,
    RealField,
    apply_laplacian,
    dct2_forward,
    dct2_inverse,
    laplacian_symbol,
)
from mncs.spectral import SpectralField


def brute_force_dct2(data: np.ndarray) -> np.ndarray:
    """O(n^4) orthonormal cosine sum, the independent transform oracle."""
    n = data.shape[-1]
    j = np.arange(n)
    scale = np.where(np.arange(n) == 0, np.sqrt(1.0 / n), np.sqrt(2.0 / n))
    out = np.zeros_like(data)
    for k1 in range(n):
        c1 = np.cos(np.pi * k1 * (2 * j + 1) / (2 * n))
        for k2 in range(n):
            c2 = np.cos(np.pi * k2 * (2 * j + 1) / (2 * n))
            out[..., k1, k2] = scale[k1] * scale[k2] * (
                data * np.outer(c1, c2)
            ).sum(axis=(-2, -1))
    return out


def random_field(grid: GridSpec, seed: int) -> RealField:
    rng = np.random.default_rng(seed)
    return RealField(grid, rng.standard_normal(grid.field_shape()))


class TestGridSpec:
    def test_rejects_odd_or_small_n(self):
        with pytest.raises(ValueError):
            GridSpec(5, 1.0)
        with pytest.raises(ValueError):
            GridSpec(2, 1.0)

    def test_rejects_bad_length_and_components(self):
        with pytest.raises(ValueError):
            GridSpec(8, 0.0)
        with pytest.raises(ValueError):
            GridSpec(8, 1.0, components=0)

    def test_midpoint_samples(self):
        grid = GridSpec(4, 4.0, components=1)
        assert np.allclose(grid.sample_points(), [0.5, 1.5, 2.5, 3.5])

    def test_wavenumbers(self):
        grid = GridSpec(4, 4.0, components=1)
        assert np.allclose(grid.wavenumbers(), np.pi * np.arange(4) / 4.0)


class TestForwardTransform:
    def test_constant_field_is_pure_zero_mode(self):
        grid = GridSpec(8, 2.0, components=1)
        c = 3.7
        spec = dct2_forward(RealField(grid, np.full(grid.field_shape(), c)))
        assert spec.coeffs[0, 0, 0] == pytest.approx(c * grid.n, rel=1e-14)
        rest = spec.coeffs.copy()
        rest[0, 0, 0] = 0.0
        assert np.abs(rest).max() < 1e-13

    def test_cosine_mode_hits_single_coefficient(self):
        grid = GridSpec(16, 8.0, components=1)
        x = grid.sample_points()
        data = np.cos(np.pi * x / grid.length)[None, :, None] * np.ones(
            (1, grid.n, grid.n)
        )
        spec = dct2_forward(RealField(grid, data))
        mask = np.zeros_like(spec.coeffs, dtype=bool)
        mask[0, 1, 0] = True
        assert abs(spec.coeffs[0, 1, 0]) > 1.0
        assert np.abs(spec.coeffs[~mask]).max() < 1e-12

    def test_matches_cosine_sum_oracle(self):
        grid = GridSpec(8, 3.0, components=2)
        field = random_field(grid, 11)
        spec = dct2_forward(field)
        oracle = brute_force_dct2(field.data)
        assert np.abs(spec.coeffs - oracle).max() < 1e-12

    def test_parseval(self):
        grid = GridSpec(16, 5.0, components=2)
        field = random_field(grid, 5)
        spec = dct2_forward(field)
        a = (field.data**2).sum()
        b = (spec.coeffs**2).sum()
        assert abs(a - b) / a < 1e-10


class TestInverseTransform:
    def test_zero_coeffs_give_zero_field(self):
        grid = GridSpec(8, 1.0, components=1)
        field = dct2_inverse(SpectralField(grid, np.zeros(grid.field_shape())))
        assert np.all(field.data == 0.0)

    def test_unit_zero_mode_is_constant(self):
        grid = GridSpec(8, 1.0, components=1)
        coeffs = np.zeros(grid.field_shape())
        coeffs[0, 0, 0] = 1.0
        field = dct2_inverse(SpectralField(grid, coeffs))
        assert np.allclose(field.data, 1.0 / grid.n, atol=1e-15)

    def test_roundtrip_random(self):
        grid = GridSpec(16, 2.0, components=2)
        field = random_field(grid, 404)
        back = dct2_inverse(dct2_forward(field))
        assert np.abs(back.data - field.data).max() < 1e-12

    def test_roundtrip_scales_with_field(self):
        grid = GridSpec(32, 10.0, components=1)
        field = random_field(grid, 8)
        field.data *= 1e6
        back = dct2_inverse(dct2_forward(field))
        err = np.abs(back.data - field.data).max()
        assert err <= 1e-12 * np.abs(field.data).max()


class TestLaplacianSymbol:
    def test_direct_values(self):
        sym = laplacian_symbol(GridSpec(4, 4.0, components=1))
        assert sym.k2[1, 0] == pytest.approx((np.pi / 4.0) ** 2, rel=1e-15)
        sym2 = laplacian_symbol(GridSpec(128, 64.0, components=1))
        assert sym2.k2[1, 1] == pytest.approx(2 * (np.pi / 64.0) ** 2, rel=1e-15)

    def test_zero_mode_is_exactly_zero(self):
        for n, L in ((4, 1.0), (16, 64.0), (128, 3.5)):
            assert laplacian_symbol(GridSpec(n, L, components=1)).k2[0, 0] == 0.0

    def test_nonnegative_and_monotone_along_axes(self):
        k2 = laplacian_symbol(GridSpec(16, 7.0, components=1)).k2
        assert (k2 >= 0).all()
        assert (np.diff(k2, axis=0) >= 0).all()
        assert (np.diff(k2, axis=1) >= 0).all()


class TestApplyLaplacian:
    def test_annihilates_constants_exactly(self):
        grid = GridSpec(8, 2.0, components=2)
        out = apply_laplacian(RealField(grid, np.full(grid.field_shape(), 4.2)), 1.0)
        assert np.abs(out.data).max() < 1e-13

    def test_cosine_eigenfunction(self):
        grid = GridSpec(64, 64.0, components=1)
        x = grid.sample_points()
        u = np.cos(np.pi * x / grid.length)[None, :, None] * np.ones(
            (1, grid.n, grid.n)
        )
        out = apply_laplacian(RealField(grid, u), 1.0)
        expected = -((np.pi / grid.length) ** 2) * u
        denom = np.abs(expected).max()
        assert np.abs(out.data - expected).max() / denom < 1e-10

    def test_matches_finite_difference_oracle(self):
        # smooth random-mode field; FD truncation bounded by (h^2/12) sum |a| k^4
        grid = GridSpec(256, 64.0, components=1)
        rng = np.random.default_rng(3)
        x = grid.sample_points()
        u = np.zeros((grid.n, grid.n))
        bound4 = 0.0
        for mx in range(5):
            for my in range(5):
                a = rng.standard_normal()
                kx = np.pi * mx / grid.length
                ky = np.pi * my / grid.length
                u += a * np.outer(np.cos(kx * x), np.cos(ky * x))
                bound4 += abs(a) * (kx**4 + ky**4)
        field = RealField(grid, u[None])
        out = apply_laplacian(field, 1.0)
        h = grid.spacing
        ue = np.pad(u, 1, mode="edge")  # ghost-point no-flux closure
        fd = (
            ue[2:, 1:-1] - 2 * u + ue[:-2, 1:-1] + ue[1:-1, 2:] - 2 * u + ue[1:-1, :-2]
        ) / h**2
        tol = (h**2 / 12.0) * bound4 * 2.0 + 1e-12
        assert np.abs(out.data[0] - fd).max() < tol

    def test_linearity(self):
        grid = GridSpec(16, 3.0, components=1)
        f = random_field(grid, 21)
        g = random_field(grid, 22)
        alpha, beta = 2.5, -1.25
        combo = RealField(grid, alpha * f.data + beta * g.data)
        lhs = apply_laplacian(combo, 1.5).data
        rhs = alpha * apply_laplacian(f, 1.5).data + beta * apply_laplacian(g, 1.5).data
        scale = max(np.abs(lhs).max(), 1.0)
        assert np.abs(lhs - rhs).max() < 1e-12 * scale

    def test_rejects_negative_diffusion(self):
        grid = GridSpec(8, 1.0, components=1)
        with pytest.raises(ValueError):
            apply_laplacian(RealField(grid, np.zeros(grid.field_shape())), -1.0)
