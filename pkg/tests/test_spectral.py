import numpy as np
import pytest
from conftest import random_field
from hypothesis import given, settings
from hypothesis import strategies as st

from oldroyd_toy.spectral import (
    GridMismatchError,
    SpectralField,
    derivative,
    divergence_defect,
    l2_inner,
    l2_norm,
    leray_project,
    make_grid,
    symmetry_defect,
    to_physical,
    to_spectral,
    truncate,
)


class TestGrid:
    def test_small_lattice(self):
        g = make_grid(8, 8)
        assert sorted(g.kx.tolist()) == list(range(-4, 4))
        assert g.lx == g.ly == pytest.approx(2 * np.pi)

    def test_production_resolution(self):
        g = make_grid(128, 128)
        assert g.shape == (128, 128)
        assert g.k1.size == 128 * 128

    @pytest.mark.parametrize("nx, ny", [(7, 8), (8, 9), (6, 8), (8, 4098), (0, 8)])
    def test_rejects_bad_sizes(self, nx, ny):
        with pytest.raises(ValueError):
            make_grid(nx, ny)

    def test_odd_size_message(self):
        with pytest.raises(ValueError, match="odd"):
            make_grid(7, 8)

    def test_deterministic(self):
        a, b = make_grid(16, 32), make_grid(16, 32)
        assert a == b
        assert np.array_equal(a.k2, b.k2)


class TestTransforms:
    def test_constant_has_only_dc(self, grid32):
        f = to_spectral(grid32, np.ones(grid32.shape))
        nz = np.argwhere(np.abs(f.coeffs) > 1e-12)
        assert nz.tolist() == [[0, 0]]

    def test_single_cosine_mode(self, grid32):
        X, _ = grid32.mesh
        f = to_spectral(grid32, np.cos(3 * X))
        nz = {
            (int(grid32.kx[i]), int(grid32.ky[j]))
            for i, j in np.argwhere(np.abs(f.coeffs) > 1e-9)
        }
        assert nz == {(3, 0), (-3, 0)}

    def test_round_trip_white_noise(self, grid32, rng):
        x = rng.standard_normal(grid32.shape)
        assert (
            np.abs(to_physical(to_spectral(grid32, x)) - x).max()
            <= 1e-12 * np.abs(x).max()
        )

    def test_parseval(self, grid32, rng):
        x = rng.standard_normal(grid32.shape)
        direct = grid32.cell_area * np.sum(x**2)
        assert l2_norm(to_spectral(grid32, x)) ** 2 == pytest.approx(direct, rel=1e-12)

    def test_matches_plain_fft(self, grid32, rng):
        x = rng.standard_normal(grid32.shape)
        ref = np.fft.fft2(x)
        assert (
            np.abs(to_spectral(grid32, x).coeffs - ref).max()
            <= 1e-12 * np.abs(ref).max()
        )

    def test_size_mismatch(self, grid32):
        with pytest.raises(ValueError):
            to_spectral(grid32, np.zeros((16, 32)))

    def test_conjugate_symmetry_exact(self, grid32, rng):
        assert symmetry_defect(random_field(grid32, rng)) == 0.0


class TestDerivative:
    def test_sin_to_cos(self, grid32):
        X, _ = grid32.mesh
        d = to_physical(derivative(to_spectral(grid32, np.sin(X)), 1))
        assert np.abs(d - np.cos(X)).max() <= 1e-12

    def test_constant(self, grid32):
        d = derivative(to_spectral(grid32, np.full(grid32.shape, 3.0)), 2)
        assert np.abs(d.coeffs).max() == 0.0

    def test_mixed_mode_axis2(self, grid32):
        X, Y = grid32.mesh
        d = to_physical(
            derivative(to_spectral(grid32, np.cos(2 * X) * np.sin(3 * Y)), 2)
        )
        # symbolic: d/dy [cos 2x sin 3y] = 3 cos 2x cos 3y
        assert np.abs(d - 3 * np.cos(2 * X) * np.cos(3 * Y)).max() <= 1e-12

    def test_nyquist_multiplier_is_zero(self, grid32):
        X, _ = grid32.mesh
        f = to_spectral(grid32, np.cos(16 * X))
        assert np.abs(derivative(f, 1).coeffs).max() == 0.0

    def test_bad_axis(self, grid32):
        with pytest.raises(ValueError):
            derivative(SpectralField.zeros(grid32), 3)

    def test_preserves_realness(self, grid32, rng):
        f = random_field(grid32, rng)
        assert symmetry_defect(derivative(f, 1)) == 0.0
        assert symmetry_defect(derivative(f, 2)) == 0.0


class TestTruncate:
    def test_mode_outside_box(self, grid32):
        X, _ = grid32.mesh
        assert (
            np.abs(to_physical(truncate(to_spectral(grid32, np.cos(5 * X)), 4))).max()
            <= 1e-12
        )

    def test_mode_inside_box(self, grid32):
        X, _ = grid32.mesh
        f = to_spectral(grid32, np.cos(3 * X))
        assert np.abs(to_physical(truncate(f, 4)) - np.cos(3 * X)).max() <= 1e-12

    def test_idempotent(self, grid32, rng):
        f = random_field(grid32, rng)
        once = truncate(f, 4)
        assert np.array_equal(truncate(once, 4).coeffs, once.coeffs)

    @pytest.mark.parametrize("n", [-1, 17])
    def test_out_of_range(self, grid32, n):
        with pytest.raises(ValueError):
            truncate(SpectralField.zeros(grid32), n)


class TestLeray:
    def test_gradient_projects_to_zero(self, grid32):
        X, Y = grid32.mesh
        # grad sin(x+y) = (cos(x+y), cos(x+y))
        g = to_spectral(grid32, np.cos(X + Y))
        p1, p2 = leray_project(g, g)
        assert (
            max(np.abs(to_physical(p1)).max(), np.abs(to_physical(p2)).max()) <= 1e-12
        )

    def test_divergence_free_unchanged(self, grid32):
        _, Y = grid32.mesh
        v1, v2 = (
            to_spectral(grid32, -np.sin(Y)),
            to_spectral(grid32, np.zeros(grid32.shape)),
        )
        p1, p2 = leray_project(v1, v2)
        assert np.abs(to_physical(p1) + np.sin(Y)).max() <= 1e-12
        assert np.abs(to_physical(p2)).max() <= 1e-12

    def test_against_poisson_solve(self, grid32):
        X, _ = grid32.mesh
        v1 = to_spectral(grid32, np.sin(X))
        v2 = to_spectral(grid32, np.sin(X))
        # oracle: solve Lap q = div v mode by mode, subtract grad q
        kx = np.fft.fftfreq(32, 1 / 32)[:, None] * np.ones((1, 32))
        ky = np.fft.fftfreq(32, 1 / 32)[None, :] * np.ones((32, 1))
        div = 1j * kx * v1.coeffs + 1j * ky * v2.coeffs
        ksq = kx**2 + ky**2
        q = np.where(ksq > 0, -div / np.where(ksq > 0, ksq, 1), 0)
        w1 = np.fft.ifft2(v1.coeffs - 1j * kx * q).real
        w2 = np.fft.ifft2(v2.coeffs - 1j * ky * q).real
        p1, p2 = leray_project(v1, v2)
        assert np.abs(to_physical(p1) - w1).max() <= 1e-12
        assert np.abs(to_physical(p2) - w2).max() <= 1e-12
        assert np.abs(w1).max() <= 1e-12
        assert np.abs(w2 - np.sin(X)).max() <= 1e-12

    def test_mean_passes_through(self, grid32):
        c = to_spectral(grid32, np.full(grid32.shape, 2.5))
        p1, _p2 = leray_project(c, -1.0 * c)
        assert np.array_equal(p1.coeffs, c.coeffs)

    def test_grid_mismatch(self, grid32):
        with pytest.raises(GridMismatchError):
            leray_project(
                SpectralField.zeros(grid32), SpectralField.zeros(make_grid(16, 16))
            )

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**31 - 1), n=st.sampled_from([8, 16, 24]))
    def test_properties(self, seed, n):
        g = make_grid(n, n)
        rng = np.random.default_rng(seed)
        v1, v2 = random_field(g, rng), random_field(g, rng)
        p1, p2 = leray_project(v1, v2)
        assert divergence_defect(p1, p2) <= 1e-12
        q1, q2 = leray_project(p1, p2)
        scale = l2_norm(v1) + l2_norm(v2)
        assert l2_norm(q1 - p1) + l2_norm(q2 - p2) <= 1e-12 * scale
        ortho = l2_inner(p1, v1 - p1) + l2_inner(p2, v2 - p2)
        assert abs(ortho) <= 1e-12 * scale**2
        assert symmetry_defect(p1) == 0.0 and symmetry_defect(p2) == 0.0
