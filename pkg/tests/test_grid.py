import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loglap.grid import (SQRT_2PI, GridMismatchError, RealField, SpectralField, TruncationWarning,
                         VectorField, convolve, evaluate, forward_transform, inverse_transform,
                         l1_norm, l2_norm, make_grid, spectral_l2_norm)
from loglap.problem import KernelSpec


def gaussian(grid, center=0.0, var=1.0):
    return RealField(grid, np.exp(-((grid.x - center) ** 2) / (2 * var)))


class TestMakeGrid:
    def test_small_grid_arithmetic(self):
        g = make_grid(80, 8)
        assert g.h == 10.0
        assert g.x[0] == -40.0
        assert g.dp == pytest.approx(0.0785398, abs=1e-7)
        assert g.h * g.n == 80.0

    def test_unit_frequency_spacing(self):
        g = make_grid(2 * math.pi, 16)
        assert g.dp == 1.0
        assert sorted(g.p) == list(range(-8, 8))

    @pytest.mark.parametrize("L, n, msg", [(1, 0, "n too small"), (1, 6, "n too small"),
                                           (1, 9, "even"), (0, 16, "positive"), (-2, 16, "positive")])
    def test_rejects_bad_parameters(self, L, n, msg):
        with pytest.raises(ValueError, match=msg):
            make_grid(L, n)

    def test_frequency_lattice_symmetric_except_nyquist(self):
        g = make_grid(10.0, 32)
        ks = set(g.k.tolist())
        assert ks == set(range(-16, 16))
        assert all(-k in ks for k in ks if k != -16)

    def test_grids_compare_by_value(self):
        assert make_grid(80, 64) == make_grid(80.0, 64)
        assert make_grid(80, 64) != make_grid(40, 64)


class TestTransforms:
    def test_gaussian_is_self_dual(self, grid):
        F = forward_transform(gaussian(grid))
        assert np.max(np.abs(F.coeffs - np.exp(-grid.p**2 / 2))) <= 1e-12

    def test_zero_field(self, grid):
        F = forward_transform(RealField(grid, np.zeros(grid.n)))
        assert not np.any(F.coeffs)
        assert not np.any(inverse_transform(F).values)

    def test_shift_phase_law(self, grid):
        F = forward_transform(gaussian(grid, center=2.0))
        expected = np.exp(-2j * grid.p) * np.exp(-grid.p**2 / 2)
        assert np.max(np.abs(F.coeffs - expected)) <= 1e-12

    def test_round_trip_random(self, grid, rng):
        for _ in range(100):
            f = RealField(grid, rng.standard_normal(grid.n))
            back = inverse_transform(forward_transform(f))
            assert l2_norm(RealField(grid, back.values - f.values)) <= 1e-12 * l2_norm(f)

    def test_round_trip_tophat(self, grid):
        f = RealField(grid, (np.abs(grid.x) <= 0.5).astype(float))
        back = inverse_transform(forward_transform(f))
        assert np.max(np.abs(back.values - f.values)) <= 1e-12

    def test_conjugate_symmetry_of_real_field(self, grid, rng):
        F = forward_transform(RealField(grid, rng.standard_normal(grid.n))).coeffs
        mirror = grid.mirror_index()
        scale = np.max(np.abs(F))
        assert np.max(np.abs(F[mirror] - np.conj(F))) <= 1e-12 * scale

    def test_non_symmetric_input_warns(self, grid):
        c = np.zeros(grid.n, dtype=complex)
        c[3] = 1.0
        with pytest.warns(RuntimeWarning, match="imaginary residue"):
            inverse_transform(SpectralField(grid, c))

    def test_vector_transform_matches_components(self, grid, rng):
        u = VectorField(grid, rng.standard_normal((3, grid.n)))
        F = forward_transform(u).coeffs
        for m in range(3):
            assert np.array_equal(F[m], forward_transform(u.component(m)).coeffs)

    def test_evaluate_reproduces_nodes(self, grid):
        f = gaussian(grid, center=0.3)
        F = forward_transform(f)
        idx = [0, 1000, 2048, 3000]
        assert np.allclose(evaluate(F, grid.x[idx]), f.values[idx], atol=1e-13)
        assert evaluate(F, [0.77])[0] == pytest.approx(math.exp(-0.47**2 / 2), abs=1e-13)


@settings(max_examples=40, deadline=None)
@given(alpha=st.floats(-10, 10), beta=st.floats(-10, 10), seed=st.integers(0, 2**32 - 1))
def test_linearity(alpha, beta, seed):
    grid = make_grid(20.0, 256)
    r = np.random.default_rng(seed)
    f, g = r.standard_normal(grid.n), r.standard_normal(grid.n)
    lhs = forward_transform(RealField(grid, alpha * f + beta * g)).coeffs
    rhs = alpha * forward_transform(RealField(grid, f)).coeffs + beta * forward_transform(RealField(grid, g)).coeffs
    scale = max(1.0, np.max(np.abs(lhs)))
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), L=st.floats(1.0, 200.0), logn=st.integers(3, 11))
def test_parseval(seed, L, logn):
    grid = make_grid(L, 2**logn)
    f = RealField(grid, np.random.default_rng(seed).standard_normal(grid.n))
    phys = grid.h * np.sum(f.values**2)
    spec = grid.dp * np.sum(np.abs(forward_transform(f).coeffs) ** 2)
    assert spec == pytest.approx(phys, rel=1e-12)


class TestNorms:
    def test_zero(self, grid):
        assert l2_norm(VectorField.zeros(grid, 2)) == 0.0
        assert l1_norm(RealField(grid, np.zeros(grid.n))) == 0.0

    def test_gaussian_l2(self, grid):
        u = VectorField(grid, gaussian(grid).values)
        assert l2_norm(u) == pytest.approx(math.pi**0.25, abs=1e-10)
        assert math.pi**0.25 == pytest.approx(1.3313353638, abs=1e-10)

    def test_vector_norm_of_duplicates(self, grid):
        v = gaussian(grid).values
        assert l2_norm(VectorField(grid, np.stack([v, v]))) == pytest.approx(math.sqrt(2) * l2_norm(VectorField(grid, v)), rel=1e-15)

    def test_homogeneity(self, grid, rng):
        u = VectorField(grid, rng.standard_normal((2, grid.n)))
        assert l2_norm(-3.5 * u) == pytest.approx(3.5 * l2_norm(u), rel=1e-14)

    def test_unit_gaussian_kernel_mass(self, grid):
        assert l1_norm(KernelSpec("gaussian", 1.3).sample(grid)) == pytest.approx(1.0, abs=1e-10)

    def test_scaled_laplace_kernel_mass(self, grid):
        assert l1_norm(KernelSpec("laplace", 1.0, amplitude=3.0).sample(grid)) == pytest.approx(3.0, abs=1e-8)

    def test_l1_triangle_inequality(self, grid, rng):
        a, b = rng.standard_normal(grid.n), rng.standard_normal(grid.n)
        assert l1_norm(RealField(grid, a + b)) <= l1_norm(RealField(grid, a)) + l1_norm(RealField(grid, b)) + 1e-12

    def test_spectral_norm_matches_physical(self, grid):
        f = gaussian(grid)
        assert spectral_l2_norm(forward_transform(f)) == pytest.approx(l2_norm(f), rel=1e-13)


def direct_convolution(k, g):
    """O(n^2) periodic rectangle-rule convolution, independent of the FFT path."""
    grid = k.grid
    n, h = grid.n, grid.h
    out = np.empty(n)
    j = np.arange(n)
    for i in range(n):
        # x_i - x_j lands on node (i - j + n/2) mod n
        out[i] = h * np.dot(k.values[(i - j + n // 2) % n], g.values)
    return RealField(grid, out)


class TestConvolve:
    def test_gaussian_variances_add(self, grid):
        def normal(var):
            return RealField(grid, np.exp(-grid.x**2 / (2 * var)) / math.sqrt(2 * math.pi * var))
        out = convolve(normal(0.5), normal(1.7))
        ref = normal(2.2).values
        assert np.linalg.norm(out.values - ref) <= 1e-10 * np.linalg.norm(ref)

    def test_zero(self, grid):
        k = KernelSpec("gaussian").sample(grid)
        assert not np.any(convolve(k, RealField(grid, np.zeros(grid.n))).values)

    def test_tophats_against_direct_quadrature(self):
        grid = make_grid(8.0, 512)
        box = RealField(grid, (np.abs(grid.x) <= 0.5).astype(float))
        out = convolve(box, box)
        ref = direct_convolution(box, box)
        assert np.max(np.abs(out.values - ref.values)) <= 1e-6
        # and it is the triangle on [-1, 1] up to the O(h) sampling of the box edges
        assert np.max(np.abs(out.values - np.clip(1 - np.abs(grid.x), 0, None))) <= 2 * grid.h

    def test_commutative_and_bilinear(self, grid, rng):
        k = KernelSpec("laplace", 0.7).sample(grid)
        g1 = RealField(grid, np.exp(-grid.x**2) * rng.standard_normal(grid.n))
        g2 = RealField(grid, np.exp(-grid.x**2 / 3))
        assert np.allclose(convolve(k, g1).values, convolve(g1, k).values, atol=1e-14)
        lhs = convolve(k, RealField(grid, 2 * g1.values - g2.values)).values
        rhs = 2 * convolve(k, g1).values - convolve(k, g2).values
        assert np.allclose(lhs, rhs, atol=1e-13)

    def test_edge_warning(self, grid):
        k = KernelSpec("gaussian").sample(grid)
        flat = RealField(grid, np.ones(grid.n))
        with pytest.warns(TruncationWarning):
            convolve(k, flat)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            convolve(k, KernelSpec("gaussian", 2.0).sample(grid))

    def test_grid_mismatch(self, grid):
        other = make_grid(40.0, 4096)
        with pytest.raises(GridMismatchError):
            convolve(KernelSpec("gaussian").sample(grid), KernelSpec("gaussian").sample(other))


@pytest.mark.parametrize("kernel", [
    KernelSpec("gaussian", 1.0), KernelSpec("gaussian", 0.5), KernelSpec("gaussian", 0.05, -2.0),
    KernelSpec("laplace", 1.0), KernelSpec("laplace", 0.1, 3.0), KernelSpec("tophat", 0.5),
    KernelSpec("tophat", 2.3, -0.4),
])
def test_transform_bounded_by_l1(grid, kernel):
    k = kernel.sample(grid)
    assert np.max(np.abs(forward_transform(k).coeffs)) <= l1_norm(k) / SQRT_2PI + 1e-12
