import math
import warnings
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loglap.grid import (SQRT_2PI, RealField, SpectralField, evaluate, forward_transform,
                         inverse_transform, l2_norm, spectral_l2_norm)
from loglap.linear import (ZeroModeError, apply_operator, resolved_mask, solve_linear,
                           symbol_table)
from loglap.problem import (KernelSpec, NonlinearitySpec, NonlinearTerm, ProblemSpec,
                            SourceSpec)
from loglap.symbol import SymbolParams, system_lower_bound

# Free-space solution of L u = exp(-x^2/2) with a=0, b=1 at x = 0, 1, 5,
# by adaptive quadrature of the inverse Fourier integral (scipy.integrate.quad,
# real part over [-40, 0] and [0, 40]).
FREE_SPACE = {0.0: -0.36131571616524855, 1.0: -0.7917892140984523, 5.0: 0.20618474199418851}


def spec1(a=0.0, b=1.0, source=None, L=80.0, n=4096):
    return ProblemSpec(a=(a,), b=(b,), epsilon=(0.1,), kernels=(KernelSpec("gaussian"),),
                       sources=(source or SourceSpec("gaussian"),),
                       nonlinearity=NonlinearitySpec((NonlinearTerm("tanh", 0.5, (1.0,)),)), L=L, n=n)


def test_zero_source_gives_zero_with_warning():
    spec = spec1(source=SourceSpec("gaussian", amplitude=0.0))
    with pytest.warns(RuntimeWarning, match="sources vanish"):
        lin = solve_linear(spec)
    assert not np.any(lin.u0.values)


def test_manufactured_round_trip():
    spec = spec1(a=0.2, b=-1.3)
    grid = spec.grid()
    u_ref = RealField(grid, -grid.x * np.exp(-grid.x**2 / 2))
    U_ref = forward_transform(u_ref).coeffs
    U_ref[~resolved_mask(grid)] = 0.0
    F = symbol_table(spec, grid)[0] * U_ref
    f = inverse_transform(SpectralField(grid, F))
    spec = replace(spec, sources=(SourceSpec("samples", samples=f.values),))
    U = solve_linear(spec, grid).spectrum.coeffs[0]
    assert np.linalg.norm(U - U_ref) <= 1e-12 * np.linalg.norm(U_ref)


def test_matches_direct_frequency_sum():
    """Spectral interpolant equals the periodised inverse integral summed term by term."""
    spec = spec1()
    grid = spec.grid()
    lin = solve_linear(spec, grid)
    p = grid.p[resolved_mask(grid)]
    coeff = np.exp(-p**2 / 2) / (np.log(np.abs(p)) - 1j * p)
    xs = np.array([0.0, 0.3, 1.0, -2.7, 5.0, 17.1])
    direct = np.array([(grid.dp / SQRT_2PI) * np.sum(coeff * np.exp(1j * p * x)).real for x in xs])
    assert np.max(np.abs(evaluate(SpectralField(grid, lin.spectrum.coeffs[0]), xs) - direct)) <= 1e-12


def free_space_error(L, n):
    spec = spec1(L=L, n=n)
    grid = spec.grid()
    lin = solve_linear(spec, grid)
    xs = list(FREE_SPACE)
    return np.max(np.abs(evaluate(SpectralField(grid, lin.spectrum.coeffs[0]), xs) - np.array([FREE_SPACE[x] for x in xs])))


def test_free_space_error_shrinks_with_domain():
    # the zero-mean constraint of the periodic problem costs O(1/(L ln L))
    e80 = free_space_error(80.0, 4096)
    e320 = free_space_error(320.0, 16384)
    assert e320 < e80 / 3
    assert e80 < 1e-2


def test_apriori_bound(ref_spec, ref_grid, ref_linear):
    C = system_lower_bound(ref_spec.symbol_params())
    F = forward_transform(ref_spec.source_field(ref_grid)).coeffs
    for m in range(ref_spec.N):
        lhs = spectral_l2_norm(SpectralField(ref_grid, ref_linear.spectrum.coeffs[m]))
        assert lhs <= spectral_l2_norm(SpectralField(ref_grid, F[m])) / C + 1e-12


def test_deterministic_and_odd(ref_spec, ref_grid, ref_linear):
    again = solve_linear(ref_spec, ref_grid)
    assert np.array_equal(again.u0.values, ref_linear.u0.values)
    neg = replace(ref_spec, sources=tuple(replace(s, amplitude=-s.amplitude) for s in ref_spec.sources))
    assert np.array_equal(solve_linear(neg, ref_grid).u0.values, -ref_linear.u0.values)


def test_zero_bin_and_realness(ref_linear, ref_grid):
    assert np.all(ref_linear.spectrum.coeffs[:, 0] == 0)
    assert ref_linear.imaginary_residue <= 1e-10
    F0 = forward_transform(RealField(ref_grid, np.exp(-ref_grid.x**2 / 2))).coeffs[0]
    assert ref_linear.zero_mode_defect[0] == pytest.approx(abs(F0), rel=1e-14)


def test_nontrivial(ref_linear):
    assert l2_norm(ref_linear.u0) > 0


class TestApplyOperator:
    def test_zero(self):
        spec = spec1()
        grid = spec.grid()
        assert not np.any(apply_operator(spec, 0, RealField(grid, np.zeros(grid.n))).values)

    def test_recovers_source(self, ref_spec, ref_grid, ref_linear):
        F = forward_transform(ref_spec.source_field(ref_grid)).coeffs
        mask = resolved_mask(ref_grid)
        for m in range(ref_spec.N):
            out = forward_transform(apply_operator(ref_spec, m, ref_linear.u0.component(m))).coeffs
            assert np.linalg.norm((out - F[m])[mask]) <= 1e-11 * np.linalg.norm(F[m][mask])

    def test_single_mode(self):
        spec = spec1(L=2 * math.pi, n=16)
        grid = spec.grid()
        u = RealField(grid, np.cos(grid.x) + 0.5 * np.sin(grid.x))
        U = forward_transform(u).coeffs
        out = forward_transform(apply_operator(spec, 0, u)).coeffs
        k1, km1 = 1, grid.n - 1
        assert out[k1] == pytest.approx(-1j * U[k1], abs=1e-14)
        assert out[km1] == pytest.approx(1j * U[km1], abs=1e-14)
        others = np.ones(grid.n, dtype=bool)
        others[[k1, km1]] = False
        assert np.max(np.abs(out[others])) <= 1e-14

    def test_nonzero_mean_rejected(self):
        spec = spec1()
        grid = spec.grid()
        with pytest.raises(ZeroModeError, match="zero-mode not representable"):
            apply_operator(spec, 0, RealField(grid, np.exp(-grid.x**2)))


@settings(max_examples=20, deadline=None)
@given(a=st.floats(-2, 2), b=st.floats(0.1, 5), sign=st.sampled_from([1, -1]),
       center=st.floats(-5, 5), width=st.floats(0.3, 3))
def test_apriori_bound_random_problems(a, b, sign, center, width):
    spec = spec1(a=a, b=sign * b, source=SourceSpec("gaussian", center, width), L=80.0, n=1024)
    grid = spec.grid()
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        lin = solve_linear(spec, grid)
    C = system_lower_bound([SymbolParams(a, sign * b)])
    F = forward_transform(spec.source_field(grid))
    assert spectral_l2_norm(lin.spectrum) <= spectral_l2_norm(F) / C + 1e-12
    assert lin.imaginary_residue <= 1e-10
