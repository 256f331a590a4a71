"""Linear system ``L_{a_m,b_m} u_m = f_m`` solved by division by the symbol.

Two bins carry no equation.  At k = 0 the symbol is -infinity, so the
limit value 0 is assigned and |f_hat_m(0)| is reported as the zero-mode
defect.  The Nyquist bin has no partner frequency, and the odd drift part
of the symbol has no real representation there, so it is also set to 0.
For the smooth data used here both coefficients of f are negligible.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .grid import (Grid, RealField, SpectralField, VectorField, forward_transform,
                   imaginary_residue, inverse_transform)
from .problem import ProblemSpec
from .symbol import SymbolParams

ZERO_MODE_RTOL = 1e-10


class ZeroModeError(ValueError):
    pass


def resolved_mask(grid: Grid) -> np.ndarray:
    """True on every bin where the symbol is applied (all but k=0 and Nyquist)."""
    mask = np.ones(grid.n, dtype=bool)
    mask[0] = False
    mask[grid.nyquist_index] = False
    return mask


def symbol_on_grid(params: SymbolParams, grid: Grid) -> np.ndarray:
    """lambda(p_k) on resolved bins; 0 is stored on the two unresolved bins."""
    mask = resolved_mask(grid)
    p = grid.p[mask]
    lam = np.zeros(grid.n, dtype=complex)
    lam[mask] = (np.log(np.abs(p)) - params.a) - 1j * params.b * p
    return lam


def symbol_table(spec: ProblemSpec, grid: Grid) -> np.ndarray:
    """Shape (N, n) table of symbols for every component."""
    return np.stack([symbol_on_grid(sp, grid) for sp in spec.symbol_params()])


def divide_by_symbol(F: np.ndarray, lam: np.ndarray, grid: Grid) -> np.ndarray:
    mask = resolved_mask(grid)
    out = np.zeros(np.broadcast_shapes(F.shape, lam.shape), dtype=complex)
    out[..., mask] = F[..., mask] / lam[..., mask]
    return out


@dataclass(frozen=True, eq=False)
class LinearSolution:
    u0: VectorField
    zero_mode_defect: tuple[float, ...]
    spectrum: SpectralField

    @property
    def imaginary_residue(self) -> float:
        return imaginary_residue(self.spectrum)


def solve_linear(spec: ProblemSpec, grid: Grid | None = None) -> LinearSolution:
    grid = grid or spec.grid()
    f = spec.source_field(grid)
    if not np.any(f.values):
        warnings.warn("all sources vanish: u0 is identically zero", RuntimeWarning, stacklevel=2)
    F = forward_transform(f)
    U = divide_by_symbol(F.coeffs, symbol_table(spec, grid), grid)
    spectrum = SpectralField(grid, U)
    return LinearSolution(
        u0=inverse_transform(spectrum),
        zero_mode_defect=tuple(float(v) for v in np.abs(F.coeffs[:, 0])),
        spectrum=spectrum,
    )


def apply_operator(spec: ProblemSpec, m: int, u_m: RealField) -> RealField:
    """L_{a_m,b_m} applied spectrally to one component."""
    grid = u_m.grid
    U = forward_transform(u_m).coeffs
    scale = float(np.max(np.abs(U)))
    if scale > 0 and abs(U[0]) > ZERO_MODE_RTOL * scale:
        raise ZeroModeError(f"zero-mode not representable: |u_hat(0)| = {abs(U[0]):.3e}")
    out = symbol_on_grid(spec.symbol_params()[m], grid) * U
    return inverse_transform(SpectralField(grid, out))
