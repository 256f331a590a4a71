"""Picard iteration for the perturbation ``u_p`` and its certification.

For a given v the map T returns the solution u of

    L_{a_m,b_m} u_m = eps_m * (K_m * g_m(u0 + v)),

i.e. ``u_hat_m = eps_m sqrt(2 pi) K_hat_m G_hat_m / lambda_m`` with
``G_m = g_m(u0 + v)``.  Under the admissibility condition on eps the map
sends B_rho into itself with Lipschitz constant sigma = eps M K / C < 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .grid import (SQRT_2PI, Grid, SpectralField, VectorField, edge_amplitude,
                   forward_transform, inverse_transform, l2_norm)
from .linear import (LinearSolution, ZERO_MODE_RTOL, ZeroModeError, divide_by_symbol,
                     resolved_mask, solve_linear, symbol_table)
from .problem import (ContractionConstants, NonlinearitySpec, ProblemSpec,
                      contraction_constants, eval_nonlinearity)

# slack on sigma for quadrature effects in the contraction and rate checks
CONTRACTION_SLACK = 1.01
# successive differences below this are in the round-off floor and carry no rate information
RATE_FLOOR = 1e-13


@dataclass(frozen=True, eq=False)
class FixedPointMap:
    """T_g with the spectral multiplier eps_m sqrt(2 pi) K_hat_m / lambda_m precomputed."""

    grid: Grid
    u0: VectorField
    nonlinearity: NonlinearitySpec
    multiplier: np.ndarray

    @classmethod
    def build(cls, spec: ProblemSpec, grid: Grid, u0: VectorField,
              nonlinearity: NonlinearitySpec | None = None) -> "FixedPointMap":
        if u0.grid != grid:
            raise ValueError("u0 is not on the problem grid")
        K_hat = np.stack([forward_transform(k).coeffs for k in spec.kernel_fields(grid)])
        eps = np.asarray(spec.epsilon)[:, None]
        mult = divide_by_symbol(eps * SQRT_2PI * K_hat, symbol_table(spec, grid), grid)
        return cls(grid, u0, nonlinearity or spec.nonlinearity, mult)

    def __call__(self, v: VectorField) -> VectorField:
        if v.grid != self.grid:
            raise ValueError("v is not on the problem grid")
        G = eval_nonlinearity(self.nonlinearity, self.u0 + v)
        U = self.multiplier * forward_transform(G).coeffs
        return inverse_transform(SpectralField(self.grid, U))


def apply_T(spec: ProblemSpec, grid: Grid, u0: VectorField, v: VectorField,
            nonlinearity: NonlinearitySpec | None = None) -> VectorField:
    return FixedPointMap.build(spec, grid, u0, nonlinearity)(v)


@dataclass(frozen=True)
class ResidualReport:
    relative: float
    per_component: tuple[float, ...]
    zero_mode_defect: tuple[float, ...]
    reference_scale: float


@dataclass(frozen=True, eq=False)
class SolveReport:
    u0: VectorField
    u_p: VectorField
    u_cumulative: VectorField
    iterations: int
    converged: bool
    diff_norms: list[float]
    empirical_rates: list[float]
    sigma: float
    certified: bool
    constants: ContractionConstants
    residual: ResidualReport | None
    edge_amplitude: float = 0.0
    notes: list[str] = field(default_factory=list)

    @property
    def up_norm(self) -> float:
        return l2_norm(self.u_p)

    def fitted_rate(self) -> float:
        """Least-squares geometric rate from log diff norms above the round-off floor."""
        d = np.asarray(self.diff_norms)
        d = d[d > RATE_FLOOR]
        if d.size < 2:
            return 0.0
        slope = np.polyfit(np.arange(d.size), np.log(d), 1)[0]
        return float(math.exp(slope))


@dataclass(frozen=True)
class ContractionProbeReport:
    pairs: int
    max_ratio: float
    sigma: float
    seed: int

    @property
    def passed(self) -> bool:
        return self.max_ratio <= self.sigma * CONTRACTION_SLACK


def residual(spec: ProblemSpec, grid: Grid, u: VectorField,
             nonlinearity: NonlinearitySpec | None = None) -> ResidualReport:
    """Relative residual of the full system over the k != 0 modes.

    R_m = L_m u_m - f_m - eps_m (K_m * g_m(u)); the k = 0 equation cannot be
    evaluated (the symbol is singular) and its right side is reported as the
    zero-mode defect instead.
    """
    nl = nonlinearity or spec.nonlinearity
    U = forward_transform(u).coeffs
    scale = float(np.max(np.abs(U))) if U.size else 0.0
    if scale > 0 and np.any(np.abs(U[:, 0]) > ZERO_MODE_RTOL * scale):
        raise ZeroModeError("zero-mode not representable: u has a nonzero mean")
    F = forward_transform(spec.source_field(grid)).coeffs
    K_hat = np.stack([forward_transform(k).coeffs for k in spec.kernel_fields(grid)])
    G_hat = forward_transform(eval_nonlinearity(nl, u)).coeffs
    integral = np.asarray(spec.epsilon)[:, None] * SQRT_2PI * K_hat * G_hat
    R = symbol_table(spec, grid) * U - F - integral

    nz = np.ones(grid.n, dtype=bool)
    nz[0] = False
    dp = grid.dp
    per = [math.sqrt(dp * float(np.sum(np.abs(r[nz]) ** 2))) for r in R]
    ref = math.sqrt(dp * float(np.sum(np.abs(F[:, nz]) ** 2))) \
        + math.sqrt(dp * float(np.sum(np.abs(integral[:, nz]) ** 2)))
    if ref == 0:
        raise ValueError("trivial problem: zero reference scale")
    total = math.sqrt(sum(r * r for r in per))
    return ResidualReport(
        relative=total / ref,
        per_component=tuple(r / ref for r in per),
        zero_mode_defect=tuple(float(v) for v in np.abs(F[:, 0] + integral[:, 0])),
        reference_scale=ref,
    )


def random_ball_field(grid: Grid, N: int, rho: float, rng: np.random.Generator,
                      radius: float | None = None) -> VectorField:
    """Smooth zero-mean random field with norm ``radius`` (uniform in (0, rho] if None).

    White noise is filtered by exp(-(p/p0)^2) with a random cutoff p0, and
    the k = 0 and Nyquist bins are removed.
    """
    noise = rng.standard_normal((N, grid.n))
    p0 = rng.uniform(0.5, 5.0)
    C = forward_transform(VectorField(grid, noise)).coeffs * np.exp(-(grid.p / p0) ** 2)
    C[:, ~resolved_mask(grid)] = 0.0
    v = inverse_transform(SpectralField(grid, C))
    r = rho * rng.uniform(0.0, 1.0) if radius is None else radius
    norm = l2_norm(v)
    return v * (r / norm) if norm > 0 else v


def picard_solve(spec: ProblemSpec, grid: Grid | None = None, tol: float = 1e-12,
                 max_iter: int = 200, initial: VectorField | None = None,
                 linear: LinearSolution | None = None,
                 nonlinearity: NonlinearitySpec | None = None) -> SolveReport:
    """Iterate u^{k+1} = T(u^k) from u^0 = 0 (or ``initial``) until the step is below tol."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    grid = grid or spec.grid()
    nl = nonlinearity or spec.nonlinearity
    lin = linear or solve_linear(spec, grid)
    u0 = lin.u0
    const = contraction_constants(replace(spec, nonlinearity=nl), l2_norm(u0), grid)
    T = FixedPointMap.build(spec, grid, u0, nl)

    u = initial if initial is not None else VectorField.zeros(grid, spec.N)
    diffs: list[float] = []
    converged = False
    for _ in range(max_iter):
        u_new = T(u)
        d = l2_norm(u_new - u)
        diffs.append(d)
        u = u_new
        if d <= tol:
            converged = True
            break

    rates = [diffs[k + 1] / diffs[k] for k in range(len(diffs) - 1) if diffs[k] > 0]
    informative = [diffs[k + 1] / diffs[k] for k in range(len(diffs) - 1) if diffs[k] > RATE_FLOOR]
    rates_ok = all(r <= const.sigma * CONTRACTION_SLACK for r in informative)
    notes = []
    if not converged:
        notes.append(f"no convergence in {max_iter} iterations; last step {diffs[-1]:.3e}")
    if not const.admissible:
        notes.append("epsilon outside the admissible range; convergence is empirical only")
    if not rates_ok:
        notes.append("observed rate exceeded sigma")

    cumulative = u0 + u
    try:
        res = residual(spec, grid, cumulative, nl)
    except ValueError as exc:
        res = None
        notes.append(f"residual unavailable: {exc}")
    return SolveReport(
        u0=u0, u_p=u, u_cumulative=cumulative, iterations=len(diffs), converged=converged,
        diff_norms=diffs, empirical_rates=rates, sigma=const.sigma,
        certified=converged and const.admissible and rates_ok,
        constants=const,
        residual=res,
        edge_amplitude=edge_amplitude(cumulative),
        notes=notes,
    )


def verify_contraction(spec: ProblemSpec, grid: Grid, u0: VectorField, pairs: int = 100,
                       seed: int = 0) -> ContractionProbeReport:
    """Largest observed ||T v1 - T v2|| / ||v1 - v2|| over random pairs in B_rho."""
    if pairs < 1:
        raise ValueError("pairs must be at least 1")
    const = contraction_constants(spec, l2_norm(u0), grid)
    T = FixedPointMap.build(spec, grid, u0)
    rng = np.random.default_rng(seed)
    worst, used = 0.0, 0
    for _ in range(pairs):
        v1 = random_ball_field(grid, spec.N, spec.rho, rng)
        v2 = random_ball_field(grid, spec.N, spec.rho, rng)
        ratio = lipschitz_ratio(T, v1, v2)
        if ratio is None:
            continue
        used += 1
        worst = max(worst, ratio)
    return ContractionProbeReport(pairs=used, max_ratio=worst, sigma=const.sigma, seed=seed)


def lipschitz_ratio(T: FixedPointMap, v1: VectorField, v2: VectorField) -> float | None:
    """||T v1 - T v2|| / ||v1 - v2||, or None for a degenerate pair."""
    gap = l2_norm(v1 - v2)
    if gap == 0:
        return None
    return l2_norm(T(v1) - T(v2)) / gap
