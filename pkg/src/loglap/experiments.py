"""Continuity of the solution in the nonlinearity, and its dependence on epsilon."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fixedpoint import CONTRACTION_SLACK, picard_solve
from .grid import Grid, l2_norm
from .linear import solve_linear
from .problem import THRESHOLD_RTOL, NonlinearitySpec, ProblemSpec, contraction_constants

MONOTONE_ATOL = 1e-12
TREND_RTOL = 0.2


class InadmissibleEpsilonError(ValueError):
    pass


def grad_distance(g1: NonlinearitySpec, g2: NonlinearitySpec) -> float:
    """sum_m sup_z |grad g1_m(z) - grad g2_m(z)| for same-family, same-w pairs.

    With equal w the difference of gradients is (alpha1 - alpha2) d(w.z) w
    where d is sech^2 or cos, whose sup is 1, so the value is exact.
    """
    if g1.N != g2.N:
        raise ValueError("nonlinearities have different component counts")
    if g1.family is None or g1.family != g2.family:
        raise ValueError("mixed-family pair: gradient distance would only be an estimate")
    total = 0.0
    for m, (t1, t2) in enumerate(zip(g1.terms, g2.terms)):
        if t1.w != t2.w:
            raise ValueError(f"component {m + 1}: w differs, gradient distance not exact")
        total += abs(t1.alpha - t2.alpha) * math.sqrt(sum(c * c for c in t1.w))
    return total


@dataclass(frozen=True)
class ContinuityReport:
    grad_distance: float
    solution_distance: float
    distance_bound: float
    sigma1: float
    sigma2: float
    admissible: bool
    converged: bool

    @property
    def passed(self) -> bool:
        return self.solution_distance <= self.distance_bound * CONTRACTION_SLACK

    def row(self) -> dict:
        return {"grad_distance": self.grad_distance, "solution_distance": self.solution_distance,
                "bound": self.distance_bound}


def continuity_experiment(spec: ProblemSpec, g1: NonlinearitySpec, g2: NonlinearitySpec,
                          tol: float = 1e-12, max_iter: int = 200,
                          grid: Grid | None = None) -> ContinuityReport:
    """Solve with g1 and g2 and compare with

        ||u1 - u2|| <= eps / (1 - sigma) * K / C * (||u0|| + 1) * ||grad g1 - grad g2||,

    taking sigma as the larger of the two contraction factors.
    """
    dist_g = grad_distance(g1, g2)
    grid = grid or spec.grid()
    lin = solve_linear(spec, grid)
    r1 = picard_solve(spec, grid, tol, max_iter, linear=lin, nonlinearity=g1)
    r2 = picard_solve(spec, grid, tol, max_iter, linear=lin, nonlinearity=g2)
    c1, c2 = r1.constants, r2.constants
    sigma = max(c1.sigma, c2.sigma)
    bound = c1.epsilon / (1.0 - sigma) * c1.K / c1.C * (c1.u0_norm + 1.0) * dist_g if sigma < 1 else math.inf
    return ContinuityReport(
        grad_distance=dist_g,
        solution_distance=l2_norm(r1.u_cumulative - r2.u_cumulative),
        distance_bound=bound,
        sigma1=c1.sigma,
        sigma2=c2.sigma,
        admissible=c1.admissible and c2.admissible,
        converged=r1.converged and r2.converged,
    )


def shifted_alphas(nl: NonlinearitySpec, offset: float) -> NonlinearitySpec:
    """Same family and w, every alpha_m reduced by ``offset``."""
    return nl.with_alphas([t.alpha - offset for t in nl.terms])


@dataclass(frozen=True)
class SweepReport:
    eps: list[float]
    up_norms: list[float]
    bounds: list[float]
    included: list[bool]
    converged: list[bool]
    threshold: float
    slope: float
    fit_residual: float

    @property
    def bounds_hold(self) -> bool:
        return all(u <= b * CONTRACTION_SLACK for u, b, inc in zip(self.up_norms, self.bounds, self.included) if inc)

    @property
    def monotone(self) -> bool:
        pts = sorted((e, u) for e, u, inc in zip(self.eps, self.up_norms, self.included) if inc)
        return all(u2 >= u1 - MONOTONE_ATOL for (_, u1), (_, u2) in zip(pts, pts[1:]))

    @property
    def trend_ok(self) -> bool:
        n_inc = sum(self.included)
        if n_inc < 2:
            return True
        peak = max(u for u, inc in zip(self.up_norms, self.included) if inc)
        return self.slope > 0 and self.fit_residual <= TREND_RTOL * peak

    @property
    def passed(self) -> bool:
        conv = all(c for c, inc in zip(self.converged, self.included) if inc)
        return conv and self.bounds_hold and self.monotone and self.trend_ok

    def rows(self) -> list[dict]:
        return [{"eps": e, "up_norm": u, "bound": b} for e, u, b in zip(self.eps, self.up_norms, self.bounds)]


def epsilon_sweep(spec: ProblemSpec, eps_values: Sequence[float], tol: float = 1e-12,
                  max_iter: int = 200, override: bool = False,
                  grid: Grid | None = None) -> SweepReport:
    """Solve at each eps (the ratios eps_m / eps are kept) and check the a-priori bound.

    Points above the admissibility threshold are refused unless ``override``
    is set, in which case they are solved but left out of pass/fail.
    """
    eps_values = [float(e) for e in eps_values]
    if not eps_values:
        raise ValueError("empty epsilon list")
    if any(e <= 0 for e in eps_values):
        raise ValueError("epsilon values must be positive")
    grid = grid or spec.grid()
    lin = solve_linear(spec, grid)
    base = contraction_constants(spec, l2_norm(lin.u0), grid)
    limit = base.threshold * (1 + THRESHOLD_RTOL)
    above = [e for e in eps_values if e > limit]
    if above and not override:
        raise InadmissibleEpsilonError(
            f"epsilon {above[0]!r} exceeds the admissibility threshold "
            f"rho*C/(M*K*(|u0|+1)) = {base.threshold!r}; pass --override-eps to run it uncertified")

    norms, bounds, included, converged = [], [], [], []
    for e in eps_values:
        rep = picard_solve(spec.with_epsilon_max(e), grid, tol, max_iter, linear=lin)
        norms.append(rep.up_norm)
        bounds.append(e * base.M * base.K * (base.u0_norm + 1.0) / base.C)
        included.append(e <= limit)
        converged.append(rep.converged)

    slope, fit_res = math.nan, 0.0
    xs = np.array([e for e, inc in zip(eps_values, included) if inc])
    ys = np.array([u for u, inc in zip(norms, included) if inc])
    if xs.size >= 2 and np.ptp(xs) > 0:
        slope, icpt = np.polyfit(xs, ys, 1)
        fit_res = float(np.max(np.abs(ys - (slope * xs + icpt))))
        slope = float(slope)
    return SweepReport(eps_values, norms, bounds, included, converged, base.threshold, slope, fit_res)


def sweep_fractions(spec: ProblemSpec, fractions: Sequence[float], grid: Grid | None = None) -> list[float]:
    """Absolute eps values for the given fractions of the admissibility threshold."""
    grid = grid or spec.grid()
    lin = solve_linear(spec, grid)
    theta = contraction_constants(spec, l2_norm(lin.u0), grid).threshold
    return [f * theta for f in fractions]


def scale_to_threshold(spec: ProblemSpec, fraction: float, grid: Grid | None = None) -> ProblemSpec:
    """Rescale eps_m (keeping their ratios) so that max eps = fraction * threshold."""
    return spec.with_epsilon_max(sweep_fractions(spec, [fraction], grid)[0])

