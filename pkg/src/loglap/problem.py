"""Problem instances and the scalar constants of the contraction argument.

A ``ProblemSpec`` holds, for each component m,

    L_{a_m,b_m} u_m = f_m + eps_m * (K_m * g_m(u)),

where ``K_m`` is a kernel preset, ``f_m`` a source preset and ``g_m`` a
nonlinearity from a family whose gradient bound is known in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .grid import Grid, RealField, VectorField, l1_norm, make_grid
from .symbol import SymbolParams, system_lower_bound

KERNEL_KINDS = ("gaussian", "laplace", "tophat", "samples")
SOURCE_KINDS = ("gaussian", "dog", "samples")
NONLINEARITY_KINDS = ("tanh", "sine")

# relative slack when comparing eps against the admissibility threshold
THRESHOLD_RTOL = 1e-12


class AssumptionError(ValueError):
    """The problem data violate a hypothesis of the existence theory."""


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """Kernel preset; analytic kinds have unit mass before ``amplitude``.

    ``width`` is the standard deviation (gaussian), the decay scale tau
    (laplace) or the half-width (tophat).  Gaussians are point-sampled
    (the rectangle rule is spectrally accurate for them); laplace and tophat
    kernels are cell-averaged so their discrete mass is exact despite the
    kink or jump.
    """

    kind: str
    width: float = 1.0
    amplitude: float = 1.0
    samples: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "samples":
            if self.samples is None:
                raise ValueError("sampled kernel needs samples")
            object.__setattr__(self, "samples", np.asarray(self.samples, dtype=float))
        elif not self.width > 0:
            raise ValueError(f"kernel width must be positive, got {self.width}")

    def __eq__(self, other):
        if not isinstance(other, KernelSpec):
            return NotImplemented
        return (self.kind, self.width, self.amplitude) == (other.kind, other.width, other.amplitude) \
            and _arrays_equal(self.samples, other.samples)

    @property
    def l1_exact(self) -> float | None:
        """Closed-form L1 norm on the line, or None for sampled kernels."""
        return None if self.kind == "samples" else abs(self.amplitude)

    def sample(self, grid: Grid) -> RealField:
        x, h, s = grid.x, grid.h, self.width
        if self.kind == "gaussian":
            v = np.exp(-0.5 * (x / s) ** 2) / (s * math.sqrt(2.0 * math.pi))
        elif self.kind == "laplace":
            v = _laplace_cell_average(x, h, s)
        elif self.kind == "tophat":
            overlap = np.clip(np.minimum(x + h / 2, s) - np.maximum(x - h / 2, -s), 0.0, None)
            v = overlap / (2.0 * s * h)
        else:
            if self.samples.shape != (grid.n,):
                raise ValueError(f"sampled kernel has {self.samples.size} values, grid has {grid.n}")
            return RealField(grid, self.amplitude * self.samples)
        return RealField(grid, self.amplitude * v)


def _laplace_cell_average(x, h, tau):
    # antiderivative of exp(-|y|/tau)/(2 tau) is sign(y)(1 - exp(-|y|/tau))/2
    def F(y):
        return 0.5 * np.sign(y) * (1.0 - np.exp(-np.abs(y) / tau))
    return (F(x + h / 2) - F(x - h / 2)) / h


@dataclass(frozen=True, eq=False)
class SourceSpec:
    """Source preset.

    gaussian: ``amplitude * exp(-(x - center)^2 / (2 width^2))``;
    dog: that minus ``amplitude2 * exp(-(x - center)^2 / (2 width2^2))``.
    """

    kind: str
    center: float = 0.0
    width: float = 1.0
    amplitude: float = 1.0
    width2: float = 2.0
    amplitude2: float = 0.5
    samples: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in SOURCE_KINDS:
            raise ValueError(f"unknown source kind {self.kind!r}")
        if self.kind == "samples":
            if self.samples is None:
                raise ValueError("sampled source needs samples")
            object.__setattr__(self, "samples", np.asarray(self.samples, dtype=float))
        elif not (self.width > 0 and self.width2 > 0):
            raise ValueError("source widths must be positive")

    def __eq__(self, other):
        if not isinstance(other, SourceSpec):
            return NotImplemented
        keys = ("kind", "center", "width", "amplitude", "width2", "amplitude2")
        return all(getattr(self, k) == getattr(other, k) for k in keys) \
            and _arrays_equal(self.samples, other.samples)

    def sample(self, grid: Grid) -> RealField:
        x = grid.x - self.center
        if self.kind == "gaussian":
            v = self.amplitude * np.exp(-0.5 * (x / self.width) ** 2)
        elif self.kind == "dog":
            v = self.amplitude * np.exp(-0.5 * (x / self.width) ** 2) \
                - self.amplitude2 * np.exp(-0.5 * (x / self.width2) ** 2)
        else:
            if self.samples.shape != (grid.n,):
                raise ValueError(f"sampled source has {self.samples.size} values, grid has {grid.n}")
            v = self.samples
        return RealField(grid, v)


def _arrays_equal(a, b) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return a.shape == b.shape and bool(np.array_equal(a, b))


@dataclass(frozen=True)
class NonlinearTerm:
    """g(z) = alpha * tanh(w . z) or alpha * sin(w . z) for z in R^N."""

    kind: str
    alpha: float
    w: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in NONLINEARITY_KINDS:
            raise ValueError(f"unknown nonlinearity kind {self.kind!r}")
        object.__setattr__(self, "w", tuple(float(c) for c in self.w))

    @property
    def gradient_sup(self) -> float:
        # sup_z |grad g(z)| = |alpha| |w|, attained where w.z = 0
        return abs(self.alpha) * math.sqrt(sum(c * c for c in self.w))

    def __call__(self, z: np.ndarray) -> np.ndarray:
        s = np.tensordot(np.asarray(self.w), z, axes=(0, 0))
        return self.alpha * (np.tanh(s) if self.kind == "tanh" else np.sin(s))

    def gradient(self, z: np.ndarray) -> np.ndarray:
        """Gradient at points z of shape (N, ...); returns the same shape."""
        s = np.tensordot(np.asarray(self.w), z, axes=(0, 0))
        d = 1.0 / np.cosh(s) ** 2 if self.kind == "tanh" else np.cos(s)
        return self.alpha * np.multiply.outer(np.asarray(self.w), d)


@dataclass(frozen=True)
class NonlinearitySpec:
    terms: tuple[NonlinearTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        N = len(self.terms)
        if N == 0:
            raise ValueError("nonlinearity needs at least one component")
        for m, t in enumerate(self.terms):
            if len(t.w) != N:
                raise ValueError(f"component {m + 1}: w has length {len(t.w)}, expected N={N}")

    @property
    def N(self) -> int:
        return len(self.terms)

    @property
    def family(self) -> str | None:
        kinds = {t.kind for t in self.terms}
        return kinds.pop() if len(kinds) == 1 else None

    def with_alphas(self, alphas: Sequence[float]) -> "NonlinearitySpec":
        return NonlinearitySpec(tuple(replace(t, alpha=float(a)) for t, a in zip(self.terms, alphas)))


@dataclass(frozen=True)
class ProblemSpec:
    a: tuple[float, ...]
    b: tuple[float, ...]
    epsilon: tuple[float, ...]
    kernels: tuple[KernelSpec, ...]
    sources: tuple[SourceSpec, ...]
    nonlinearity: NonlinearitySpec
    rho: float = 1.0
    L: float = 80.0
    n: int = 4096

    def __post_init__(self):
        for name in ("a", "b", "epsilon", "kernels", "sources"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        for name in ("a", "b", "epsilon"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        N = len(self.a)
        counts = {len(self.b), len(self.epsilon), len(self.kernels), len(self.sources), self.nonlinearity.N}
        if N < 1 or counts != {N}:
            raise ValueError("component counts disagree")
        if any(e < 0 for e in self.epsilon):
            raise ValueError("epsilon_m must be nonnegative")
        if not 0 < self.rho <= 1:
            raise ValueError(f"rho must lie in (0, 1], got {self.rho}")
        if any(b == 0 for b in self.b):
            m = self.b.index(0.0) + 1
            raise AssumptionError(f"component {m}: drift required, b must be nonzero")

    @property
    def N(self) -> int:
        return len(self.a)

    def grid(self) -> Grid:
        return make_grid(self.L, self.n)

    def symbol_params(self) -> list[SymbolParams]:
        return [SymbolParams(a, b) for a, b in zip(self.a, self.b)]

    def kernel_fields(self, grid: Grid | None = None) -> list[RealField]:
        grid = grid or self.grid()
        return [k.sample(grid) for k in self.kernels]

    def source_field(self, grid: Grid | None = None) -> VectorField:
        grid = grid or self.grid()
        return VectorField(grid, np.stack([s.sample(grid).values for s in self.sources]))

    def with_epsilon(self, epsilon: Sequence[float]) -> "ProblemSpec":
        return replace(self, epsilon=tuple(float(e) for e in epsilon))

    def with_epsilon_max(self, eps: float) -> "ProblemSpec":
        """Rescale all eps_m by a common factor so that max_m eps_m = eps."""
        cur = epsilon_max(self)
        if cur == 0:
            raise ValueError("cannot rescale: all eps_m are zero")
        factor = eps / cur
        return self.with_epsilon([e * factor for e in self.epsilon])


def check_assumptions(spec: ProblemSpec, grid: Grid | None = None) -> list[str]:
    """Human-readable violations of the standing hypotheses (empty if none)."""
    grid = grid or spec.grid()
    problems = []
    for m, b in enumerate(spec.b):
        if b == 0:
            problems.append(f"component {m + 1}: drift required, b must be nonzero")
    if all(l1_norm(k) == 0 for k in spec.kernel_fields(grid)):
        problems.append("all kernels vanish: aggregate kernel size must be positive")
    if not np.any(spec.source_field(grid).values):
        problems.append("all sources vanish: at least one source must be nontrivial")
    if all(t.gradient_sup == 0 for t in spec.nonlinearity.terms):
        problems.append("nonlinearity is trivial: some g_m must be nonzero")
    return problems


@dataclass(frozen=True)
class ContractionConstants:
    C: float
    K: float
    M: float
    epsilon: float
    sigma: float
    threshold: float
    u0_norm: float
    rho: float

    @property
    def admissible(self) -> bool:
        return 0 < self.epsilon <= self.threshold * (1 + THRESHOLD_RTOL)

    @property
    def up_bound(self) -> float:
        """A-priori bound eps M K (|u0| + 1) / C on the perturbation."""
        return self.sigma * (self.u0_norm + 1.0)


def epsilon_max(spec: ProblemSpec) -> float:
    return max(spec.epsilon)


def kernel_norms(spec: ProblemSpec, grid: Grid | None = None) -> list[float]:
    return [l1_norm(k) for k in spec.kernel_fields(grid)]


def kernel_aggregate(spec: ProblemSpec, grid: Grid | None = None) -> float:
    """sqrt(sum_m |K_m|_{L1}^2) using the discretised kernels."""
    total = math.sqrt(sum(v * v for v in kernel_norms(spec, grid)))
    if total == 0:
        raise AssumptionError("all kernels vanish: aggregate kernel size must be positive")
    return total


def gradient_bound(nl: NonlinearitySpec) -> float:
    return sum(t.gradient_sup for t in nl.terms)


def eval_nonlinearity(nl: NonlinearitySpec, u: VectorField) -> VectorField:
    if u.N != nl.N:
        raise ValueError(f"field has {u.N} components, nonlinearity expects {nl.N}")
    return VectorField(u.grid, np.stack([t(u.values) for t in nl.terms]))


def contraction_constants(spec: ProblemSpec, u0_norm: float, grid: Grid | None = None,
                          C: float | None = None) -> ContractionConstants:
    if u0_norm < 0:
        raise ValueError("u0_norm must be nonnegative")
    if C is None:
        C = system_lower_bound(spec.symbol_params())
    K = kernel_aggregate(spec, grid)
    M = gradient_bound(spec.nonlinearity)
    if M == 0:
        raise AssumptionError("nonlinearity is trivial: gradient bound M is zero")
    eps = epsilon_max(spec)
    sigma = eps * M * K / C
    threshold = spec.rho * C / (M * K * (u0_norm + 1.0))
    return ContractionConstants(C=C, K=K, M=M, epsilon=eps, sigma=sigma,
                                threshold=threshold, u0_norm=u0_norm, rho=spec.rho)
