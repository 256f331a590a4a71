"""Uniform truncation of the real line and its matched Fourier lattice.

The continuous transform

    phi_hat(p) = (2 pi)^(-1/2) * integral phi(x) exp(-i p x) dx

is realised on the grid by the rectangle rule, so a spectrum computed here
is a quadrature of the continuum one and every continuum formula carries
over with its constants unchanged.  Spectral coefficients are stored in FFT
order: index k holds frequency ``grid.p[k]`` (0, dp, ..., -dp).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

SQRT_2PI = math.sqrt(2.0 * math.pi)

# fraction of nodes at each end inspected by the edge-decay check
EDGE_FRACTION = 0.05
EDGE_THRESHOLD = 1e-8


class TruncationWarning(UserWarning):
    """A field is not small at the edge of the periodic domain."""


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    """Nodes ``x_j = -L/2 + j h`` on ``[-L/2, L/2)`` and frequencies ``2 pi k / L``."""

    L: float
    n: int

    def __post_init__(self):
        if not self.L > 0 or not math.isfinite(self.L):
            raise ValueError(f"domain length must be positive, got L={self.L}")
        if self.n < 8:
            raise ValueError(f"n too small: need n >= 8, got n={self.n}")
        if self.n % 2:
            raise ValueError(f"n must be even, got n={self.n}")

    @property
    def h(self) -> float:
        return self.L / self.n

    @property
    def dp(self) -> float:
        return 2.0 * math.pi / self.L

    @cached_property
    def x(self) -> np.ndarray:
        x = -0.5 * self.L + self.h * np.arange(self.n)
        x.flags.writeable = False
        return x

    @cached_property
    def k(self) -> np.ndarray:
        k = np.fft.fftfreq(self.n, d=1.0 / self.n).astype(np.int64)
        k.flags.writeable = False
        return k

    @cached_property
    def p(self) -> np.ndarray:
        p = self.dp * self.k
        p.flags.writeable = False
        return p

    @property
    def nyquist_index(self) -> int:
        return self.n // 2

    @cached_property
    def _shift(self) -> np.ndarray:
        # exp(-i p_k x_0); x_0 = -L/2 so this is (-1)^k, computed exactly
        s = np.where(self.k % 2 == 0, 1.0, -1.0).astype(complex)
        s.flags.writeable = False
        return s

    def mirror_index(self) -> np.ndarray:
        """Index of -p_k for each k (the Nyquist bin maps to itself)."""
        return (-np.arange(self.n)) % self.n


def make_grid(L: float, n: int) -> Grid:
    return Grid(float(L), int(n))


@dataclass(frozen=True, eq=False)
class RealField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {v.shape}")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True, eq=False)
class VectorField:
    """N real components sampled on one grid; ``values`` has shape (N, n)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[None, :]
        if v.ndim != 2 or v.shape[1] != self.grid.n or v.shape[0] < 1:
            raise ValueError(f"expected shape (N, {self.grid.n}), got {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def N(self) -> int:
        return self.values.shape[0]

    def component(self, m: int) -> RealField:
        return RealField(self.grid, self.values[m])

    @classmethod
    def zeros(cls, grid: Grid, N: int) -> "VectorField":
        return cls(grid, np.zeros((N, grid.n)))

    def __add__(self, other: "VectorField") -> "VectorField":
        _check_same_grid(self.grid, other.grid)
        return VectorField(self.grid, self.values + other.values)

    def __sub__(self, other: "VectorField") -> "VectorField":
        _check_same_grid(self.grid, other.grid)
        return VectorField(self.grid, self.values - other.values)

    def __mul__(self, scalar: float) -> "VectorField":
        return VectorField(self.grid, scalar * self.values)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Coefficients in FFT order; shape (n,) for a scalar field, (N, n) for a vector."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape[-1:] != (self.grid.n,):
            raise ValueError(f"expected trailing axis {self.grid.n}, got {c.shape}")
        object.__setattr__(self, "coeffs", c)


def _check_same_grid(g1: Grid, g2: Grid) -> None:
    if g1 != g2:
        raise GridMismatchError(f"fields live on different grids: {g1} vs {g2}")


def forward_transform(f: RealField | VectorField) -> SpectralField:
    g = f.grid
    coeffs = (g.h / SQRT_2PI) * g._shift * np.fft.fft(f.values, axis=-1)
    return SpectralField(g, coeffs)


def _inverse_complex(F: SpectralField) -> np.ndarray:
    g = F.grid
    return (g.dp * g.n / SQRT_2PI) * np.fft.ifft(F.coeffs * np.conj(g._shift), axis=-1)


def inverse_transform(F: SpectralField, *, rtol: float = 1e-8) -> RealField | VectorField:
    """Back to physical space.

    A relative imaginary residue above ``rtol`` means the input was not
    conjugate symmetric; it is reported as a warning and discarded.
    """
    z = _inverse_complex(F)
    scale = np.linalg.norm(z)
    if scale > 0:
        residue = np.linalg.norm(z.imag) / scale
        if residue > rtol:
            warnings.warn(
                f"inverse transform has imaginary residue {residue:.3e} "
                "(input is not conjugate symmetric)",
                RuntimeWarning,
                stacklevel=2,
            )
    if z.ndim == 1:
        return RealField(F.grid, z.real)
    return VectorField(F.grid, z.real)


def imaginary_residue(F: SpectralField) -> float:
    """Relative size of the imaginary part left after inverting ``F``."""
    z = _inverse_complex(F)
    scale = np.linalg.norm(z)
    return float(np.linalg.norm(z.imag) / scale) if scale > 0 else 0.0


def l2_norm(u: RealField | VectorField) -> float:
    """Discrete L2(R, R^N) norm: sqrt(sum_m h sum_j u_m(x_j)^2)."""
    return math.sqrt(u.grid.h * float(np.sum(np.square(u.values))))


def spectral_l2_norm(F: SpectralField) -> float:
    return math.sqrt(F.grid.dp * float(np.sum(np.abs(F.coeffs) ** 2)))


def l1_norm(k: RealField) -> float:
    return k.grid.h * float(np.sum(np.abs(k.values)))


def edge_amplitude(f: RealField | VectorField) -> float:
    """Largest magnitude over the outermost 5% of nodes at either end."""
    n = f.grid.n
    w = max(1, int(math.ceil(EDGE_FRACTION * n)))
    v = np.atleast_2d(f.values)
    return float(max(np.max(np.abs(v[:, :w])), np.max(np.abs(v[:, -w:]))))


def convolve(k: RealField, g: RealField) -> RealField:
    """Periodic convolution ``(k * g)(x) = integral k(x - y) g(y) dy``.

    Computed as the inverse transform of sqrt(2 pi) k_hat g_hat.  The
    periodic wrap is only faithful to the line when both factors have
    decayed at the domain edge; otherwise a TruncationWarning is issued.
    """
    _check_same_grid(k.grid, g.grid)
    for name, f in (("kernel", k), ("field", g)):
        amp = edge_amplitude(f)
        if amp > EDGE_THRESHOLD:
            warnings.warn(
                f"{name} reaches {amp:.3e} near the domain edge; periodic "
                "convolution may alias",
                TruncationWarning,
                stacklevel=2,
            )
    K = forward_transform(k)
    G = forward_transform(g)
    return inverse_transform(SpectralField(k.grid, SQRT_2PI * K.coeffs * G.coeffs))


def evaluate(F: SpectralField, xs) -> np.ndarray:
    """Evaluate the trigonometric interpolant of ``F`` at arbitrary points."""
    g = F.grid
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    phase = np.exp(1j * np.outer(xs, g.p))
    return (g.dp / SQRT_2PI) * (phase @ np.asarray(F.coeffs).T).real
