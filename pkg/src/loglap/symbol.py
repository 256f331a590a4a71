"""Fourier symbol of ``L_{a,b} = (1/2) ln(-d^2/dx^2) - b d/dx - a`` and its lower bound.

With ``t = ln p`` the squared modulus is

    phi(t) = (t - a)^2 + b^2 exp(2 t),

which is strictly convex in ``t``.  The bound C = inf |lambda| is found by a
log-spaced scan followed by golden-section search on every discrete local
minimum, then a few Newton steps on the stationarity condition
``t - a + b^2 exp(2 t) = 0``.  Newton is needed because golden section
compares function values and so cannot place the minimiser closer than
about sqrt(machine eps).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

SCAN_WINDOW = (1e-12, 1e12)
SCAN_POINTS = 2048


@dataclass(frozen=True)
class SymbolParams:
    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("symbol parameters must be finite")


@dataclass(frozen=True)
class BoundResult:
    C: float
    p_star: float
    iterations: int
    stationarity_defect: float
    interior: bool


def symbol(params: SymbolParams, p):
    """lambda(p) = ln(|p| / e^a) - i b p; scalar or array input."""
    p_arr = np.asarray(p, dtype=float)
    if np.any(p_arr == 0):
        raise ValueError("symbol singular at zero frequency")
    out = (np.log(np.abs(p_arr)) - params.a) - 1j * params.b * p_arr
    return complex(out) if out.ndim == 0 else out


def modulus(params: SymbolParams, p):
    p_arr = np.abs(np.asarray(p, dtype=float))
    if np.any(p_arr == 0):
        raise ValueError("symbol singular at zero frequency")
    out = np.hypot(np.log(p_arr) - params.a, params.b * p_arr)
    return float(out) if out.ndim == 0 else out


def _phi_log(params: SymbolParams, t):
    # squared modulus as a function of t = ln p
    return (t - params.a) ** 2 + params.b**2 * np.exp(2.0 * t)


def stationarity_defect(params: SymbolParams, p: float) -> float:
    """|ln p - a + b^2 p^2|, i.e. half of d phi / d(ln p)."""
    return abs(math.log(p) - params.a + params.b**2 * p * p)


def golden_section(f: Callable[[float], float], lo: float, hi: float, rtol: float = 1e-12,
                   max_iter: int = 500) -> tuple[float, int]:
    """Minimise a unimodal ``f`` on [lo, hi]; returns (argmin, iterations).

    Stops once the bracket width falls below ``rtol * max(1, |centre|)``.
    """
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while b - a > rtol * max(1.0, abs(0.5 * (a + b))) and it < max_iter:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        it += 1
    return (c if fc < fd else d), it


def _newton_polish(params: SymbolParams, t: float, lo: float, hi: float, steps: int = 8):
    # root of psi(t) = t - a + b^2 e^{2t}; psi is strictly increasing
    b2 = params.b**2
    it = 0
    for _ in range(steps):
        e2t = math.exp(2.0 * t)
        psi = t - params.a + b2 * e2t
        if psi == 0.0:
            break
        t_new = t - psi / (1.0 + 2.0 * b2 * e2t)
        if not lo <= t_new <= hi:
            break
        it += 1
        if t_new == t:
            break
        t = t_new
    return t, it


def lower_bound(params: SymbolParams, window: tuple[float, float] = SCAN_WINDOW,
                points: int = SCAN_POINTS) -> BoundResult:
    """C = inf_p |lambda(p)| with its minimiser."""
    if params.b == 0:
        raise ValueError("drift required for Fredholm bound: b = 0 gives inf |lambda| = 0")

    t = np.linspace(math.log(window[0]), math.log(window[1]), points)
    phi = _phi_log(params, t)
    interior = [i for i in range(1, points - 1) if phi[i] <= phi[i - 1] and phi[i] <= phi[i + 1]]
    if not interior:
        i = int(np.argmin(phi))
        t_star = float(t[i])
        p_star = math.exp(t_star)
        return BoundResult(math.sqrt(float(phi[i])), p_star, 0,
                           stationarity_defect(params, p_star), interior=False)

    f = lambda s: float(_phi_log(params, s))  # noqa: E731
    best_t, best_val, total_it = None, math.inf, 0
    for i in interior:
        lo, hi = float(t[i - 1]), float(t[i + 1])
        s, it = golden_section(f, lo, hi)
        s, it_n = _newton_polish(params, s, lo, hi)
        total_it += it + it_n
        val = f(s)
        if val < best_val:
            best_t, best_val = s, val

    p_star = math.exp(best_t)
    return BoundResult(math.sqrt(best_val), p_star, total_it,
                       stationarity_defect(params, p_star), interior=True)


def system_lower_bound(all_params: Sequence[SymbolParams]) -> float:
    """Single constant valid for every component: min over m of C_m."""
    if len(all_params) == 0:
        raise ValueError("need at least one component")
    return min(lower_bound(p).C for p in all_params)
