"""TOML problem files.

Layout::

    [grid]            L, n
    [system]          N, rho, epsilon_relative (optional)
    [component.1]     a, b, epsilon
    [component.1.kernel]        kind, width, amplitude | samples
    [component.1.source]        kind, center, width, amplitude, width2, amplitude2 | samples
    [component.1.nonlinearity]  kind, alpha, w
    ...
    [solver]          tol, max_iter, seed, probe_pairs
    [sweep]           eps | fractions       (optional)
    [continuity]      alpha_offsets         (optional)

When ``epsilon_relative`` is given the component ``epsilon`` values are
weights: they are rescaled so that max eps equals that fraction of the
admissibility threshold.  Unknown keys are errors.  All violations found
are reported together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import tomli_w

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .experiments import scale_to_threshold
from .grid import make_grid
from .problem import (KERNEL_KINDS, NONLINEARITY_KINDS, SOURCE_KINDS, KernelSpec,
                      NonlinearitySpec, NonlinearTerm, ProblemSpec, SourceSpec)

ALLOWED = {
    "top": {"grid", "system", "component", "solver", "sweep", "continuity"},
    "grid": {"L", "n"},
    "system": {"N", "rho", "epsilon_relative"},
    "component": {"a", "b", "epsilon", "kernel", "source", "nonlinearity"},
    "kernel": {"kind", "width", "amplitude", "samples"},
    "source": {"kind", "center", "width", "amplitude", "width2", "amplitude2", "samples"},
    "nonlinearity": {"kind", "alpha", "w"},
    "solver": {"tol", "max_iter", "seed", "probe_pairs"},
    "sweep": {"eps", "fractions"},
    "continuity": {"alpha_offsets"},
}


class ProblemFileError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid problem file:\n  " + "\n  ".join(self.errors))


@dataclass
class SolverSettings:
    tol: float = 1e-12
    max_iter: int = 200
    seed: int = 0
    probe_pairs: int = 100


@dataclass
class ProblemFile:
    spec: ProblemSpec
    solver: SolverSettings = field(default_factory=SolverSettings)
    sweep_eps: list[float] | None = None
    sweep_fractions: list[float] | None = None
    alpha_offsets: list[float] | None = None


def resolve_path(path: str | Path) -> Path:
    """Path on disk, or the name of a shipped problem such as ``refproblem_n2``."""
    p = Path(path)
    if p.exists():
        return p
    name = p.name if p.suffix == ".toml" else p.name + ".toml"
    shipped = resources.files("loglap") / "problems" / name
    if shipped.is_file():
        return Path(str(shipped))
    raise FileNotFoundError(f"no such problem file: {path}")


def parse_problem(path: str | Path) -> ProblemFile:
    data = resolve_path(path).read_bytes()
    return parse_problem_text(data.decode("utf-8"))


def parse_problem_text(text: str) -> ProblemFile:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ProblemFileError([f"not valid TOML: {exc}"]) from None
    errors: list[str] = []
    _unknown(doc, "top", "", errors)

    grid_t = _table(doc, "grid", errors)
    sys_t = _table(doc, "system", errors)
    _unknown(grid_t, "grid", "grid.", errors)
    _unknown(sys_t, "system", "system.", errors)
    L = _num(grid_t, "L", "grid", errors, default=80.0)
    n = _int(grid_t, "n", "grid", errors, default=4096)
    grid = None
    try:
        grid = make_grid(L, n)
    except (ValueError, TypeError) as exc:
        errors.append(f"grid: {exc}")
    N = _int(sys_t, "N", "system", errors)
    rho = _num(sys_t, "rho", "system", errors, default=1.0)
    if not 0 < rho <= 1:
        errors.append(f"system.rho must lie in (0, 1], got {rho}")
    eps_rel = sys_t.get("epsilon_relative")

    comps = doc.get("component", {})
    if not isinstance(comps, dict):
        errors.append("component must be a table of [component.m] blocks")
        comps = {}
    if N is not None and sorted(comps) != [str(m) for m in range(1, N + 1)]:
        errors.append(f"expected blocks component.1 .. component.{N}, found {sorted(comps)}")

    a, b, eps, kernels, sources, terms = [], [], [], [], [], []
    for m in sorted(comps, key=lambda s: (len(s), s)):
        c = comps[m]
        where = f"component.{m}"
        _unknown(c, "component", where + ".", errors)
        a.append(_num(c, "a", where, errors))
        bm = _num(c, "b", where, errors)
        if bm == 0:
            errors.append(f"{where}: b = 0; drift required (the operator needs b != 0 for the Fredholm bound)")
        b.append(bm)
        e = _num(c, "epsilon", where, errors, default=0.0)
        if e is not None and e < 0:
            errors.append(f"{where}: epsilon must be nonnegative")
        eps.append(e)
        kernels.append(_kernel(c.get("kernel"), where + ".kernel", errors))
        sources.append(_source(c.get("source"), where + ".source", errors))
        terms.append(_term(c.get("nonlinearity"), where + ".nonlinearity", N, errors))

    if kernels and all(k is not None for k in kernels) and all(_kernel_zero(k) for k in kernels):
        errors.append("all kernels vanish: the aggregate kernel size must be positive")
    if grid is not None and sources and all(s is not None for s in sources):
        try:
            if not any(np.any(s.sample(grid).values) for s in sources):
                errors.append("all sources vanish: at least one source must be nontrivial")
        except ValueError as exc:
            errors.append(f"source: {exc}")
    if terms and all(t is not None for t in terms) and all(t.gradient_sup == 0 for t in terms):
        errors.append("nonlinearity is trivial: some g_m must be nonzero")

    solver_t = doc.get("solver", {})
    _unknown(solver_t, "solver", "solver.", errors)
    solver = SolverSettings(
        tol=_num(solver_t, "tol", "solver", errors, default=1e-12),
        max_iter=_int(solver_t, "max_iter", "solver", errors, default=200),
        seed=_int(solver_t, "seed", "solver", errors, default=0),
        probe_pairs=_int(solver_t, "probe_pairs", "solver", errors, default=100),
    )
    sweep_t = doc.get("sweep", {})
    _unknown(sweep_t, "sweep", "sweep.", errors)
    cont_t = doc.get("continuity", {})
    _unknown(cont_t, "continuity", "continuity.", errors)

    if errors:
        raise ProblemFileError(errors)

    spec = ProblemSpec(a=a, b=b, epsilon=eps, kernels=kernels, sources=sources,
                       nonlinearity=NonlinearitySpec(tuple(terms)), rho=rho, L=L, n=n)
    if eps_rel is not None:
        if not isinstance(eps_rel, (int, float)) or not eps_rel > 0:
            raise ProblemFileError(["system.epsilon_relative must be a positive number"])
        if max(spec.epsilon) == 0:
            raise ProblemFileError(["system.epsilon_relative needs some positive component epsilon"])
        spec = scale_to_threshold(spec, float(eps_rel))

    return ProblemFile(
        spec=spec, solver=solver,
        sweep_eps=_floats(sweep_t.get("eps")),
        sweep_fractions=_floats(sweep_t.get("fractions")),
        alpha_offsets=_floats(cont_t.get("alpha_offsets")),
    )


def dump_problem(pf: ProblemFile) -> str:
    """Serialise with resolved epsilons; parsing the result gives an equal spec."""
    s = pf.spec
    doc = {
        "grid": {"L": float(s.L), "n": int(s.n)},
        "system": {"N": s.N, "rho": float(s.rho)},
        "component": {},
        "solver": {"tol": pf.solver.tol, "max_iter": pf.solver.max_iter,
                   "seed": pf.solver.seed, "probe_pairs": pf.solver.probe_pairs},
    }
    for m in range(s.N):
        k, src, t = s.kernels[m], s.sources[m], s.nonlinearity.terms[m]
        kt = {"kind": k.kind, "amplitude": k.amplitude}
        kt.update({"samples": k.samples.tolist()} if k.kind == "samples" else {"width": k.width})
        if src.kind == "samples":
            st = {"kind": "samples", "samples": src.samples.tolist()}
        else:
            st = {"kind": src.kind, "center": src.center, "width": src.width, "amplitude": src.amplitude}
            if src.kind == "dog":
                st.update(width2=src.width2, amplitude2=src.amplitude2)
        doc["component"][str(m + 1)] = {
            "a": s.a[m], "b": s.b[m], "epsilon": s.epsilon[m],
            "kernel": kt, "source": st,
            "nonlinearity": {"kind": t.kind, "alpha": t.alpha, "w": list(t.w)},
        }
    sweep = {k: v for k, v in (("eps", pf.sweep_eps), ("fractions", pf.sweep_fractions)) if v is not None}
    if sweep:
        doc["sweep"] = sweep
    if pf.alpha_offsets is not None:
        doc["continuity"] = {"alpha_offsets": pf.alpha_offsets}
    return tomli_w.dumps(doc)


def _unknown(table, kind, prefix, errors):
    if not isinstance(table, dict):
        return
    for key in table:
        if key not in ALLOWED[kind]:
            errors.append(f"unknown key {prefix}{key!s}")


def _table(doc, name, errors):
    t = doc.get(name)
    if t is None:
        errors.append(f"missing section [{name}]")
        return {}
    if not isinstance(t, dict):
        errors.append(f"[{name}] must be a table")
        return {}
    return t


def _num(t, key, where, errors, default=None):
    v = t.get(key, default)
    if v is None:
        errors.append(f"{where}: missing {key}")
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        errors.append(f"{where}.{key}: expected a finite number, got {v!r}")
        return None
    return float(v)


def _int(t, key, where, errors, default=None):
    v = t.get(key, default)
    if v is None:
        errors.append(f"{where}: missing {key}")
        return None
    if isinstance(v, bool) or not isinstance(v, int):
        errors.append(f"{where}.{key}: expected an integer, got {v!r}")
        return None
    return v


def _floats(v):
    return None if v is None else [float(x) for x in v]


def _kind(t, where, allowed, errors):
    kind = t.get("kind")
    if kind not in allowed:
        errors.append(f"{where}.kind must be one of {list(allowed)}, got {kind!r}")
        return None
    return kind


def _kernel(t, where, errors):
    if not isinstance(t, dict):
        errors.append(f"missing table [{where}]")
        return None
    _unknown(t, "kernel", where + ".", errors)
    kind = _kind(t, where, KERNEL_KINDS, errors)
    amp = _num(t, "amplitude", where, errors, default=1.0)
    if kind is None or amp is None:
        return None
    try:
        if kind == "samples":
            return KernelSpec("samples", amplitude=amp, samples=_floats(t.get("samples", [])))
        return KernelSpec(kind, width=_num(t, "width", where, errors, default=1.0), amplitude=amp)
    except (ValueError, TypeError) as exc:
        errors.append(f"{where}: {exc}")
        return None


def _kernel_zero(k: KernelSpec) -> bool:
    return k.amplitude == 0 or (k.kind == "samples" and not np.any(k.samples))


def _source(t, where, errors):
    if not isinstance(t, dict):
        errors.append(f"missing table [{where}]")
        return None
    _unknown(t, "source", where + ".", errors)
    kind = _kind(t, where, SOURCE_KINDS, errors)
    if kind is None:
        return None
    try:
        if kind == "samples":
            return SourceSpec("samples", samples=_floats(t.get("samples", [])))
        kw = {k: _num(t, k, where, errors, default=d) for k, d in
              (("center", 0.0), ("width", 1.0), ("amplitude", 1.0), ("width2", 2.0), ("amplitude2", 0.5))}
        return SourceSpec(kind, **kw)
    except (ValueError, TypeError) as exc:
        errors.append(f"{where}: {exc}")
        return None


def _term(t, where, N, errors):
    if not isinstance(t, dict):
        errors.append(f"missing table [{where}]")
        return None
    _unknown(t, "nonlinearity", where + ".", errors)
    kind = _kind(t, where, NONLINEARITY_KINDS, errors)
    alpha = _num(t, "alpha", where, errors)
    w = t.get("w")
    if not isinstance(w, list) or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in w):
        errors.append(f"{where}.w must be a list of numbers")
        return None
    if N is not None and len(w) != N:
        errors.append(f"{where}.w has length {len(w)}, expected N={N}")
        return None
    if kind is None or alpha is None:
        return None
    return NonlinearTerm(kind, alpha, tuple(float(c) for c in w))
