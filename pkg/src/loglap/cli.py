"""Command-line driver.

Exit status: 0 when every check passes, 1 when a certification or bound
check fails, 2 on usage, parse or admissibility errors.  Diagnostics go to
stderr; data go to files in ``--out``.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .experiments import (InadmissibleEpsilonError, continuity_experiment, epsilon_sweep,
                          shifted_alphas, sweep_fractions)
from .fixedpoint import picard_solve, residual, verify_contraction
from .grid import SpectralField, VectorField, forward_transform, l2_norm, spectral_l2_norm
from .linear import solve_linear
from .problem import AssumptionError, contraction_constants
from .problemfile import ProblemFile, ProblemFileError, parse_problem, resolve_path

log = logging.getLogger("loglap")

COMMANDS = ("constants", "solve-linear", "solve", "contraction-probe", "sweep-eps", "continuity", "residual")
RESIDUAL_TOL = 1e-8
DEFAULT_FRACTIONS = [1.0, 0.5, 0.25, 0.125]
DEFAULT_OFFSETS = [0.05, 0.01]


class UsageError(Exception):
    pass


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(v)
    return format(float(v), ".17g")


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def read_solution(path: Path, N: int, n: int) -> np.ndarray:
    """Cumulative solution columns u_1..u_N from a solution CSV (or u0_m for a linear dump)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if len(body) != n:
        raise UsageError(f"{path}: {len(body)} rows, grid has {n} nodes")
    cols = []
    for m in range(1, N + 1):
        for name in (f"u_{m}", f"u0_{m}"):
            if name in header:
                cols.append(header.index(name))
                break
        else:
            raise UsageError(f"{path}: no column u_{m}")
    return np.array([[float(r[c]) for r in body] for c in cols])


class Bundle:
    def __init__(self, out: Path, command: str, problem_bytes: bytes, seed: int):
        self.out = out
        out.mkdir(parents=True, exist_ok=True)
        self.manifest = {
            "command": command,
            "input_sha256": hashlib.sha256(problem_bytes).hexdigest(),
            "seed": seed,
            "version": __version__,
        }

    def constants(self, const) -> None:
        self.manifest["constants"] = {
            "C": const.C, "K": const.K, "M": const.M, "epsilon": const.epsilon, "sigma": const.sigma,
            "threshold": const.threshold, "u0_norm": const.u0_norm, "admissible": const.admissible,
        }

    def csv(self, name: str, header, rows) -> None:
        write_csv(self.out / name, header, rows)

    def close(self, status: int) -> int:
        self.manifest["exit_status"] = status
        with open(self.out / "manifest.json", "w") as fh:
            json.dump(self.manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return status


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="loglap", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("problem", help="problem file, or a shipped name such as refproblem_n2")
    ap.add_argument("--out", type=Path, default=Path("loglap-out"), help="output directory")
    ap.add_argument("--seed", type=int, help="seed for randomised probes (overrides [solver].seed)")
    ap.add_argument("--tol", type=float, help="Picard step tolerance")
    ap.add_argument("--max-iter", type=int, help="Picard iteration cap")
    ap.add_argument("--override-eps", action="store_true",
                    help="allow epsilon above the admissibility threshold (certification off)")
    ap.add_argument("--solution", type=Path, help="solution CSV to check (residual command)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        path = resolve_path(args.problem)
        pf = parse_problem(path)
    except (FileNotFoundError, ProblemFileError, AssumptionError) as exc:
        print(f"loglap: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        pf.solver.seed = args.seed
    if args.tol is not None:
        pf.solver.tol = args.tol
    if args.max_iter is not None:
        pf.solver.max_iter = args.max_iter
    bundle = Bundle(args.out, args.command, path.read_bytes(), pf.solver.seed)
    try:
        status = HANDLERS[args.command](pf, bundle, args)
    except (InadmissibleEpsilonError, UsageError, AssumptionError) as exc:
        print(f"loglap: {exc}", file=sys.stderr)
        return bundle.close(2)
    return bundle.close(status)


def _linear(pf: ProblemFile):
    spec = pf.spec
    grid = spec.grid()
    lin = solve_linear(spec, grid)
    const = contraction_constants(spec, l2_norm(lin.u0), grid)
    return grid, lin, const


def cmd_constants(pf, bundle, args) -> int:
    _, _, const = _linear(pf)
    bundle.constants(const)
    for key in ("C", "K", "M", "epsilon", "sigma", "threshold", "u0_norm"):
        print(f"{key} = {fmt(getattr(const, key))}")
    print(f"admissible = {const.admissible}")
    return 0


def cmd_solve_linear(pf, bundle, args) -> int:
    grid, lin, const = _linear(pf)
    bundle.constants(const)
    F = forward_transform(pf.spec.source_field(grid)).coeffs
    ok = True
    for m in range(pf.spec.N):
        lhs = spectral_l2_norm(SpectralField(grid, lin.spectrum.coeffs[m]))
        rhs = spectral_l2_norm(SpectralField(grid, F[m])) / const.C
        ok &= lhs <= rhs + 1e-12
    bundle.manifest["linear"] = {"zero_mode_defect": list(lin.zero_mode_defect),
                                 "imaginary_residue": lin.imaginary_residue, "apriori_bound_holds": ok}
    cols = ["x"] + [f"u0_{m + 1}" for m in range(pf.spec.N)]
    bundle.csv("solution.csv", cols, zip(grid.x, *lin.u0.values))
    return 0 if ok else 1


def _solve(pf, args):
    grid, lin, _ = _linear(pf)
    rep = picard_solve(pf.spec, grid, pf.solver.tol, pf.solver.max_iter, linear=lin)
    return grid, rep


def _solution_rows(grid, rep, N):
    cols = ["x"]
    data = [grid.x]
    for m in range(N):
        cols += [f"u0_{m + 1}", f"up_{m + 1}", f"u_{m + 1}"]
        data += [rep.u0.values[m], rep.u_p.values[m], rep.u_cumulative.values[m]]
    return cols, zip(*data)


def cmd_solve(pf, bundle, args) -> int:
    grid, rep = _solve(pf, args)
    bundle.constants(rep.constants)
    rates = [float("nan")] + rep.empirical_rates
    bundle.csv("iterations.csv", ["iter", "diff_norm", "rate"],
               ((k + 1, d, r) for k, (d, r) in enumerate(zip(rep.diff_norms, rates))))
    cols, rows = _solution_rows(grid, rep, pf.spec.N)
    bundle.csv("solution.csv", cols, rows)
    bundle.manifest["solve"] = {
        "iterations": rep.iterations, "converged": rep.converged, "certified": rep.certified,
        "up_norm": rep.up_norm, "fitted_rate": rep.fitted_rate(),
        "relative_residual": rep.residual.relative if rep.residual else None,
        "edge_amplitude": rep.edge_amplitude, "notes": rep.notes,
    }
    for note in rep.notes:
        log.warning(note)
    if args.override_eps:
        return 0 if rep.converged else 1
    return 0 if rep.certified else 1


def cmd_probe(pf, bundle, args) -> int:
    grid, lin, const = _linear(pf)
    bundle.constants(const)
    rep = verify_contraction(pf.spec, grid, lin.u0, pf.solver.probe_pairs, pf.solver.seed)
    bundle.csv("probe.csv", ["pairs", "max_ratio", "sigma", "passed"],
               [(rep.pairs, rep.max_ratio, rep.sigma, rep.passed)])
    bundle.manifest["probe"] = asdict(rep) | {"passed": rep.passed}
    if not const.admissible:
        log.warning("epsilon is not admissible; the probe is not a certificate")
    return 0 if rep.passed else 1


def cmd_sweep(pf, bundle, args) -> int:
    spec = pf.spec
    if pf.sweep_eps is not None:
        eps = pf.sweep_eps
    else:
        eps = sweep_fractions(spec, pf.sweep_fractions or DEFAULT_FRACTIONS)
    rep = epsilon_sweep(spec, eps, pf.solver.tol, pf.solver.max_iter, override=args.override_eps)
    _, _, const = _linear(pf)
    bundle.constants(const)
    bundle.csv("sweep.csv", ["eps", "up_norm", "bound"],
               ((r["eps"], r["up_norm"], r["bound"]) for r in rep.rows()))
    bundle.manifest["sweep"] = {"passed": rep.passed, "slope": rep.slope, "fit_residual": rep.fit_residual,
                                "included": rep.included, "threshold": rep.threshold}
    return 0 if rep.passed else 1


def cmd_continuity(pf, bundle, args) -> int:
    spec = pf.spec
    _, _, const = _linear(pf)
    bundle.constants(const)
    rows, ok = [], True
    for off in pf.alpha_offsets or DEFAULT_OFFSETS:
        g2 = shifted_alphas(spec.nonlinearity, off)
        try:
            rep = continuity_experiment(spec, spec.nonlinearity, g2, pf.solver.tol, pf.solver.max_iter)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if not rep.admissible:
            log.warning("offset %s: epsilon not admissible for both maps", off)
        ok &= rep.passed and rep.admissible and rep.converged
        rows.append(rep)
    bundle.csv("continuity.csv", ["grad_distance", "solution_distance", "bound"],
               ((r.grad_distance, r.solution_distance, r.distance_bound) for r in rows))
    bundle.manifest["continuity"] = {"passed": ok}
    return 0 if ok else 1


def cmd_residual(pf, bundle, args) -> int:
    spec = pf.spec
    grid = spec.grid()
    if args.solution is not None:
        u = VectorField(grid, read_solution(args.solution, spec.N, grid.n))
    else:
        _, rep = _solve(pf, args)
        u = rep.u_cumulative
    try:
        res = residual(spec, grid, u)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    bundle.csv("residual.csv", ["component", "relative_residual", "zero_mode_defect"],
               ((m + 1, r, z) for m, (r, z) in enumerate(zip(res.per_component, res.zero_mode_defect))))
    bundle.manifest["residual"] = {"relative": res.relative, "reference_scale": res.reference_scale,
                                   "tolerance": RESIDUAL_TOL}
    return 0 if res.relative <= RESIDUAL_TOL else 1


HANDLERS = {
    "constants": cmd_constants,
    "solve-linear": cmd_solve_linear,
    "solve": cmd_solve,
    "contraction-probe": cmd_probe,
    "sweep-eps": cmd_sweep,
    "continuity": cmd_continuity,
    "residual": cmd_residual,
}


if __name__ == "__main__":
    sys.exit(main())
