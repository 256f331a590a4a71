"""Run every experiment on a shipped problem and print a summary table.

    python3 scripts/run_reference.py [refproblem_n2]
"""

import argparse

from loglap.experiments import continuity_experiment, epsilon_sweep, shifted_alphas, sweep_fractions
from loglap.fixedpoint import picard_solve, verify_contraction
from loglap.problemfile import parse_problem


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("problem", nargs="?", default="refproblem_n2")
    args = ap.parse_args()

    pf = parse_problem(args.problem)
    spec, grid = pf.spec, pf.spec.grid()
    rep = picard_solve(spec, grid, pf.solver.tol, pf.solver.max_iter)
    c = rep.constants
    print(f"{args.problem}: N={spec.N} L={grid.L:g} n={grid.n}")
    for key in ("C", "K", "M", "epsilon", "sigma", "threshold", "u0_norm"):
        print(f"  {key:<10} {getattr(c, key):.17g}")

    print(f"\npicard: {rep.iterations} iterations, certified={rep.certified}, "
          f"fitted rate {rep.fitted_rate():.4f}, residual {rep.residual.relative:.2e}, "
          f"|u_p| {rep.up_norm:.6f} (bound {c.up_bound:.6f})")
    for k, (d, r) in enumerate(zip(rep.diff_norms, [float("nan")] + rep.empirical_rates), 1):
        print(f"  {k:3d}  {d:.3e}  {r:.4f}")

    probe = verify_contraction(spec, grid, rep.u0, pf.solver.probe_pairs, pf.solver.seed)
    print(f"\ncontraction probe: {probe.pairs} pairs, max ratio {probe.max_ratio:.4f} vs sigma {probe.sigma:.4f}")

    sweep = epsilon_sweep(spec, sweep_fractions(spec, pf.sweep_fractions or [1, 0.5, 0.25, 0.125], grid),
                          pf.solver.tol, pf.solver.max_iter, grid=grid)
    print("\nepsilon sweep:            eps        |u_p|        bound")
    for row in sweep.rows():
        print(f"  {row['eps']:22.6e} {row['up_norm']:12.6f} {row['bound']:12.6f}")

    print("\ncontinuity:  offset   grad dist   sol dist     bound")
    for off in pf.alpha_offsets or [0.05, 0.01]:
        cr = continuity_experiment(spec, spec.nonlinearity, shifted_alphas(spec.nonlinearity, off),
                                   pf.solver.tol, pf.solver.max_iter, grid)
        print(f"  {off:16.3f} {cr.grad_distance:11.4f} {cr.solution_distance:10.3e} {cr.distance_bound:9.3e}")


if __name__ == "__main__":
    main()
