"""Linear-solve error against the free-space solution as the domain grows.

The discrete solution is the periodic one with zero mean.  For a source with
nonzero mean the free-space solution decays only like 1/(x ln^2 x), so the
two differ by O(1/(L ln L)) however fine the grid.  Spacing h is held fixed.

    python3 scripts/truncation_study.py          (needs scipy)
"""

import math

import numpy as np
from scipy.integrate import quad

from loglap.grid import SQRT_2PI, SpectralField, evaluate
from loglap.linear import solve_linear
from loglap.problem import KernelSpec, NonlinearitySpec, NonlinearTerm, ProblemSpec, SourceSpec

XS = [0.0, 1.0, 5.0, -3.0, 10.0]


def free_space(x):
    def integrand(p):
        return (np.exp(-p * p / 2 + 1j * p * x) / (math.log(abs(p)) - 1j * p)).real
    return sum(quad(integrand, lo, hi, limit=400, epsabs=1e-13)[0] for lo, hi in ((-40, 0), (0, 40))) / SQRT_2PI


def main():
    oracle = np.array([free_space(x) for x in XS])
    print("     L       n    max |err|   err * L ln L")
    for L, n in [(80, 4096), (160, 8192), (320, 16384), (640, 32768), (1280, 65536)]:
        spec = ProblemSpec(a=(0.0,), b=(1.0,), epsilon=(0.0,), kernels=(KernelSpec("gaussian"),),
                           sources=(SourceSpec("gaussian"),),
                           nonlinearity=NonlinearitySpec((NonlinearTerm("tanh", 0.5, (1.0,)),)), L=L, n=n)
        grid = spec.grid()
        lin = solve_linear(spec, grid)
        err = np.max(np.abs(evaluate(SpectralField(grid, lin.spectrum.coeffs[0]), XS) - oracle))
        print(f"{L:6d} {n:7d} {err:12.3e} {err * L * math.log(L):12.3f}")


if __name__ == "__main__":
    main()
