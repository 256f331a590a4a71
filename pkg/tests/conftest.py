import numpy as np
import pytest

from loglap.fixedpoint import picard_solve
from loglap.grid import make_grid
from loglap.linear import solve_linear
from loglap.problemfile import parse_problem

_acceptance_key = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def ref_file():
    return parse_problem("refproblem_n2")


@pytest.fixture(scope="session")
def ref_spec(ref_file):
    return ref_file.spec


@pytest.fixture(scope="session")
def ref_grid(ref_spec):
    return ref_spec.grid()


@pytest.fixture(scope="session")
def ref_linear(ref_spec, ref_grid):
    return solve_linear(ref_spec, ref_grid)


@pytest.fixture(scope="session")
def ref_solution(ref_spec, ref_grid, ref_linear):
    return picard_solve(ref_spec, ref_grid, tol=1e-12, max_iter=200, linear=ref_linear)


@pytest.fixture
def grid():
    return make_grid(80.0, 4096)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    config.stash[_acceptance_key] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if item.get_closest_marker("acceptance") and rep.when == "call":
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        detail = "; ".join(f"{k}={v}" for k, v in item.user_properties)
        item.config.stash[_acceptance_key].append((doc, rep.outcome, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = config.stash.get(_acceptance_key, [])
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for doc, outcome, detail in rows:
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{mark}] {doc}" + (f"  ({detail})" if detail else ""))
