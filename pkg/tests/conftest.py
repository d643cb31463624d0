import numpy as np
import pytest

from stratalloc import AllocationProblem, Stratum

# Filled by test_acceptance; echoed after the test summary so the
# per-criterion verdicts are visible in any pytest run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_random_problem(rng: np.random.Generator, K: int, frac: float) -> AllocationProblem:
    """Random instance: a ~ U(0.1, 10), b ~ U(1, 100), n = frac * sum(b)."""
    a = rng.uniform(0.1, 10.0, K)
    b = rng.uniform(1.0, 100.0, K)
    strata = tuple(
        Stratum(label=i, a=float(a[i]), b=float(b[i])) for i in range(K)
    )
    return AllocationProblem(strata=strata, n=float(frac * b.sum()))


@pytest.fixture
def problem_factory():
    return make_random_problem
