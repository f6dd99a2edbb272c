from fractions import Fraction
from math import factorial

import pytest

from pantograph import Field, Problem, Profile, SolveConfig, solve


def exact_phi(lam, q, t, n_terms=60):
    """Series for phi in exact rationals, straight from the coefficient formula."""
    lam, q, t = Fraction(lam), Fraction(q), Fraction(t)
    return float(sum(lam ** n * q ** (n * (n - 1) // 2) * t ** n / factorial(n) for n in range(n_terms)))


@pytest.fixture(scope="session")
def step_profile_traj():
    """eta = 1 on [0.5, 1], F(x) = x, a = 1: the standard breakpoint-ladder case."""
    prob = Problem(0.5, 1.0, Field.linear(1.0), Profile(lambda t: 1.0, lambda t: 0.0))
    return solve(prob, 8.0)


@pytest.fixture(scope="session")
def growth_traj():
    return solve(Problem.linear(1.0, 0.5, 1.0), 20.0)


@pytest.fixture(scope="session")
def decay_traj():
    return solve(Problem.linear(-1.0, 0.5, 1.0), 40.0)


_ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""

    def check(number, title, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
