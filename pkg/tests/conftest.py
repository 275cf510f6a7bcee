import numpy as np
import pytest

from ftdcopula.numerics import CorrelationMatrix
from ftdcopula.pricing import BasketSpec, DiscountCurve, default_schedule
from ftdcopula.survival import CreditName

# two-sided Kolmogorov-Smirnov critical value at the 99% level
KS99 = 1.62762


def homogeneous_basket(n=5, h=0.2, recovery=0.2, maturity=5.0, step=0.5):
    names = tuple(CreditName(f"N{i + 1}", h, recovery) for i in range(n))
    return BasketSpec(names, maturity, default_schedule(maturity, step))


@pytest.fixture
def paper_basket():
    return homogeneous_basket()


@pytest.fixture
def paper_sigma():
    return CorrelationMatrix.uniform(5, 0.1)


@pytest.fixture
def curve():
    return DiscountCurve(0.05)


def random_correlation(rng, n):
    """Random PSD correlation matrix: normalized Gram matrix of random vectors."""
    a = rng.standard_normal((n, n + rng.integers(0, 3)))
    c = a @ a.T
    d = np.sqrt(np.diag(c))
    c = c / np.outer(d, d)
    c = 0.5 * (c + c.T)
    np.fill_diagonal(c, 1.0)
    return np.clip(c, -1.0, 1.0)


# PASS/FAIL lines from test_acceptance, echoed at the end of the session
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
