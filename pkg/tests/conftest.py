import numpy as np
import pytest

from ldpu.classifiers import FIXTURES
from ldpu.robustness import RobustnessConfig, expand_hyperrectangle, find_radius


def ks_distance(mech, x, draws):
    """Two-sided KS statistic that respects atoms: check F at u and just below u."""
    s = np.sort(draws)
    n = len(s)
    values, first = np.unique(s, return_index=True)
    last = np.append(first[1:], n)
    worst = 0.0
    for u, lo, hi in zip(values, first, last):
        worst = max(worst, abs(hi / n - mech.cdf_at(x, float(u))), abs(lo / n - mech.cdf_below(x, float(u))))
    return worst


@pytest.fixture(scope="session")
def robust_regions():
    """theta and theta-diamond for every fixture at the centre point, seed 7."""
    out = {}
    config = RobustnessConfig(tau=0.02, omega=0.05, kappa=0.01, seed=7)
    for name, factory in FIXTURES.items():
        model = factory()
        x = (0.5,) * model.dimension
        theta = find_radius(model, x, config)
        out[name] = (model, x, theta, expand_hyperrectangle(model, x, theta, config))
    return out


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def check(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
