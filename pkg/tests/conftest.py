import numpy as np
import pytest
from scipy.stats import special_ortho_group

from liespec import bi_invariant_metric, metric_from_onb, preset


@pytest.fixture
def su2():
    return preset("su2")


@pytest.fixture
def su2_g0(su2):
    return bi_invariant_metric(su2.algebra)


def random_spd(rng, m, spread=0.5):
    """SPD matrix ``exp(X)`` with ``X`` symmetric, entries of size ``spread``."""
    X = rng.uniform(-spread, spread, (m, m))
    X = 0.5 * (X + X.T)
    w, V = np.linalg.eigh(X)
    return (V * np.exp(w)) @ V.T


def random_metric(rng, group, g0, spread=0.5):
    return metric_from_onb(random_spd(rng, group.algebra.dim, spread), g0, group.algebra)


def random_rotation(rng, n=3):
    return special_ortho_group.rvs(n, random_state=rng)


ACCEPTANCE_LINES = {}


def record_acceptance(number, ok, detail):
    line = f"ACCEPTANCE {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
