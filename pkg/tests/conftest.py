import numpy as np
import pytest

from concest import make_dataset


def random_dataset(rng, m=None, n=None, k=3, soft="dirichlet"):
    """Random labeled point set for differential and property tests."""
    m = m if m is not None else int(rng.integers(20, 201))
    n = n if n is not None else int(rng.integers(1, 9))
    coords = rng.normal(size=(m, n))
    labels = rng.integers(0, k, m)
    if soft == "dirichlet":
        dist = rng.dirichlet(np.ones(k), size=m)
    elif soft == "onehot":
        dist = np.zeros((m, k))
        dist[np.arange(m), labels] = 1.0
    elif soft is None:
        dist = None
    else:
        raise ValueError(soft)
    return make_dataset(coords, labels, soft=dist, k=k)


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)


# one line per acceptance criterion, emitted after the run so the verdicts
# survive pytest's output capture
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
