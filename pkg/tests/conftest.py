import sys

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def linear_data(g, n, beta, sigma=1.0):
    beta = np.asarray(beta, float)
    X = g.standard_normal((n, beta.size))
    return X, X @ beta + sigma * g.standard_normal(n)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for num in sorted(results):
            terminalreporter.write_line(results[num])
