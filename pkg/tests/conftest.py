import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from spectral_gap_lab.graph import WeightedGraph, random_graph  # noqa: E402

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@st.composite
def graphs(draw, min_n=2, max_n=5):
    """Connected weighted graphs; a spanning path keeps the skeleton connected."""
    n = draw(st.integers(min_n, max_n))
    weight = st.floats(0.05, 3.0, allow_nan=False)
    w = np.zeros((n, n))
    order = draw(st.permutations(range(n)))
    for a, b in zip(order, order[1:]):
        w[a, b] = w[b, a] = draw(weight)
    for i in range(n):
        for j in range(i + 1, n):
            if w[i, j] == 0 and draw(st.booleans()):
                w[i, j] = w[j, i] = draw(weight)
    return WeightedGraph(w)


@pytest.fixture
def k4():
    return WeightedGraph.complete(4)


@pytest.fixture
def rand5():
    return random_graph(5, 0.6, 11)
