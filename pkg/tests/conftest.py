import random

import numpy as np
import pytest
from scipy import stats as sps

from covertime.graph import Graph


class ScriptedRandom(random.Random):
    """random() replays a fixed script; everything else is a normal Random."""

    def __new__(cls, *args, **kwargs):
        return super().__new__(cls)

    def __init__(self, values, seed=0):
        super().__init__(seed)
        self._values = list(values)

    def random(self):
        return self._values.pop(0)


def chi2_pvalue(observed, probs):
    observed = np.asarray(observed, dtype=float)
    expected = np.asarray(probs, dtype=float) * observed.sum()
    return sps.chisquare(observed, expected).pvalue


def sample_counts(draw, support, n_samples):
    index = {v: i for i, v in enumerate(support)}
    counts = np.zeros(len(support))
    for _ in range(n_samples):
        counts[index[draw()]] += 1
    return counts


def graph_from(edges, name="custom"):
    n = 1 + max(max(e) for e in edges)
    return Graph.from_edges(n, edges, name)


@pytest.fixture
def kite():
    # degrees: 0->3, 1->2, 2->4, 3->2, 4->2, 5->1
    return graph_from([(0, 1), (0, 2), (0, 3), (1, 2), (2, 3), (2, 4), (4, 5)], "kite")


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line; all lines are repeated in the terminal summary."""
    lines = request.config._acceptance_lines

    def emit(criterion, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
        lines.append(line)
        print(line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
