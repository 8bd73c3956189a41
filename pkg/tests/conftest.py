import sys
from dataclasses import dataclass, field

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("ci", max_examples=40, deadline=None)
settings.load_profile("ci")


@dataclass
class EdgeGraph:
    """Minimal graph accepted by ``run_sweep``: open boundaries, no winding."""

    N: int
    edges: list
    wrap_detection: bool = False
    u: np.ndarray = field(init=False)
    v: np.ndarray = field(init=False)
    dx: np.ndarray = field(init=False)
    dy: np.ndarray = field(init=False)

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int32).reshape(-1, 2)
        self.u, self.v = e[:, 0].copy(), e[:, 1].copy()
        self.dx = np.zeros(len(e), dtype=np.int32)
        self.dy = np.zeros(len(e), dtype=np.int32)

    @property
    def M(self):
        return len(self.u)

    @property
    def n_active(self):
        return self.N


@pytest.fixture
def edge_graph():
    return EdgeGraph


def brute_lcc(n_nodes, u, v):
    """Largest component size by BFS-free union of a scipy graph."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    g = coo_matrix((np.ones(len(u)), (u, v)), shape=(n_nodes, n_nodes))
    _, labels = connected_components(g, directed=False)
    return int(np.bincount(labels).max())


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
