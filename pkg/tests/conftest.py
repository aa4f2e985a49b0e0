import numpy as np
import pytest

from usflab.graph import build_from_rotation_system


def path_graph(n_edges, cond=None):
    """Vertices 0..n_edges along a line; edge i joins i and i+1."""
    rot = []
    for v in range(n_edges + 1):
        r = []
        if v > 0:
            r.append((v - 1, v - 1))
        if v < n_edges:
            r.append((v + 1, v))
        rot.append(r)
    return build_from_rotation_system(rot, cond)


def parallel_edges(k, cond=None):
    """Two vertices joined by k parallel edges."""
    return build_from_rotation_system(
        [[(1, e) for e in range(k)], [(0, e) for e in reversed(range(k))]], cond)


def bowtie():
    """Two triangles sharing vertex 0."""
    rot = [
        [(1, 0), (2, 2), (3, 3), (4, 5)],
        [(2, 1), (0, 0)],
        [(0, 2), (1, 1)],
        [(4, 4), (0, 3)],
        [(0, 5), (3, 4)],
    ]
    return build_from_rotation_system(rot)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
