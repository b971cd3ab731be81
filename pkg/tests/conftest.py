import numpy as np
import pytest

from netreservoir.netgraph import Edge, WeightedDigraph


def random_graph(rng: np.random.Generator, n: int, p: float, self_loops: bool = True) -> WeightedDigraph:
    mask = rng.random((n, n)) < p
    if not self_loops:
        np.fill_diagonal(mask, False)
    src, dst = np.nonzero(mask)
    w = rng.random(len(src)) * 5
    return WeightedDigraph(
        tuple(f"v{i}" for i in range(n)),
        tuple(Edge(int(s), int(d), float(x)) for s, d, x in zip(src, dst, w)),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
