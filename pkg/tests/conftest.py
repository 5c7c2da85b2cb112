import numpy as np
import pytest

from etconsensus import WeightedDigraph


@pytest.fixture
def p2() -> WeightedDigraph:
    """Path graph on two nodes, unit weight: lambda2 = lambdaN = ||L|| = 2."""
    return WeightedDigraph.from_edges(2, [(0, 1, 1.0)], directed=False)


@pytest.fixture
def k3() -> WeightedDigraph:
    """Complete unit-weight graph on three nodes: spectrum {0, 3, 3}."""
    return WeightedDigraph.from_edges(
        3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)], directed=False
    )


@pytest.fixture
def cycle3() -> WeightedDigraph:
    """Directed unit 3-cycle: weight-balanced, lambda2(Sym L) = 1.5."""
    return WeightedDigraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)])


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260810)
