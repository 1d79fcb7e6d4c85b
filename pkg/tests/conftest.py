import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from isoreduce import WeightedDigraph


@pytest.fixture
def three_cycle() -> WeightedDigraph:
    """Unit-weight directed 3-cycle 1 -> 2 -> 3 -> 1, column-stochastic."""
    return WeightedDigraph.from_edges(
        3, [(1, 2, 1.0), (2, 3, 1.0), (3, 1, 1.0)], stochastic=True)


@pytest.fixture
def two_cycle() -> WeightedDigraph:
    return WeightedDigraph.from_edges(2, [(1, 2, 1.0), (2, 1, 1.0)], stochastic=True)


@pytest.fixture
def path_graph() -> WeightedDigraph:
    """Directed path 4 -> 3 -> 2 -> 1."""
    return WeightedDigraph.from_edges(4, [(4, 3, 1.0), (3, 2, 1.0), (2, 1, 1.0)])
