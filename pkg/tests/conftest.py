import random

import pytest

from mdag import build_mdag, example_graph


@pytest.fixture
def fig3():
    return example_graph("fig3")


@pytest.fixture
def fig4a():
    return example_graph("fig4a")


@pytest.fixture
def fig5a():
    return example_graph("fig5a")


@pytest.fixture
def fig7a():
    return example_graph("fig7a")


@pytest.fixture
def fig8a():
    return example_graph("fig8a")


@pytest.fixture
def fig9a():
    return example_graph("fig9a")


@pytest.fixture
def cycle3():
    return example_graph("3cycle")


def random_mdag(rng: random.Random, n_vertices: int, p_edge: float = 0.4, n_bi: int = 2):
    """Random small mDAG: DAG edges over a shuffled order plus random hyper-edges."""
    names = [str(i + 1) for i in range(n_vertices)]
    order = names[:]
    rng.shuffle(order)
    directed = []
    for i in range(n_vertices):
        for j in range(i + 1, n_vertices):
            if rng.random() < p_edge:
                directed.append((order[i], order[j]))
    bidirected = []
    for _ in range(n_bi):
        size = rng.randint(2, min(3, n_vertices))
        edge = tuple(sorted(rng.sample(names, size)))
        bidirected.append(edge)
    return build_mdag(names, directed=directed, bidirected=bidirected, maximality="normalize")
