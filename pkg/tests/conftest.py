import numpy as np
import pytest
from hypothesis import strategies as st

import balanced_embed as be


@pytest.fixture(scope="session")
def p3():
    g = be.gen_path(3)
    return g, be.all_pairs_distances(g)


@pytest.fixture(scope="session")
def p5():
    g = be.gen_path(5)
    return g, be.all_pairs_distances(g)


@pytest.fixture(scope="session")
def star3():
    g = be.gen_star(3)
    return g, be.all_pairs_distances(g)


@pytest.fixture(scope="session")
def c4():
    g = be.gen_cycle(4)
    return g, be.all_pairs_distances(g)


@st.composite
def connected_graphs(draw, min_n=2, max_n=9, max_extra=12):
    """Random connected graph: a random spanning tree plus extra edges."""
    n = draw(st.integers(min_n, max_n))
    edges = [(draw(st.integers(0, i - 1)), i) for i in range(1, n)]
    if n >= 2:
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        edges += draw(st.lists(st.sampled_from(pairs), max_size=max_extra))
    return be.build_graph(edges, n=n)


@st.composite
def measures_on(draw, n):
    """Random probability vector with a few nonzero entries."""
    k = draw(st.integers(1, n))
    verts = draw(st.lists(st.integers(0, n - 1), min_size=k, max_size=k, unique=True))
    raw = [draw(st.integers(1, 10)) for _ in verts]
    total = sum(raw)
    w = np.zeros(n)
    for v, r in zip(verts, raw):
        w[v] = r / total
    return be.VertexMeasure.from_weights(w)
