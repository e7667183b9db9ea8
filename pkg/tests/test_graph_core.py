import numpy as np
import pytest
from hypothesis import given, settings

import balanced_embed as be

from conftest import connected_graphs


class TestBuildGraph:
    def test_smallest_path(self):
        g = be.build_graph([(0, 1), (1, 2)], n=3)
        assert g.n == 3
        assert g.edge_count == 2
        assert g.neighbors(1).tolist() == [0, 2]

    def test_duplicate_edges_collapse(self):
        g = be.build_graph([(0, 1), (1, 0)], n=2)
        assert g.edge_count == 1

    def test_isolated_vertex_is_disconnected(self):
        with pytest.raises(be.GraphError, match="disconnected"):
            be.build_graph([(0, 1)], n=3)

    def test_self_loop_rejected(self):
        with pytest.raises(be.GraphError, match="self-loop"):
            be.build_graph([(0, 0), (0, 1)], n=2)

    def test_empty_graph_rejected(self):
        with pytest.raises(be.GraphError):
            be.build_graph([], n=0)

    def test_out_of_range_endpoint(self):
        with pytest.raises(be.GraphError, match="out of range"):
            be.build_graph([(0, 5)], n=3)

    def test_vertex_count_inferred(self):
        g = be.build_graph([(0, 1), (1, 2), (2, 3)])
        assert g.n == 4

    def test_single_vertex(self):
        g = be.build_graph([], n=1)
        assert g.n == 1
        assert be.all_pairs_distances(g).diam == 0

    def test_adjacency_sorted_and_symmetric(self):
        g = be.build_graph([(2, 0), (1, 2), (0, 1), (3, 0)], n=4)
        for u in range(4):
            nb = g.neighbors(u)
            assert list(nb) == sorted(nb)
            for v in nb:
                assert u in g.neighbors(v)


class TestAllPairsDistances:
    def test_path(self, p3):
        _, dist = p3
        assert dist.d[0, 2] == 2
        assert dist.diam == 2

    def test_complete(self):
        dist = be.all_pairs_distances(be.gen_complete(4))
        off = dist.d[~np.eye(4, dtype=bool)]
        assert (off == 1).all()
        assert dist.diam == 1

    def test_cycle4(self, c4):
        _, dist = c4
        assert dist.d[0, 2] == 2
        assert dist.d[0, 1] == 1
        assert dist.diam == 2

    def test_matches_networkx(self):
        nx = pytest.importorskip("networkx")
        rng = np.random.default_rng(7)
        for _ in range(10):
            n = int(rng.integers(2, 30))
            g = be.gen_erdos_renyi(n, 0.3, seed=int(rng.integers(1 << 30)))
            dist = be.all_pairs_distances(g)
            nxg = nx.Graph(list(map(tuple, g.edges())))
            nxg.add_nodes_from(range(n))
            expected = dict(nx.all_pairs_shortest_path_length(nxg))
            for u in range(n):
                for v in range(n):
                    assert dist.d[u, v] == expected[u][v]

    def test_thread_partition_identical(self):
        g = be.gen_erdos_renyi(40, 0.15, seed=3)
        serial = be.all_pairs_distances(g, threads=1)
        parallel = be.all_pairs_distances(g, threads=4)
        assert np.array_equal(serial.d, parallel.d)

    def test_python_fallback_matches(self, c4):
        from balanced_embed.graph import _bfs_rows_python

        g, dist = c4
        out = np.empty((4, 4), dtype=np.uint16)
        _bfs_rows_python(g, out, range(4))
        assert np.array_equal(out, dist.d)

    @settings(max_examples=40, deadline=None)
    @given(connected_graphs(max_n=12))
    def test_matrix_invariants(self, g):
        dist = be.all_pairs_distances(g)
        d = dist.d.astype(np.int64)
        assert (np.diag(d) == 0).all()
        assert np.array_equal(d, d.T)
        # d == 1 exactly on edges
        adj = np.zeros((g.n, g.n), dtype=bool)
        for u, v in g.edges():
            adj[u, v] = adj[v, u] = True
        assert np.array_equal(d == 1, adj)
        assert dist.diam >= 1
        # triangle inequality on random triples
        rng = np.random.default_rng(0)
        for _ in range(30):
            i, j, k = rng.integers(0, g.n, size=3)
            assert d[i, k] <= d[i, j] + d[j, k]

    def test_matrix_read_only(self, p3):
        _, dist = p3
        with pytest.raises(ValueError):
            dist.d[0, 0] = 5


class TestBoundary:
    def test_path_endpoints(self, p3):
        g, dist = p3
        b = be.boundary(g, dist)
        assert b.members.tolist() == [0, 2]
        assert 1 not in b

    def test_complete_all(self):
        for n in (4, 6):
            g = be.gen_complete(n)
            b = be.boundary(g, be.all_pairs_distances(g))
            assert len(b) == n

    def test_cycle4_all(self, c4):
        g, dist = c4
        assert len(be.boundary(g, dist)) == 4

    def test_witness_certifies(self, p3):
        g, dist = p3
        b = be.boundary(g, dist)
        for u, v in b.witness.items():
            nb = g.neighbors(u)
            assert dist.d[nb, v].astype(int).sum() < len(nb) * int(dist.d[u, v])

    def test_single_vertex_empty(self):
        g = be.build_graph([], n=1)
        assert len(be.boundary(g, be.all_pairs_distances(g))) == 0

    @settings(max_examples=40, deadline=None)
    @given(connected_graphs(max_n=12))
    def test_nonempty_for_n_at_least_2(self, g):
        b = be.boundary(g, be.all_pairs_distances(g))
        assert len(b) >= 1


class TestIsoperimetric:
    def test_path3(self, p3):
        g, dist = p3
        rep = be.isoperimetric_report(g, dist, be.boundary(g, dist))
        assert rep.lower_bound == pytest.approx(3 / 8)
        assert rep.boundary_size == 2
        assert rep.satisfied

    def test_k4(self):
        g = be.gen_complete(4)
        dist = be.all_pairs_distances(g)
        rep = be.isoperimetric_report(g, dist, be.boundary(g, dist))
        assert rep.lower_bound == pytest.approx(4 / 6)
        assert rep.boundary_size == 4
        assert rep.satisfied

    @settings(max_examples=40, deadline=None)
    @given(connected_graphs(max_n=12))
    def test_always_satisfied(self, g):
        dist = be.all_pairs_distances(g)
        assert be.isoperimetric_report(g, dist, be.boundary(g, dist)).satisfied


def test_connectivity_helper_agrees_with_networkx():
    nx = pytest.importorskip("networkx")
    rng = np.random.default_rng(11)
    hits = {True: 0, False: 0}
    for _ in range(40):
        n = int(rng.integers(2, 15))
        iu, ju = np.triu_indices(n, k=1)
        mask = rng.random(iu.size) < 0.25
        edges = np.stack([iu[mask], ju[mask]], axis=1)
        nxg = nx.Graph(list(map(tuple, edges)))
        nxg.add_nodes_from(range(n))
        try:
            be.build_graph(edges, n=n)
            connected = True
        except be.GraphError:
            connected = False
        assert connected == nx.is_connected(nxg)
        hits[connected] += 1
    assert hits[True] and hits[False]
