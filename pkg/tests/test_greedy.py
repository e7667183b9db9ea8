import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import balanced_embed as be
from balanced_embed.greedy import _select

from conftest import connected_graphs


class TestInitState:
    def test_path5_single_start(self, p5):
        _, dist = p5
        st_ = be.init_state(dist, [0])
        assert st_.sums.tolist() == [0, 1, 2, 3, 4]
        assert st_.pair_sum == 0

    def test_single_vertex_is_row(self, c4):
        _, dist = c4
        st_ = be.init_state(dist, [2])
        assert st_.sums.tolist() == dist.d[2].tolist()
        assert st_.pair_sum == 0

    def test_path3_two_endpoints(self, p3):
        _, dist = p3
        st_ = be.init_state(dist, [0, 2])
        assert st_.sums.tolist() == [2, 2, 2]
        assert st_.pair_sum == 4

    def test_empty_initial_rejected(self, p3):
        with pytest.raises(ValueError, match="nonempty"):
            be.init_state(p3[1], [])

    def test_out_of_range_rejected(self, p3):
        with pytest.raises(ValueError):
            be.init_state(p3[1], [5])


class TestGreedyStep:
    def test_path5_picks_far_end(self, p5):
        _, dist = p5
        st_ = be.init_state(dist, [0])
        assert be.greedy_step(st_) == 4

    def test_path5_tie_breaks_to_zero(self, p5):
        _, dist = p5
        st_ = be.init_state(dist, [0, 4])
        assert (st_.sums == 4).all()
        assert be.greedy_step(st_) == 0

    def test_triangle_min_index(self):
        dist = be.all_pairs_distances(be.gen_complete(3))
        st_ = be.init_state(dist, [0])
        assert be.greedy_step(st_) == 1

    def test_random_tie_break_seeded(self, p5):
        _, dist = p5
        picks = set()
        for _ in range(3):
            st_ = be.init_state(dist, [0, 4], tie_break="random", seed=123)
            picks.add(be.greedy_step(st_))
        assert len(picks) == 1  # same seed, same choice

    def test_boundary_tie_break(self):
        # star: after center+leaf rounds, ties resolve inside the boundary
        g = be.gen_star(3)
        dist = be.all_pairs_distances(g)
        b = be.boundary(g, dist)
        st_ = be.init_state(dist, [0], tie_break="boundary_min_index", boundary=b)
        chosen = be.greedy_step(st_)
        assert chosen in b

    def test_unknown_tie_break(self, p3):
        with pytest.raises(ValueError):
            be.init_state(p3[1], [0], tie_break="bogus")


class TestRun:
    def test_path5_alternates_to_endpoint_pair(self, p5):
        _, dist = p5
        st_ = be.init_state(dist, [0])
        rep = be.run(st_, be.RunConfig(max_steps=1000))
        assert abs(rep.alpha_estimate - 2.0) < 0.01
        mu = be.empirical_measure(st_)
        np.testing.assert_allclose(mu.weights, [0.5, 0, 0, 0, 0.5], atol=0.01)
        assert 2.0 <= rep.alpha_estimate <= 4.0  # diam/2 .. diam

    @pytest.mark.parametrize("n", [3, 4, 6])
    def test_complete_graph_limit(self, n):
        dist = be.all_pairs_distances(be.gen_complete(n))
        rep = be.run(be.init_state(dist, [0]))
        assert abs(rep.alpha_estimate - (n - 1) / n) < 0.01

    def test_single_step(self, c4):
        _, dist = c4
        st_ = be.init_state(dist, [0, 1])
        rep = be.run(st_, be.RunConfig(max_steps=1))
        assert rep.steps == 3

    def test_non_convergence_reported(self, p5):
        _, dist = p5
        rep = be.run(be.init_state(dist, [0]), be.RunConfig(max_steps=5, stop_gap=0.0))
        assert not rep.converged
        assert rep.steps == 6

    def test_converged_alpha_in_theorem_range(self, c4):
        _, dist = c4
        rep = be.run(be.init_state(dist, [0]))
        stop = 1e-3 * dist.diam
        assert rep.converged
        assert dist.diam / 2 - stop <= rep.alpha_estimate <= dist.diam + stop

    def test_energy_trace_sampled(self, p5):
        rep = be.run(be.init_state(p5[1], [0]), be.RunConfig(sample_every=50))
        assert rep.energy_trace
        assert rep.energy_trace[0][0] >= 2

    def test_heavy_vertices_near_max_transport(self, p5):
        # weighted-average identity: deficit on heavy vertices is bounded by
        # (gap + E/m) / eps for any trajectory
        _, dist = p5
        st_ = be.init_state(dist, [0])
        rep = be.run(st_)
        assert rep.converged
        bound = (rep.gap + rep.energy / rep.steps) / rep.heavy_eps
        assert rep.support_gap <= bound + 1e-9


class TestEmpiricalMeasure:
    def test_explicit_sequence(self, p5):
        _, dist = p5
        st_ = be.init_state(dist, [0, 4, 0, 4])
        mu = be.empirical_measure(st_)
        assert mu.weights.tolist() == [0.5, 0, 0, 0, 0.5]

    def test_dirac(self, p3):
        mu = be.empirical_measure(be.init_state(p3[1], [1]))
        assert mu.weights.tolist() == [0, 1, 0]

    def test_uniform(self, p3):
        mu = be.empirical_measure(be.init_state(p3[1], [0, 1, 2]))
        np.testing.assert_allclose(mu.weights, 1 / 3)


class TestTransportCosts:
    def test_path3_balanced(self, p3):
        _, dist = p3
        T = be.transport_costs(np.array([0.5, 0, 0.5]), dist)
        np.testing.assert_allclose(T, [1, 1, 1])

    def test_dirac_is_distance_row(self, c4):
        _, dist = c4
        T = be.transport_costs(be.VertexMeasure.dirac(4, 2), dist)
        np.testing.assert_allclose(T, dist.d[2])
        assert T[2] == 0

    def test_star_leaf_uniform(self, star3):
        _, dist = star3
        T = be.transport_costs(np.array([0, 1, 1, 1]) / 3, dist)
        assert T[0] == pytest.approx(1.0)
        np.testing.assert_allclose(T[1:], 4 / 3)

    def test_dimension_mismatch(self, p3):
        with pytest.raises(ValueError, match="entries"):
            be.transport_costs(np.ones(4) / 4, p3[1])

    def test_dense_and_sparse_paths_agree(self):
        g = be.gen_erdos_renyi(30, 0.2, seed=5)
        dist = be.all_pairs_distances(g)
        rng = np.random.default_rng(0)
        w = rng.dirichlet(np.ones(30))
        dense = dist.d.astype(float) @ w
        np.testing.assert_allclose(be.transport_costs(w, dist), dense, atol=1e-12)


class TestExactInvariants:
    @settings(max_examples=25, deadline=None)
    @given(connected_graphs(max_n=9), st.integers(0, 1 << 16))
    def test_recurrence_and_bounds_along_trajectory(self, g, seed):
        dist = be.all_pairs_distances(g)
        rng = np.random.default_rng(seed)
        start = int(rng.integers(g.n))
        state = be.init_state(dist, [start])
        prev_F = state.pair_sum
        for step in range(40):
            m = state.m
            S_before = state.sums.copy()
            chosen = be.greedy_step(state)
            # exact recurrence: F grows by twice the chosen running sum
            assert state.pair_sum == prev_F + 2 * int(S_before[chosen])
            # from-scratch recomputation agrees exactly
            s2, f2 = state.recompute()
            assert np.array_equal(s2, state.sums)
            assert f2 == state.pair_sum
            # monotone ratio: m * F_{m+1} >= (m+2) * F_m
            assert m * state.pair_sum >= (m + 2) * prev_F
            # continuity: max_v |m * d(v, chosen) - S_m(v)| <= m * diam
            row = dist.d[chosen].astype(np.int64)
            assert int(np.abs(m * row - S_before).max()) <= m * dist.diam
            prev_F = state.pair_sum

    @settings(max_examples=20, deadline=None)
    @given(connected_graphs(max_n=9), st.integers(0, 1 << 16))
    def test_minimax_lower_bound(self, g, seed):
        dist = be.all_pairs_distances(g)
        rng = np.random.default_rng(seed)
        mus = rng.dirichlet(np.ones(g.n), size=64)
        T = mus @ dist.d.astype(np.float64)
        assert (T.max(axis=1) >= dist.diam / 2 - 1e-12).all()

    @settings(max_examples=20, deadline=None)
    @given(connected_graphs(max_n=9))
    def test_maximizers_touch_boundary(self, g):
        dist = be.all_pairs_distances(g)
        b = be.boundary(g, dist)
        diag = be.Diagnostics(check_boundary=True, check_recurrence=True,
                              continuity_every=1)
        state = be.init_state(dist, [0], boundary=b)
        be.run(state, be.RunConfig(max_steps=60, stop_gap=0.0), diag)
        assert diag.boundary_checked == 60
        assert diag.boundary_violations == 0
        assert diag.recurrence_violations == 0
        assert diag.continuity_violations == 0

    def test_overflow_guard(self, p3):
        with pytest.raises(OverflowError):
            be.run(be.init_state(p3[1], [0]), be.RunConfig(max_steps=1 << 62))


class TestSelectConsistency:
    @settings(max_examples=20, deadline=None)
    @given(connected_graphs(max_n=9))
    def test_min_index_equals_explicit_scan(self, g):
        dist = be.all_pairs_distances(g)
        state = be.init_state(dist, [0])
        for _ in range(10):
            S = state.sums
            explicit = min(np.flatnonzero(S == S.max()))
            assert _select(state) == explicit
            be.greedy_step(state)
