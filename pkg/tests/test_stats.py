import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (
    brute_cycles,
    brute_min_bisection,
    brute_overlapping_pairs,
    brute_packing,
    edges_of,
    falling_factorial,
)
from sbmcoupling.exceptions import CapExceededError
from sbmcoupling.graph import Graph, toggle_edge
from sbmcoupling.models import ModelSpec, sample_graph, sample_sbm
from sbmcoupling.stats import (
    count_cycles_upto,
    count_k_cycles,
    count_overlapping_pairs,
    cut_size,
    cycle_report,
    enumerate_cycles,
    expected_cycles_planted_limit,
    expected_cycles_uniform,
    max_disjoint_packing,
    min_bisection,
    random_bisection_cuts,
)

TRIANGLE = Graph(3, [(0, 1), (1, 2), (0, 2)])
K4 = Graph.complete(4)
BOWTIE = Graph(5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)])
TWO_TRIANGLES = Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])


@st.composite
def small_graphs(draw, max_n=8):
    n = draw(st.integers(3, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    return Graph(n, draw(st.lists(st.sampled_from(pairs), unique=True)))


class TestCycleCounts:
    def test_triangle(self):
        assert count_k_cycles(TRIANGLE, 3) == 1

    def test_k4(self):
        assert count_k_cycles(K4, 3) == 4
        assert count_k_cycles(K4, 4) == 3

    def test_c5(self):
        c5 = Graph.cycle(5)
        assert count_k_cycles(c5, 5) == 1
        assert count_k_cycles(c5, 3) == 0

    def test_complete_graph_formula(self):
        # K_n has (n)_k / 2k cycles of length k
        for n in range(4, 8):
            counts = count_cycles_upto(Graph.complete(n), n)
            for k in range(3, n + 1):
                assert counts[k] == falling_factorial(n, k) // (2 * k)

    @settings(max_examples=80, deadline=None)
    @given(small_graphs())
    def test_matches_brute_force(self, g):
        counts = count_cycles_upto(g, min(g.n, 6))
        for k in range(3, min(g.n, 6) + 1):
            assert counts[k] == len(brute_cycles(g.n, edges_of(g), k))

    def test_enumerated_cycles_are_cycles(self):
        g = sample_graph(ModelSpec(60, 6.0), 4)
        cyc = enumerate_cycles(g, 5)
        assert len(cyc) == count_k_cycles(g, 5)
        for row in cyc.tolist():
            assert len(set(row)) == 5 and row[0] == min(row)
            assert all(g.has_edge(row[t], row[(t + 1) % 5]) for t in range(5))
        assert len({frozenset(zip(r, r[1:] + r[:1])) for r in cyc.tolist()}) == len(cyc)

    def test_k_bounds(self):
        with pytest.raises(ValueError):
            count_k_cycles(TRIANGLE, 2)
        with pytest.raises(CapExceededError):
            count_k_cycles(TRIANGLE, 13)


class TestPacking:
    def test_two_triangles(self):
        assert max_disjoint_packing(TWO_TRIANGLES, 3) == (2, "exact")

    def test_bowtie(self):
        assert max_disjoint_packing(BOWTIE, 3) == (2, "exact")

    def test_k4(self):
        assert max_disjoint_packing(K4, 3) == (1, "exact")

    def test_forest_zero(self):
        assert max_disjoint_packing(Graph(5, [(0, 1), (1, 2), (1, 3)]), 3) == (0, "exact")

    @settings(max_examples=60, deadline=None)
    @given(small_graphs(max_n=7), st.sampled_from([3, 4]))
    def test_matches_brute_force(self, g, k):
        cycles = brute_cycles(g.n, edges_of(g), k)
        if len(cycles) > 14:
            return
        y, flag = max_disjoint_packing(g, k)
        assert flag == "exact"
        assert y == brute_packing(cycles)

    def test_greedy_flag_and_lower_bound(self):
        g = Graph.complete(9)
        exact, flag = max_disjoint_packing(g, 3, budget=10_000)
        greedy, gflag = max_disjoint_packing(g, 3, budget=4)
        assert (flag, gflag) == ("exact", "greedy-lower-bound")
        # K9 decomposes into 12 edge-disjoint triangles
        assert exact == 12
        assert 0 < greedy <= exact

    def test_greedy_is_seeded(self):
        g = Graph.complete(8)
        assert max_disjoint_packing(g, 3, budget=2, seed=5) == max_disjoint_packing(g, 3, budget=2, seed=5)


class TestOverlaps:
    def test_examples(self):
        assert count_overlapping_pairs(TWO_TRIANGLES, 3) == 0
        assert count_overlapping_pairs(BOWTIE, 3) == 1
        assert count_overlapping_pairs(K4, 3) == 6

    @settings(max_examples=40, deadline=None)
    @given(small_graphs(max_n=7))
    def test_matches_brute_force(self, g):
        # vertex overlap: compare vertex sets of the oracle cycles
        cycles = brute_cycles(g.n, edges_of(g), 3)
        vsets = [frozenset(v for e in c for v in e) for c in cycles]
        assert count_overlapping_pairs(g, 3) == brute_overlapping_pairs(vsets)

    def test_report(self):
        r = cycle_report(K4, 3)
        assert (r.x_k, r.y_k, r.y_k_exactness, r.z_k) == (4, 1, "exact", 6)
        assert r.as_row() == {"k": 3, "x_k": 4, "y_k": 1, "y_exact": True, "z_k": 6}


class TestSandwichAndLipschitz:
    @pytest.mark.parametrize("flavor,delta", [("uniform", 0.0), ("planted-assortative", 1.0)])
    def test_sandwich_random(self, flavor, delta):
        spec = ModelSpec(300, 2.0, delta, flavor)
        for seed in range(200):
            g = sample_graph(spec, seed)
            for k in (3, 4):
                r = cycle_report(g, k)
                assert r.y_k_exactness == "exact"
                assert r.y_k <= r.x_k
                assert r.y_k >= r.x_k - (2 * k) ** k * r.z_k

    def test_x3_not_lipschitz(self):
        # K4 minus an edge has 2 triangles; adding the edge makes 4
        g = Graph(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)])
        assert count_k_cycles(toggle_edge(g, 2, 3), 3) - count_k_cycles(g, 3) == 2

    @settings(max_examples=80, deadline=None)
    @given(small_graphs(max_n=8), st.data())
    def test_packing_lipschitz(self, g, data):
        i, j = data.draw(st.sampled_from(list(itertools.combinations(range(g.n), 2))))
        h = toggle_edge(g, i, j)
        for k in (3, 4):
            (a, fa), (b, fb) = max_disjoint_packing(g, k, budget=500), max_disjoint_packing(h, k, budget=500)
            if fa == fb == "exact":
                assert abs(a - b) <= 1


class TestFormulas:
    def test_uniform_example(self):
        assert expected_cycles_uniform(5, 3, 2.0) == pytest.approx(0.64, rel=1e-12)

    def test_uniform_zero_c(self):
        assert expected_cycles_uniform(10, 4, 0.0) == 0.0

    def test_uniform_large_n_limit(self):
        assert abs(expected_cycles_uniform(10**6, 3, 2.0) - 8 / 6) <= 1e-4

    @pytest.mark.parametrize("n,k,c", [(7, 3, 1.5), (12, 5, 2.5), (50, 4, 0.7)])
    def test_uniform_matches_falling_factorial(self, n, k, c):
        exact = falling_factorial(n, k) / (2 * k) * (c / n) ** k
        assert expected_cycles_uniform(n, k, c) == pytest.approx(exact, rel=1e-12)

    def test_planted_examples(self):
        assert expected_cycles_planted_limit(3, 2.0, 0.0) == pytest.approx(8 / 6)
        assert expected_cycles_planted_limit(3, 2.0, 1.0) == pytest.approx(1.5)
        assert expected_cycles_planted_limit(4, 1.0, 1.0) == pytest.approx(0.25)

    def test_disassortative_odd_cycles(self):
        assert expected_cycles_planted_limit(3, 2.0, 1.0, "planted-disassortative") == pytest.approx(7 / 6)
        assert expected_cycles_planted_limit(4, 2.0, 1.0, "planted-disassortative") == pytest.approx(17 / 8)

    def test_disassortative_triangles_monte_carlo(self):
        spec = ModelSpec(5000, 2.0, 2.0, "planted-disassortative")
        x = np.array([count_k_cycles(sample_graph(spec, s), 3) for s in range(3000)])
        se = x.std(ddof=1) / math.sqrt(len(x))
        assert abs(x.mean() - expected_cycles_planted_limit(3, 2.0, 2.0, spec.flavor)) <= 3 * se + 0.05


class TestBisection:
    def test_c4(self):
        assert min_bisection(Graph.cycle(4)).value == 2

    def test_empty(self):
        assert min_bisection(Graph(6)).value == 0

    def test_k22(self):
        k22 = Graph(4, [(0, 2), (0, 3), (1, 2), (1, 3)])
        assert cut_size(k22, [0, 0, 1, 1]) == 4
        assert min_bisection(k22).value == 2

    def test_cap(self):
        with pytest.raises(CapExceededError):
            min_bisection(Graph(21), mode="exact")

    @settings(max_examples=80, deadline=None)
    @given(small_graphs(max_n=9))
    def test_exact_matches_brute_force(self, g):
        rep = min_bisection(g)
        assert rep.value == brute_min_bisection(g.n, edges_of(g))
        assert rep.exactness == "exact"
        assert abs(2 * int(rep.partition.sum()) - g.n) <= 1
        assert cut_size(g, rep.partition) == rep.value

    def test_heuristic_report_is_consistent(self):
        g = sample_graph(ModelSpec(400, 5.0), 8)
        rep = min_bisection(g, mode="heuristic", seed=3)
        assert rep.exactness == "heuristic"
        assert int(rep.partition.sum()) == 200
        assert cut_size(g, rep.partition) == rep.value
        assert rep.value == min_bisection(g, mode="heuristic", seed=3).value

    def test_heuristic_below_random_average(self):
        for seed in range(5):
            g = sample_graph(ModelSpec(300, 4.0, 2.0, "planted-assortative"), seed)
            rep = min_bisection(g, mode="heuristic", seed=seed)
            assert rep.value <= random_bisection_cuts(g, 100, seed).mean()

    def test_heuristic_not_worse_than_exact_on_small(self):
        for seed in range(10):
            g = sample_graph(ModelSpec(16, 4.0), seed)
            assert min_bisection(g, mode="heuristic", seed=seed).value >= min_bisection(g).value

    def test_exact_below_planted_partition(self):
        spec = ModelSpec(18, 5.0, 4.0, "planted-assortative")
        for seed in range(10):
            s = sample_sbm(spec, seed)
            if abs(2 * int(s.blocks.sum()) - spec.n) > 1:
                continue
            assert min_bisection(s.graph).value <= cut_size(s.graph, s.blocks)
