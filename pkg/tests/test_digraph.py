"""Graph type, sampling, SCC decomposition, and the two oracles."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from randqnet import (
    CostGuardError,
    DirectedGraph,
    estimate_pc_monte_carlo,
    exact_pc_bruteforce,
    is_strongly_connected,
    sample_digraph,
    strongly_connected_components,
    strongly_connected_counts,
    wilson_interval,
)
from randqnet.digraph import arc_index, arc_pairs
from conftest import naive_strongly_connected


# --- graph type ---------------------------------------------------------------

def test_arc_layout_row_major_without_diagonal():
    assert arc_pairs(3) == [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]
    assert [arc_index(3, u, v) for u, v in arc_pairs(3)] == list(range(6))


def test_rejects_self_loops_and_out_of_range():
    with pytest.raises(ValueError):
        DirectedGraph(3, {(1, 1)})
    with pytest.raises(ValueError):
        DirectedGraph(3, {(0, 3)})
    with pytest.raises(ValueError):
        DirectedGraph(0, set())


@given(st.integers(2, 5), st.data())
def test_mask_round_trip(n, data):
    mask = data.draw(st.integers(0, 2 ** (n * (n - 1)) - 1))
    g = DirectedGraph.from_mask(n, mask)
    assert g.mask == mask
    assert DirectedGraph(n, g.arcs).mask == mask


def test_complete_and_cycle():
    assert len(DirectedGraph.complete(4).arcs) == 12
    c = DirectedGraph.cycle(4)
    assert c.arcs == {(0, 1), (1, 2), (2, 3), (3, 0)}


# --- sampling -------------------------------------------------------------------

def test_sample_endpoints():
    assert sample_digraph(5, 1, rng=3).arcs == DirectedGraph.complete(5).arcs
    assert sample_digraph(5, 0, rng=3).arcs == frozenset()


def test_sample_deterministic_per_seed():
    g1 = sample_digraph(4, Fraction(1, 2), rng=12345)
    g2 = sample_digraph(4, Fraction(1, 2), rng=12345)
    g3 = sample_digraph(4, Fraction(1, 2), rng=54321)
    assert g1.arcs == g2.arcs
    assert g1.arcs != g3.arcs  # overwhelmingly likely; pinned by the fixed seeds


def test_sample_rejects_bad_p():
    with pytest.raises(ValueError):
        sample_digraph(3, 1.5, rng=0)


# --- SCC decomposition ------------------------------------------------------------

def test_scc_cycle_is_single_component():
    scc = strongly_connected_components(DirectedGraph.cycle(3))
    assert len(scc.components) == 1
    assert scc.components[0] == frozenset({0, 1, 2})
    assert scc.condensation == frozenset()


def test_scc_two_joined_two_cycles():
    g = DirectedGraph(4, {(0, 1), (1, 0), (2, 3), (3, 2), (1, 2)})
    scc = strongly_connected_components(g)
    assert sorted(sorted(c) for c in scc.components) == [[0, 1], [2, 3]]
    assert len(scc.condensation) == 1


def test_scc_single_vertex():
    scc = strongly_connected_components(DirectedGraph(1, set()))
    assert scc.components == (frozenset({0}),)


def test_scc_partitions_vertices_and_condensation_acyclic(rng):
    for _ in range(200):
        n = int(rng.integers(2, 12))
        g = sample_digraph(n, rng.uniform(0.05, 0.6), rng)
        scc = strongly_connected_components(g)
        seen = sorted(v for comp in scc.components for v in comp)
        assert seen == list(range(n))
        # condensation respects reverse topological order: arcs point from
        # later-listed components to earlier-listed ones
        assert all(cu > cv for cu, cv in scc.condensation)


def test_is_strongly_connected_basics():
    for n in range(2, 7):
        assert is_strongly_connected(DirectedGraph.complete(n))
        assert not is_strongly_connected(DirectedGraph(n, set()))
    star_out = DirectedGraph(4, {(0, 1), (0, 2), (0, 3)})
    assert not is_strongly_connected(star_out)


def test_agrees_with_naive_reachability_exhaustively():
    for n in range(1, 5):
        for mask in range(1 << (n * (n - 1))):
            g = DirectedGraph.from_mask(n, mask)
            assert is_strongly_connected(g) == naive_strongly_connected(g)


def test_agrees_with_naive_reachability_random_large(rng):
    for _ in range(1000):
        n = int(rng.integers(5, 65))
        g = sample_digraph(n, rng.uniform(0.5, 2.5) * np.log(n) / n, rng)
        assert is_strongly_connected(g) == naive_strongly_connected(g)


# --- exhaustive oracle ---------------------------------------------------------------

def test_bruteforce_two_vertices_symbolic():
    for p in (Fraction(1, 7), Fraction(1, 2), Fraction(5, 6)):
        assert exact_pc_bruteforce(2, p) == p * p
    assert exact_pc_bruteforce(1, Fraction(1, 3)) == 1


def test_bruteforce_three_vertices():
    # 18 strongly connected digraphs out of 64
    assert exact_pc_bruteforce(3, Fraction(1, 2)) == Fraction(9, 32)


def test_counts_match_per_graph_tarjan_small():
    for n in (2, 3, 4):
        n_arcs = n * (n - 1)
        expected = [0] * (n_arcs + 1)
        for mask in range(1 << n_arcs):
            g = DirectedGraph.from_mask(n, mask)
            if is_strongly_connected(g):
                expected[bin(mask).count("1")] += 1
        assert list(strongly_connected_counts(n)) == expected


def test_counts_match_per_graph_tarjan_sampled_n5(rng):
    counts = strongly_connected_counts(5)
    masks = rng.integers(0, 1 << 20, size=3000)
    for mask in masks:
        g = DirectedGraph.from_mask(5, int(mask))
        by_kernel = is_strongly_connected(g)
        # membership in the aggregated counts cannot be read back per graph,
        # so recheck the kernel flag against Tarjan directly
        assert by_kernel == naive_strongly_connected(g)
    assert sum(counts) == 565080  # pinned after the exhaustive n<=4 cross-checks


def test_bruteforce_cost_guard():
    with pytest.raises(CostGuardError):
        exact_pc_bruteforce(6, Fraction(1, 2))


# --- Wilson interval -------------------------------------------------------------------

def test_wilson_interval_contains_proportion_and_is_clamped():
    for hits, samples in ((0, 10), (10, 10), (3, 17), (500, 1000)):
        lo, hi = wilson_interval(hits, samples)
        assert 0.0 <= lo <= hits / samples <= hi <= 1.0


def test_wilson_interval_symmetry():
    lo, hi = wilson_interval(300, 1000)
    lo2, hi2 = wilson_interval(700, 1000)
    assert lo == pytest.approx(1 - hi2, abs=1e-12)
    assert hi == pytest.approx(1 - lo2, abs=1e-12)


def test_wilson_hand_computed():
    # z = 2.5758293035489004 at 99%: hits=80, samples=100
    z = 2.5758293035489004
    zz = z * z
    center = (80 + zz / 2) / (100 + zz)
    half = z * (80 * 20 / 100 + zz / 4) ** 0.5 / (100 + zz)
    lo, hi = wilson_interval(80, 100)
    assert (lo, hi) == pytest.approx((center - half, center + half), abs=1e-15)


def test_wilson_rejects_bad_inputs():
    with pytest.raises(ValueError):
        wilson_interval(5, 3)
    with pytest.raises(ValueError):
        wilson_interval(-1, 3)


# --- Monte Carlo -----------------------------------------------------------------------

def test_mc_endpoints_are_exact():
    assert estimate_pc_monte_carlo(4, 1, 5000, seed=1).estimate == 1.0
    assert estimate_pc_monte_carlo(4, 0, 5000, seed=1).estimate == 0.0
    assert estimate_pc_monte_carlo(1, Fraction(1, 2), 100, seed=1).estimate == 1.0


def test_mc_deterministic_and_worker_independent():
    a = estimate_pc_monte_carlo(5, 0.4, 150_000, seed=99)
    b = estimate_pc_monte_carlo(5, 0.4, 150_000, seed=99)
    c = estimate_pc_monte_carlo(5, 0.4, 150_000, seed=99, workers=3)
    assert (a.hits, a.lo, a.hi) == (b.hits, b.lo, b.hi) == (c.hits, c.lo, c.hi)
    d = estimate_pc_monte_carlo(5, 0.4, 150_000, seed=100)
    assert d.hits != a.hits


def test_mc_interval_contains_exact_value():
    exact = float(exact_pc_bruteforce(5, Fraction(1, 3)))
    est = estimate_pc_monte_carlo(5, Fraction(1, 3), 200_000, seed=7)
    assert est.lo <= exact <= est.hi
    assert est.samples == 200_000
    assert 0 <= est.hits <= est.samples


def test_mc_odd_sample_counts():
    est = estimate_pc_monte_carlo(3, 0.5, 12_345, seed=11)
    assert est.samples == 12_345
    assert 0 <= est.hits <= 12_345
    # estimate consistent with the exact 9/32 to a loose stochastic margin
    assert abs(est.estimate - 9 / 32) < 0.02
