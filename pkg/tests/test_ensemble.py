import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from walkcum.errors import InfeasibleRegime, InvalidParams, InvalidVertex, RegimeMismatch, SelfLoop
from walkcum.ensemble import (
    EnsembleParams,
    RegimeSpec,
    SparseGraph,
    edge_probability,
    ratios,
    resolve_regime,
    sample_graph,
)
from walkcum.weights import WeightFunction


def test_edge_probability_examples():
    p = EnsembleParams.from_N(101, 5.0, 10.0)
    assert edge_probability(0, 10, p) == pytest.approx(5 / 101 * math.exp(-1), rel=1e-14)
    assert edge_probability(-3, 7, p) == edge_probability(7, -3, p)
    assert edge_probability(0, 1, p) < 5 / 101
    with pytest.raises(SelfLoop):
        edge_probability(4, 4, p)
    with pytest.raises(InvalidVertex):
        edge_probability(0, 51, p)
    with pytest.raises(InvalidVertex):
        edge_probability(-51, 0, p)


def test_param_validation():
    with pytest.raises(InvalidParams):
        EnsembleParams.from_N(100, 1, 5)
    with pytest.raises(InvalidParams):
        EnsembleParams.from_N(11, 12, 5)
    with pytest.raises(InvalidParams):
        EnsembleParams.from_N(11, 1, 0)
    with pytest.raises(InvalidParams):
        EnsembleParams.from_N(11, 1, 5, alpha=2)
    with pytest.warns(UserWarning):
        EnsembleParams.from_N(11, 1, 8)


def test_sampling_is_deterministic_and_stream_dependent():
    p = EnsembleParams.from_N(501, 20, 15, seed=7)
    a, b = sample_graph(p, 3), sample_graph(p, 3)
    assert a.edges == b.edges
    assert sample_graph(p, 4).edges != a.edges
    other = EnsembleParams.from_N(501, 20, 15, seed=8)
    assert sample_graph(other, 3).edges != a.edges


def test_empty_and_complete_graphs():
    empty = sample_graph(EnsembleParams.from_N(301, 0.0, 10.0))
    assert empty.n_edges == 0
    flat = EnsembleParams.from_N(9, 9.0, 9.0, kernel=WeightFunction("zero"))
    g = sample_graph(flat)
    assert g.n_edges == 9 * 8 // 2


def test_expected_edges_matches_pair_sum():
    p = EnsembleParams.from_N(201, 7.0, 12.0)
    brute = sum(edge_probability(i, j, p) for i in range(-100, 101) for j in range(i + 1, 101))
    assert p.expected_edges() == pytest.approx(brute, rel=1e-10)


def test_mean_edge_count_monte_carlo():
    p = EnsembleParams.from_N(2001, 4.0, 50.0, seed=11)
    counts = np.array([sample_graph(p, r).n_edges for r in range(500)], dtype=float)
    se = counts.std(ddof=1) / math.sqrt(counts.size)
    assert abs(counts.mean() - p.expected_edges()) < 3 * se


def test_pair_inclusion_frequencies():
    # mixes the dense (per-pair uniform) and sparse (binomial + positions) code paths
    p = EnsembleParams.from_N(21, 6.0, 3.0, seed=5)
    reps = 100_000
    N, n = p.N, p.n
    hits = np.zeros((N, N))
    for r in range(reps):
        g = sample_graph(p, r)
        hits[g.rows, g.cols] += 1
    worst = 0.0
    for i in range(N):
        for j in range(i + 1, N):
            pr = edge_probability(i - n, j - n, p)
            if pr * reps < 5:
                continue
            z = (hits[i, j] - reps * pr) / math.sqrt(reps * pr * (1 - pr))
            worst = max(worst, abs(z))
    # Bonferroni over 210 pairs at the 1e-4 family level
    assert worst < 5.0


def test_reflection_symmetry():
    p = EnsembleParams.from_N(401, 30, 20, seed=3)
    left = right = 0
    for r in range(200):
        g = sample_graph(p, r)
        mid = g.rows + g.cols - 2 * p.n
        left += int(np.sum(mid < 0))
        right += int(np.sum(mid > 0))
    assert abs(left - right) < 4 * math.sqrt(left + right)


def test_weighted_graph_weights():
    p = EnsembleParams.from_N(301, 30, 10, alpha=1, seed=1)
    g = sample_graph(p)
    d = g.cols - g.rows
    assert np.allclose(g.weights, 1 + (d / 10.0) ** 2)


def test_sparse_graph_validation_and_roundtrip():
    with pytest.raises(SelfLoop):
        SparseGraph(5, [1], [1])
    with pytest.raises(InvalidVertex):
        SparseGraph(5, [0], [5])
    with pytest.raises(InvalidParams):
        SparseGraph(5, [0, 1], [1, 0])
    g = SparseGraph(7, [3, 0, 1], [1, 2, 5], [2.0, 1.5, 3.25])
    assert g.edges == [(-3, -1), (-2, 0), (-2, 2)]
    assert list(g.edge_weights()) == [1.5, 2.0, 3.25]
    h = SparseGraph.from_text(g.to_text())
    assert h.edges == g.edges and np.array_equal(h.weights, g.weights)
    u = SparseGraph(4, [0], [3])
    assert SparseGraph.from_text(u.to_text()).weights is None


@given(st.integers(0, 2**32), st.floats(0.5, 30), st.floats(1, 20))
def test_sampled_graph_roundtrip_property(seed, c, R):
    p = EnsembleParams.from_N(61, c, R, alpha=1, seed=seed)
    g = sample_graph(p, 0)
    assert np.all(g.rows < g.cols)
    h = SparseGraph.from_text(g.to_text())
    assert h.edges == g.edges
    assert np.allclose(h.weights, g.weights)


def test_regime_resolution_examples():
    r = resolve_regime(RegimeSpec("Y2", s=1.0), 2001)
    assert r.cR_over_N == pytest.approx(1.0, rel=1e-12)
    assert r.R == round(math.sqrt(2001))
    r = resolve_regime(RegimeSpec("Xiv", Lambda=3.0, delta=0.6), 100001)
    assert r.c3R2_over_N2 == pytest.approx(3.0, rel=0.01)
    assert r.c2R_over_N2 < 0.05
    r = resolve_regime(RegimeSpec("Xii", s=1.0, R=50), 10001)
    assert r.c2R_over_N2 == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(InfeasibleRegime):
        resolve_regime(RegimeSpec("Y1", s=5000.0), 101)
    with pytest.raises(RegimeMismatch):
        resolve_regime(RegimeSpec("Xiv", Lambda=300.0, delta=0.5), 101)
    with pytest.raises(InvalidParams):
        RegimeSpec("Xiv", s=1.0)
    with pytest.raises(InvalidParams):
        RegimeSpec("Y9", s=1.0)


def test_ratios():
    r = ratios(1001, 10.0, 20.0)
    assert r.cR_over_N == pytest.approx(200 / 1001)
    assert r.c3R2_over_N2 == pytest.approx(1000 * 400 / 1001**2)
