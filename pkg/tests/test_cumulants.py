import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from walkcum.cumulants import (
    CumulantEstimate,
    SampleSet,
    bootstrap_ci,
    cumulants_to_moments,
    estimate_cumulant,
    k_statistics,
    moments_to_cumulants,
    moments_to_cumulants_setpartitions,
    plugin_cumulant,
)
from walkcum.errors import InvalidParams, OrderTooLarge, TooFewReplicas


def _recursion_oracle(m):
    """Cumulants from raw moments via kappa_n = m_n - sum C(n-1, j-1) kappa_j m_{n-j}."""
    kappa = []
    for n in range(1, len(m) + 1):
        acc = m[n - 1]
        for j in range(1, n):
            acc -= math.comb(n - 1, j - 1) * kappa[j - 1] * m[n - j - 1]
        kappa.append(acc)
    return kappa


def _touchard(n, lam):
    # E[X^n] for Poisson(lam) = sum_j S(n, j) lam^j with Stirling numbers of the second kind
    S = [[0] * (n + 1) for _ in range(n + 1)]
    S[0][0] = 1
    for i in range(1, n + 1):
        for j in range(1, i + 1):
            S[i][j] = j * S[i - 1][j] + S[i - 1][j - 1]
    return sum(S[n][j] * lam**j for j in range(n + 1))


def test_poisson_example():
    assert moments_to_cumulants([1, 2, 5, 15]) == [1, 1, 1, 1]
    lam = Fraction(7, 3)
    m = [_touchard(n, lam) for n in range(1, 11)]
    assert moments_to_cumulants(m) == [lam] * 10


def test_constant_variable():
    assert moments_to_cumulants([3, 9, 27, 81]) == [3, 0, 0, 0]


moment_lists = st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=7), min_size=1, max_size=8)


@given(moment_lists)
def test_roundtrip_exact(m):
    assert cumulants_to_moments(moments_to_cumulants(m)) == m
    assert moments_to_cumulants(cumulants_to_moments(m)) == m


@given(moment_lists)
def test_partition_routes_agree(m):
    assert moments_to_cumulants(m) == moments_to_cumulants_setpartitions(m)
    assert moments_to_cumulants(m) == _recursion_oracle(m)


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=8))
def test_roundtrip_floats(m):
    back = cumulants_to_moments(moments_to_cumulants(m))
    scale = max(1.0, max(abs(v) for v in m)) ** len(m)
    assert np.allclose(back, m, rtol=0, atol=1e-11 * scale)


def test_order_too_large():
    with pytest.raises(OrderTooLarge):
        moments_to_cumulants([1] * 21)
    with pytest.raises(OrderTooLarge):
        moments_to_cumulants_setpartitions([1] * 13)
    assert len(moments_to_cumulants([1] * 20)) == 20


@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_kstat_matches_scipy(order):
    x = np.random.default_rng(order).gamma(2.0, 3.0, size=500)
    assert k_statistics(x, order).value == pytest.approx(stats.kstat(x, order), rel=1e-9)


def test_kstat_poisson_recovery():
    x = np.random.default_rng(1).poisson(5.0, size=100_000).astype(float)
    for order in (1, 2, 3):
        est = k_statistics(x, order)
        assert abs(est.value - 5.0) < 3 * est.stderr


def test_kstat_degenerate_samples():
    assert k_statistics(np.full(50, 4.2), 2).value == 0.0
    assert k_statistics(np.full(50, 4.2), 4).stderr == 0.0
    assert k_statistics(np.array([-1.0, 1.0] * 10), 3).value == 0.0
    with pytest.raises(TooFewReplicas):
        k_statistics([1.0, 2.0, 3.0], 3)
    with pytest.raises(InvalidParams):
        k_statistics([1.0, 2.0, 3.0], 5)
    with pytest.raises(InvalidParams):
        SampleSet([1.0, float("nan")])


@given(st.integers(0, 10_000), st.floats(-100, 100), st.floats(0.1, 10), st.integers(2, 4))
def test_kstat_shift_and_scale(seed, shift, scale, order):
    x = np.random.default_rng(seed).exponential(size=60)
    base = k_statistics(x, order).value
    moved = k_statistics(scale * x + shift, order).value
    assert moved == pytest.approx(scale**order * base, rel=1e-7, abs=1e-9)


def test_jackknife_stderr_matches_scipy_variance():
    x = np.random.default_rng(3).normal(size=20_000)
    est = k_statistics(x, 2)
    assert est.stderr == pytest.approx(math.sqrt(stats.kstatvar(x, 2)), rel=0.1)


def test_plugin_estimator():
    x = np.random.default_rng(5).poisson(3.0, size=200_000).astype(float)
    est = plugin_cumulant(x, 5)
    assert est.biased and est.method == "moment-partition"
    assert est.value == pytest.approx(3.0, abs=0.6)
    assert estimate_cumulant(x, 5).biased
    assert not estimate_cumulant(x, 2).biased


def test_bootstrap_behaviour():
    x = np.random.default_rng(0).normal(size=300)
    a = bootstrap_ci(x, 2, B=200, seed=4)
    assert a == bootstrap_ci(x, 2, B=200, seed=4)
    assert a[0] < 1.0 < a[1]
    assert bootstrap_ci(np.full(40, 2.0), 3) == (0.0, 0.0)
    with pytest.raises(InvalidParams):
        bootstrap_ci(x, 2, B=50)


def test_bootstrap_endpoints_stabilize_with_B():
    x = np.random.default_rng(8).exponential(size=400)

    def spread(B):
        ends = np.array([bootstrap_ci(x, 2, B=B, seed=s) for s in range(6)])
        return ends.std(axis=0).max()

    assert spread(4000) < spread(100)


def test_bootstrap_coverage():
    rng = np.random.default_rng(12)
    hits = 0
    trials = 120
    for t in range(trials):
        x = rng.normal(size=200)
        lo, hi = bootstrap_ci(x, 2, B=300, seed=t)
        hits += lo <= 1.0 <= hi
    assert hits / trials >= 0.85


def test_estimate_json_roundtrip():
    e = CumulantEstimate(3, 1.25, 0.5, 400)
    assert CumulantEstimate.from_json(e.to_json()) == e
    with pytest.raises(InvalidParams):
        CumulantEstimate(3, 1.0, 0.1, 10, method="guess")
