import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from walkcum.diagrams import MU, census, count_max_tree_diagrams
from walkcum.ensemble import EnsembleParams
from walkcum.errors import InvalidParams, NoJumpLaw, RootNotBracketed
from walkcum.theory import (
    JumpLaw,
    LimitValue,
    binomial_moment,
    bound_report,
    compound_moment_asymptote,
    compound_poisson_moments,
    cumulant_growth_bound,
    hankel_ok,
    limit_table,
    mean_X3,
    mean_Y,
    min_upsilon_factor,
    phi_1,
    phi_2,
    phi_2_coefficients,
    phi_3,
    poisson_limit_params,
    rho_q,
    theta_2_i,
    theta_2_ii,
    theta_i_unweighted,
    theta_ii_coefficients,
    theta_ii_literal_coefficients,
    theta_ii_unweighted,
    theta_iii,
    xi_1,
    xi_2_twostar,
    xi_3,
)
from walkcum.walks import exact_mean_X3, exact_mean_Y
from walkcum.weights import compute_V, moments_for, triple_product_H

SQPI = math.sqrt(math.pi)


def test_walk_limits_examples():
    assert phi_1(2, 2) == 8
    assert phi_1(3, 2) == 128
    assert phi_1(2, 2, SQPI) == pytest.approx(8 * math.pi**1.5)
    assert phi_3(3) == 4
    assert phi_3(2, SQPI) == pytest.approx(2 * SQPI)
    assert phi_2(2, 2, 1, SQPI) == pytest.approx(73.224, abs=5e-4)


def test_phi2_coefficients_examples():
    assert phi_2_coefficients(2, 2) == {1: 2, 2: 8, 3: 8}


@pytest.mark.parametrize("k", range(1, 5))
@pytest.mark.parametrize("q", range(2, 5))
def test_phi2_endpoints(k, q):
    coef = phi_2_coefficients(k, q)
    K = k * (q - 1) + 1
    assert coef[1] == phi_3(k)
    assert coef[K] == phi_1(k, q)
    assert max(coef) == K


@given(st.fractions(min_value=Fraction(1, 10), max_value=10, max_denominator=20))
def test_phi2_conventions_differ_by_s(s):
    assert phi_2(3, 3, s, convention="printed") == s * phi_2(3, 3, s)


def test_convention_validation():
    with pytest.raises(InvalidParams):
        phi_2(2, 2, 1, convention="other")
    with pytest.raises(InvalidParams):
        phi_2(2, 2, 0)


@pytest.mark.parametrize("q", [2, 3])
@pytest.mark.parametrize("s", [0.5, 2.0])
def test_first_order_calibration_against_lattice_mean(q, s):
    # E[Y]/(cR) tends to phi_2(1, q, s) with V0 = sqrt(pi)
    N, R = 40001, 200.0
    p = EnsembleParams.from_N(N, s * N / R, R)
    ratio = exact_mean_Y(p, q) / (p.c * R)
    assert ratio == pytest.approx(float(phi_2(1, q, s, SQPI)), rel=0.02)


def test_closed_walk_first_order_calibration():
    # closed walks scale with s^2 = c^2 R / N^2
    N, R, s = 40001, 200.0, 1.5
    p = EnsembleParams.from_N(N, s * N / math.sqrt(R), R)
    ratio = exact_mean_X3(p) / (p.c * R)
    H0 = triple_product_H(0, 0)
    assert ratio == pytest.approx(s**2 * H0, rel=0.03)
    assert theta_ii_unweighted(1, s) * H0 == pytest.approx(s**2 * H0)


@pytest.mark.parametrize("k", range(1, 7))
@pytest.mark.parametrize("q", range(1, 5))
def test_weighted_maximal_reduces_to_count(k, q):
    assert xi_1(k, q, 1) == count_max_tree_diagrams(k, q)
    V0 = Fraction(7, 3)
    assert xi_1(k, q, {m: V0 for m in range(0, 2 * k + 2)}) == phi_1(k, q, V0)


def test_weighted_examples():
    V = {1: Fraction(2), 2: Fraction(3), 3: Fraction(5), 4: Fraction(7)}
    for q in range(1, 5):
        assert xi_1(1, q, V) == 2**q
    assert xi_1(2, 2, V) == 8 * 4 * 3
    assert xi_3(2, 2, V) == 14
    assert xi_2_twostar(1, 1) == 18
    assert xi_2_twostar(1, 1, convention="printed") == 18
    assert xi_2_twostar(2, V) == 8 * 4 * 4 * 3 + 8 * 2 * 2 * 5 + 2 * 7
    assert xi_2_twostar(2, V, convention="printed") == 2 * xi_2_twostar(2, V)
    mom = moments_for(1)
    assert float(xi_3(2, 2, mom)) == pytest.approx(2 * 21.5625 * SQPI, rel=1e-10)


def test_closed_walk_unweighted():
    assert theta_i_unweighted(1) == 1
    assert theta_i_unweighted(2) == 18
    # 2^(k-1) 3^k (2k+1)^(k-2) at k = 3 is 4 * 27 * 7
    assert theta_i_unweighted(3) == 756 == census(3, 3, MU).count(7, 5)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_theta_ii_coefficients_match_census(k):
    cen = census(k, 3, MU)
    by_u = {}
    for (E, V), n in cen.tree.items():
        by_u[(E - 1) // 2] = by_u.get((E - 1) // 2, 0) + n
    assert theta_ii_coefficients(k) == by_u
    assert theta_ii_coefficients(k)[k] == theta_i_unweighted(k)


def test_theta_ii_examples():
    assert theta_ii_coefficients(2) == {1: 6, 2: 18}
    assert theta_ii_coefficients(3) == {1: 36, 2: 324, 3: 756}
    assert theta_ii_literal_coefficients(1) == {1: Fraction(1, 6)}
    assert theta_ii_unweighted(1, 2, convention="printed") == Fraction(8, 6)
    assert theta_ii_unweighted(2, 1) == 24


def test_theta_iii_and_second_order():
    H0 = math.pi / math.sqrt(3)
    assert theta_iii(1, 0) == pytest.approx(H0, rel=1e-12)
    assert theta_iii(3, 0) == pytest.approx(36 * H0, rel=1e-12)
    assert theta_2_i(0) == pytest.approx(35.4366, abs=1e-4)
    assert theta_2_i(1) == pytest.approx(226.064, abs=1e-3)
    H2 = triple_product_H(2, 1)
    s = 0.01
    assert theta_2_ii(1, s) / s**2 == pytest.approx(6 * H2, rel=1e-3)
    assert theta_2_ii(1, s, convention="printed") == pytest.approx(s * theta_2_ii(1, s))
    assert theta_2_ii(1, 2.0) == pytest.approx(16 * theta_2_i(1) + 24 * H2)


def test_poisson_limit_params():
    law = poisson_limit_params(3.0, 0, "unit")
    assert law.kind == "poisson" and law.rate == 0.5
    assert law.cumulants == (0.5, 0.5, 0.5, 0.5)
    g = poisson_limit_params(3.0, 0)
    assert g.rate == pytest.approx(3 * math.pi / (6 * math.sqrt(3)))
    w = poisson_limit_params(3.0, 1)
    assert w.kind == "compound_poisson"
    assert w.rate == pytest.approx(0.9069, abs=1e-4)
    assert w.cumulants == pytest.approx((2.3176, 10.614, 104.14, 2186.56), rel=1e-4)
    # compound Poisson cumulants are rate * E[J^j]
    for j, c in enumerate(w.cumulants, start=1):
        assert c == pytest.approx(w.rate * w.jump_moments[j])
    with pytest.raises(NoJumpLaw):
        poisson_limit_params(1.0, 1, H=[1.0, 1.0, 0.5, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0])
    with pytest.raises(InvalidParams):
        poisson_limit_params(-1.0, 0)


def test_compound_poisson_moments_vs_cumulants():
    from walkcum.cumulants import moments_to_cumulants

    rate = Fraction(3, 2)
    jm = [1, Fraction(2), Fraction(5), Fraction(17), Fraction(60), Fraction(300)]
    M = compound_poisson_moments(rate, jm, 5)
    assert moments_to_cumulants(M[1:]) == [rate * m for m in jm[1:]]
    with pytest.raises(InvalidParams):
        compound_poisson_moments(1, [1, 1], 3)


def test_hankel():
    assert hankel_ok([1, 1, 2, 6, 24])
    assert not hankel_ok([1, 2, 1])


def test_means():
    assert mean_Y(1001, 0.0, 10, 2) == 0.0
    assert mean_Y(101, 3.0, 101, 2, kernel="unit") == pytest.approx(101 * 9)
    assert mean_Y(1001, 10, 20, 2) == pytest.approx(1001 * (200 / 1001) ** 2 * math.pi)
    assert mean_X3(1001, 10, 20) == pytest.approx(1000 * 400 / 1001**2 * math.pi / math.sqrt(3))
    assert mean_X3(1001, 10, 20, alpha=1) == pytest.approx(1000 * 400 / 1001**2 * triple_product_H(1, 1))


def test_rho():
    assert rho_q(2) == 2 / math.e
    assert rho_q(3) == pytest.approx(1.5 / math.sqrt(math.e))
    with pytest.raises(InvalidParams):
        rho_q(1)


@pytest.mark.parametrize("n,p", [(5, Fraction(1, 2)), (7, Fraction(1, 3)), (4, Fraction(2, 5))])
def test_binomial_moment_vs_scipy(n, p):
    from scipy import stats

    for order in range(0, 6):
        assert float(binomial_moment(n, p, order)) == pytest.approx(stats.binom(n, float(p)).moment(order), rel=1e-12)


def test_bound_report_fields():
    b = bound_report(2, 2)
    assert b.lhs == 8 and b.slack == 0 and b.rho == 2 / math.e
    assert b.lhs_unoriented == 4
    for k in range(1, 9):
        assert bound_report(k, 2).slack == 0
        for q in (2, 3, 4):
            assert bound_report(k, q).slack_unoriented >= 0
    r = bound_report(2, 3)
    assert (r.lhs, r.rhs) == (18, Fraction(27, 2))
    with pytest.raises(InvalidParams):
        bound_report(3, 1)


def _stirling_row(n):
    S = [[0] * (n + 1) for _ in range(n + 1)]
    S[0][0] = 1
    for i in range(1, n + 1):
        for j in range(1, i + 1):
            S[i][j] = j * S[i - 1][j] + S[i - 1][j - 1]
    return S[n]


def test_unit_jump_moments_are_touchard():
    rate = Fraction(5, 2)
    M = compound_poisson_moments(rate, [1] * 13, 12)
    for n in range(13):
        assert M[n] == sum(c * rate**j for j, c in enumerate(_stirling_row(n)))


def test_degenerate_saddle_point():
    a = compound_moment_asymptote(10, 1 / math.e)
    assert a.omega == pytest.approx(1.0, abs=1e-12)
    assert a.upsilon == pytest.approx((math.e - 1) / math.e, abs=1e-12)


def test_degenerate_ratio_approaches_one_from_below():
    prev = 0.0
    for k in (10, 20, 40, 80):
        a = compound_moment_asymptote(k, 1.0)
        exact = compound_poisson_moments(k, [1] * k, k - 1)[-1]
        r = math.exp((math.log(exact) - a.log_estimate) / k)
        assert prev < r < 1.0
        prev = r


def test_kappa_gaussian_jump_law():
    J = JumpLaw.kappa_gaussian()
    # S'(0) = E J = V2 / V1 and S(0) = 1
    assert J.S(0.0) == pytest.approx(1.0)
    assert J.dS(0.0) == pytest.approx(11 / 6)
    # against the series built from jump moments V_{l+1}/V_1
    mom = moments_for(1)
    series = JumpLaw.from_moments([float(mom[l + 1] / mom[1]) for l in range(30)])
    for x in (0.05, 0.2):
        assert J.S(x) == pytest.approx(series.S(x), rel=1e-9)
        assert J.dS(x) == pytest.approx(series.dS(x), rel=1e-9)


def test_gaussian_jump_estimate_exceeds_exact_moment():
    k = 30
    delta = 11 / 6
    mom = moments_for(1)
    jm = [float(mom[l + 1] / mom[1]) for l in range(k)]
    exact = compound_poisson_moments(k * delta, jm, k - 1)[-1]
    est = compound_moment_asymptote(k, delta, JumpLaw.kappa_gaussian())
    assert est.log_estimate > math.log(exact)


def test_gaussian_jump_monte_carlo_mean():
    # sampled jumps J = 1 + Z^2 with Z of density proportional to (1+x^2) e^{-x^2}
    rng = np.random.default_rng(2)
    g = rng.normal(scale=math.sqrt(0.5), size=400_000)
    keep = rng.random(g.size) < (1 + g**2) / (1 + 8.0)
    z = g[keep & (g**2 < 7)]
    J = 1 + z**2
    assert J.mean() == pytest.approx(compute_V(2, 1) / compute_V(1, 1), rel=0.01)


def test_root_not_bracketed():
    short = JumpLaw.from_moments([1.0, 1.0])
    with pytest.raises(RootNotBracketed):
        compound_moment_asymptote(5, 1.0, short)


def test_min_upsilon_and_growth_bound():
    J = JumpLaw.kappa_gaussian()
    s, val = min_upsilon_factor(J)
    assert val == pytest.approx(J.mean / math.e, rel=1e-9)
    b = cumulant_growth_bound(4, 3, moments_for(1), J)
    assert math.isfinite(b) and b > 0


def test_limit_table_rows():
    rows = limit_table("Y2", 3, 2, s=1.0)
    assert [r.k for r in rows] == [1, 2, 3]
    assert rows[1].value == pytest.approx(73.224, abs=5e-4)
    x = limit_table("Xiv", 3, 3, Lambda=3.0, kernel=None)
    assert x[0].value == pytest.approx(3 * math.pi / (6 * math.sqrt(3)))
    assert isinstance(x[0], LimitValue) and x[0].as_row()["family"] == "Theta"
    with pytest.raises(InvalidParams):
        limit_table("Y2", 2, 2)
    with pytest.raises(InvalidParams):
        limit_table("Z", 2, 2)
