import math
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from walkcum.combinatorics import integer_partitions
from walkcum.diagrams import (
    LAMBDA,
    MU,
    Census,
    Diagram,
    N_sigma,
    Q_sigma,
    T_table,
    census,
    count_max_tree_diagrams,
    count_min_tree_diagrams,
    count_sigma_prufer,
    count_tree_diagrams_mixed,
    enumerate_diagrams_bruteforce,
    iter_diagrams,
    lambda_diagram_weight,
    mu_diagram_weight,
    sigma_of_cells,
    sigma_profiles,
)
from walkcum.errors import InvalidParams, InvalidProfile, NotTreeType, TooLarge
from walkcum.weights import compute_V, theta2_convolution, triple_product_H

from oracles import mixed_tree_count, walk_tree_count


def test_census_examples():
    c = census(2, 2, LAMBDA)
    assert c.count(3, 4) == 8
    assert c.count(1, 2) == 2
    assert c.maximal_cell == (3, 4)
    m = census(2, 3, MU)
    assert m.count(5, 4) == 18
    assert m.count(3, 3) == 6
    assert census(3, 2, LAMBDA).count(4, 5) == 128


@pytest.mark.parametrize("k,q,kind", [(2, 2, LAMBDA), (2, 3, LAMBDA), (3, 2, LAMBDA), (2, 3, MU)])
def test_census_matches_python_enumeration(k, q, kind):
    cen = census(k, q, kind)
    ref, tree = Counter(), Counter()
    for d in iter_diagrams(k, q, kind):
        ref[(d.E, d.V)] += 1
        tree[(d.E, d.V)] += d.is_tree
    assert cen.counts == dict(ref)
    assert cen.tree == {c: n for c, n in tree.items() if n}


@pytest.mark.parametrize("k,q,kind", [(2, 2, LAMBDA), (2, 3, LAMBDA), (2, 4, LAMBDA), (3, 2, LAMBDA),
                                      (1, 3, MU), (2, 3, MU), (3, 3, MU)])
def test_census_diagonal_and_extremes(k, q, kind):
    cen = census(k, q, kind)
    assert cen.above_diagonal() == {}
    E, V = cen.maximal_cell
    if kind == LAMBDA:
        assert cen.count(E, V) == count_max_tree_diagrams(k, q)
        assert cen.tree_count(1, 2) == count_min_tree_diagrams(k, LAMBDA)
    else:
        assert cen.count(E, V) == 2 ** (k - 1) * 3**k * (2 * k + 1) ** (k - 2) * (k >= 2) + (k == 1)
        assert cen.tree_count(3, 3) == count_min_tree_diagrams(k, MU)


def test_census_worker_split_is_exact():
    assert census(2, 4, LAMBDA, workers=2).counts == census(2, 4, LAMBDA).counts


def test_census_too_large():
    with pytest.raises(TooLarge):
        census(5, 3, LAMBDA)


def test_bruteforce_lists_classes():
    cen, per = enumerate_diagrams_bruteforce(2, 2, LAMBDA)
    assert len(per[(3, 4)]) == 8
    assert all(d.is_maximal for d in per[(3, 4)])
    assert sum(len(v) for v in per.values()) == cen.total
    assert isinstance(cen, Census)


def test_closed_form_examples():
    assert count_max_tree_diagrams(2, 2) == 8
    assert count_max_tree_diagrams(3, 2) == 128
    assert count_tree_diagrams_mixed((1, 1)) == 2
    assert count_tree_diagrams_mixed((1, 2)) == 4
    assert count_tree_diagrams_mixed((2, 1)) == 4
    with pytest.raises(InvalidParams):
        count_tree_diagrams_mixed(())


@pytest.mark.parametrize("rs", [(1, 1), (1, 2), (2, 2), (1, 3), (2, 3), (3, 3), (1, 1, 1), (1, 1, 2), (1, 2, 2)])
def test_mixed_counts_vs_enumeration(rs):
    assert count_tree_diagrams_mixed(rs) == mixed_tree_count(rs)


@pytest.mark.parametrize("q", [1, 2, 3, 4, 5, 6])
def test_T_table_vs_walk_enumeration(q):
    for r in range(1, q + 1):
        assert T_table(q, r) == walk_tree_count(q, r)
    assert T_table(q, 1) == 1
    assert T_table(q, q) == 1


def test_T_examples():
    assert T_table(3, 2) == 2
    with pytest.raises(InvalidParams):
        T_table(3, 4)


@pytest.mark.parametrize("k", range(2, 7))
@pytest.mark.parametrize("q", range(2, 6))
def test_sigma_counts_total(k, q):
    K = k * (q - 1) + 1
    assert sum(count_sigma_prufer(k, q, s) for s in sigma_profiles(k)) == K ** (k - 1)


def test_sigma_examples_and_errors():
    assert count_sigma_prufer(3, 2, (2, 0)) == 12
    assert count_sigma_prufer(3, 2, (0, 1)) == 4
    with pytest.raises(InvalidProfile):
        count_sigma_prufer(3, 2, (1, 0))
    with pytest.raises(InvalidProfile):
        count_sigma_prufer(3, 2, (-1, 1))


@pytest.mark.parametrize("k,q", [(3, 2), (4, 2), (3, 3), (4, 3)])
def test_sigma_counts_vs_tally(k, q):
    from itertools import product

    K = k * (q - 1) + 1
    tally = Counter(sigma_of_cells(c, k) for c in product(range(K), repeat=k - 1))
    for s in sigma_profiles(k):
        assert tally[s] == count_sigma_prufer(k, q, s)


def _bell(n):
    row = [1]
    for _ in range(n):
        new = [row[-1]]
        for v in row:
            new.append(new[-1] + v)
        row = new
    return row[0]


@pytest.mark.parametrize("n", range(1, 9))
def test_N_sigma_sums_to_bell(n):
    assert sum(N_sigma(s) for s in integer_partitions(n)) == _bell(n)


def test_Q_sigma():
    assert Q_sigma((2, 0)) == 1
    assert Q_sigma((0, 1)) == 6


def test_diagram_properties():
    d = Diagram(LAMBDA, 2, 2, (0, 1, 2, 1, 0, 3))
    assert d.E == 3 and d.V == 4 and d.is_tree and d.is_maximal and d.is_connected
    assert d.multiplicity[(0, 1)] == 2
    with pytest.raises(InvalidParams):
        Diagram(LAMBDA, 2, 2, (0, 0, 1, 2, 3, 4))
    with pytest.raises(InvalidParams):
        Diagram(LAMBDA, 2, 2, (0, 1))


def test_lambda_weight():
    d = Diagram(LAMBDA, 2, 2, (0, 1, 2, 1, 0, 3))
    assert lambda_diagram_weight(d, 1) == pytest.approx(compute_V(2, 1) * compute_V(1, 1) ** 2, rel=1e-12)
    assert lambda_diagram_weight(d, 0) == pytest.approx(math.pi**1.5, rel=1e-12)
    with pytest.raises(NotTreeType):
        lambda_diagram_weight(Diagram(MU, 1, 3, (0, 1, 2)), 0)


@pytest.mark.parametrize("alpha", [0, 1])
def test_mu_weight_single_triangle(alpha):
    d = Diagram(MU, 1, 3, (0, 1, 2))
    assert mu_diagram_weight(d, alpha) == pytest.approx(triple_product_H(1 if alpha else 0, alpha), rel=1e-9)


@pytest.mark.parametrize("alpha", [0, 1])
def test_mu_weight_maximal_pair_matches_fourier_route(alpha):
    maxi = [d for d in iter_diagrams(2, 3, MU) if d.is_maximal]
    assert len(maxi) == 18
    ws = {round(mu_diagram_weight(d, alpha), 10) for d in maxi}
    assert len(ws) == 1
    assert 18 * ws.pop() == pytest.approx(theta2_convolution(alpha), rel=1e-8)


def test_mu_weight_rejects_non_tree():
    # three triangles around vertex 0 close a cycle through their shared edges
    d = Diagram(MU, 3, 3, (0, 1, 2, 0, 2, 3, 0, 3, 1))
    assert not d.is_tree
    with pytest.raises(NotTreeType):
        mu_diagram_weight(d, 0)
    assert Diagram(MU, 2, 3, (0, 1, 2, 0, 1, 2)).is_tree


@given(st.integers(1, 3), st.integers(1, 4))
def test_max_count_formula_is_integral(k, q):
    assert count_max_tree_diagrams(k, q) >= 1
