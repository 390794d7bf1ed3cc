import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from walkcum.diagrams import LAMBDA, MU, Diagram, count_max_tree_diagrams, iter_diagrams
from walkcum.errors import InvalidParams, NotTreeType
from walkcum.prufer import (
    PruferCode,
    all_codes,
    alphabet,
    prufer_decode,
    prufer_decode_rooted,
    prufer_encode,
    random_code,
)

CASES = [(2, 2, LAMBDA), (2, 3, LAMBDA), (3, 2, LAMBDA), (2, 3, MU), (3, 3, MU)]


def _maximal(k, q, kind):
    return [d for d in iter_diagrams(k, q, kind) if d.is_maximal]


def test_alphabet():
    assert alphabet(2, 2) == ["0", "a1", "b1"]
    assert alphabet(3, 3) == ["0", "a1", "a2", "b1", "b2", "c1", "c2"]


@pytest.mark.parametrize("k,q,kind", CASES)
def test_encoding_is_a_bijection(k, q, kind):
    maxi = _maximal(k, q, kind)
    K = k * (q - 1) + 1
    if kind == LAMBDA:
        assert len(maxi) == count_max_tree_diagrams(k, q)
    seen = {}
    for d in maxi:
        for edge in d.multiplicity:
            code = prufer_encode(d, edge)
            assert code not in seen
            seen[code] = (d, edge)
            back, root = prufer_decode_rooted(code)
            assert back == d and tuple(sorted(root)) == edge
    assert len(seen) == len(maxi) * K
    total = sum(1 for _ in all_codes(k, q, kind))
    assert total == len(seen)


@pytest.mark.parametrize("k,q,kind", CASES)
def test_decoding_is_total(k, q, kind):
    for code in all_codes(k, q, kind):
        d, root = prufer_decode_rooted(code)
        assert d.is_maximal and d.k == k
        assert prufer_encode(d, root) == code


def test_single_element():
    d = Diagram(LAMBDA, 1, 3, (0, 1, 2, 3))
    code = prufer_encode(d, (1, 2))
    assert code.cells == () and code.orient == ()
    assert prufer_decode(code) == d


@given(st.integers(0, 2**32))
def test_random_roundtrip_five_walks_of_three_steps(seed):
    code = random_code(5, 3, LAMBDA, random.Random(seed))
    d, root = prufer_decode_rooted(code)
    assert d.is_maximal and d.E == 5 * 2 + 1
    assert prufer_encode(d, root) == code


@given(st.integers(0, 2**32))
def test_random_roundtrip_triangles(seed):
    code = random_code(4, 3, MU, random.Random(seed))
    d, root = prufer_decode_rooted(code)
    assert d.is_maximal
    assert prufer_encode(d, root) == code


def test_non_maximal_rejected():
    d = Diagram(LAMBDA, 2, 2, (0, 1, 0, 1, 0, 1))
    with pytest.raises(NotTreeType):
        prufer_encode(d, (0, 1))
    maxi = _maximal(2, 2, LAMBDA)[0]
    with pytest.raises(InvalidParams):
        prufer_encode(maxi, (0, 9))


def test_code_validation_and_serialization():
    with pytest.raises(InvalidParams):
        PruferCode(2, 2, LAMBDA, (5,), (0, 0), (0,))
    code = random_code(4, 3, LAMBDA, random.Random(1))
    assert PruferCode.from_dict(code.to_dict()) == code
    assert all(s in alphabet(4, 3) for s in code.symbols)
