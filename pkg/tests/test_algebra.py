from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_combination, brute_mzv, brute_mzv_exact
from mzv import (
    EliminationError,
    composition,
    divergent_expansion,
    eliminate_divergent,
    normalize,
    one,
    stuffle,
    zeta,
)


def test_zeta_constructor():
    z = zeta(2, 1)
    assert len(z.terms) == 1
    assert z.terms[0].coefficient == 1
    assert z.terms[0].factors == (composition(2, 1),)
    assert zeta(composition(3)) == zeta(3)
    assert z.weight == 3
    assert not z.regularized


def test_combination_arithmetic():
    a = zeta(2, 1)
    assert normalize(a + a) == a.scaled(2)
    assert normalize(a - a).is_zero()
    assert normalize(a.scaled(Fraction(1, 2)) + a.scaled(Fraction(1, 2))) == a
    assert (-a).terms[0].coefficient == -1
    assert one(5).terms[0].factors == ()


def test_product_is_formal_juxtaposition():
    p = zeta(2) * zeta(3)
    assert len(p.terms) == 1
    assert p.terms[0].factors == (composition(2), composition(3))
    # factors are kept in canonical order regardless of operand order
    q = zeta(3) * zeta(2)
    assert normalize(p - q).is_zero()


def test_stuffle_depth_one():
    got = stuffle(composition(2), composition(3))
    want = normalize(zeta(5) + zeta(2, 3) + zeta(3, 2))
    assert got == want


def test_stuffle_depth_two_expansion():
    got = stuffle(composition(2), composition(2, 1))
    want = normalize(
        zeta(2, 2, 1).scaled(2) + zeta(2, 1, 2) + zeta(4, 1) + zeta(2, 3))
    assert got == want


def test_stuffle_exact_reordering():
    # product of truncated sums equals the truncated stuffle expansion
    # exactly: the reordering is a bijection on index tuples
    left, right = composition(2), composition(2, 1)
    prod = brute_mzv_exact(left, 25) * brute_mzv_exact(right, 25)
    expanded = sum(
        t.coefficient * brute_mzv_exact(t.factors[0], 25)
        for t in stuffle(left, right).terms)
    assert prod == expanded


@pytest.mark.parametrize("left,right", [
    ((2,), (3,)),
    ((2, 1), (2,)),
    ((2,), (2, 1, 1)),
    ((2, -1), (3,)),
    ((-2, 1), (-3,)),
])
def test_stuffle_numeric_gate(left, right):
    lc, rc = composition(*left), composition(*right)
    residual = brute_mzv(lc, 200) * brute_mzv(rc, 200) - brute_combination(
        stuffle(lc, rc), 200)
    assert abs(residual) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_stuffle_commutes_and_adds_weight(data):
    parts = st.lists(st.integers(1, 4), min_size=1, max_size=3)
    lc = composition(*data.draw(parts))
    rc = composition(*data.draw(parts))
    ab = stuffle(lc, rc)
    assert ab == stuffle(rc, lc)
    for t in ab.terms:
        assert t.weight == lc.weight + rc.weight


def test_regularized_flag():
    assert zeta(1, 2).regularized
    assert zeta(1).regularized
    assert not zeta(2, 1).regularized
    assert (zeta(2) + zeta(1, 2)).regularized


def test_divergent_expansion_is_the_stuffle_with_one():
    for parts in [(2,), (2, 1), (3, 2)]:
        c = composition(*parts)
        assert divergent_expansion(c) == stuffle(composition(1), c)


def test_eliminate_divergent():
    # zeta(1)*zeta(2) - zeta(1,2) is finite and equals zeta(3) + zeta(2,1)
    comb = normalize(zeta(composition(1)) * zeta(composition(2)) - zeta(1, 2))
    got = eliminate_divergent(comb)
    assert got == normalize(zeta(3) + zeta(2, 1))
    assert not got.regularized


def test_eliminate_divergent_leaves_finite_input_alone():
    comb = normalize(zeta(3) + zeta(2, 1).scaled(2))
    assert eliminate_divergent(comb) == comb


def test_eliminate_divergent_raises_on_true_divergence():
    with pytest.raises(EliminationError):
        eliminate_divergent(zeta(1, 2))
    err = None
    try:
        eliminate_divergent(zeta(composition(1)) * zeta(composition(2)))
    except EliminationError as exc:
        err = exc
    assert err is not None and err.residual is not None


def test_json_round_trip():
    from mzv import combination_from_json
    comb = normalize(zeta(2, 1).scaled(Fraction(3, 2)) - zeta(2) * zeta(3))
    assert combination_from_json(comb.to_json()) == comb
