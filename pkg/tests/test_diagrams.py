from fractions import Fraction

import pytest

from conftest import brute_diagram, brute_diagram_richardson
from mzv import (
    Diagram,
    IrreducibleDiagramError,
    build_half_moon,
    build_peacock,
    build_seashell,
    composition,
    diagram_from_json,
    eliminate_zeta1,
    eval_combination,
    normalize,
    one,
    partial_integration_length2,
    partial_integration_length3,
    reduce,
    rewrite_exchange_inner,
    rewrite_integrate_valence2,
    rewrite_partial_integration,
    rewrite_reverse_edge,
    rewrite_three_point,
    shuffle_expansion,
    stuffle,
    zeta,
)
from mzv.diagrams import (
    canonical_key,
    coupling_powers,
    diagrams_equal,
    order_expansion,
)


def value(d, strategy="structural"):
    return reduce(d, strategy=strategy)


def numeric(comb, eps=1e-12):
    return eval_combination(comb, eps).value


def test_builders_pin_edges():
    s = build_seashell((2, 1))
    assert s.vertices == (0, 1)
    assert s.root == 0
    assert s.edges == ((0, 1, 2), (1, 0, 0), (1, 0, 1))
    assert build_seashell((3,)).edges == ((0, 0, 3),)
    hm = build_half_moon(3, 0, 2)
    assert hm.edges == ((0, 1, 3), (1, 0, 0), (1, 0, 2))
    pk = build_peacock((0,), (2,), (2,))
    assert pk.edges == ((0, 1, 0), (1, 0, 2), (1, 0, 2))


def test_builder_validation():
    with pytest.raises(ValueError):
        build_seashell((0, 1))
    with pytest.raises(ValueError):
        build_seashell(composition("-2,1"))
    with pytest.raises(ValueError):
        build_peacock((1,), (), (2,))


def test_canonical_key_and_equality():
    d1 = Diagram((0, 1, 2), 0, ((0, 1, 2), (1, 2, 1), (2, 0, 1)))
    d2 = Diagram((0, 4, 9), 0, ((0, 9, 2), (9, 4, 1), (4, 0, 1)))
    assert diagrams_equal(d1, d2)
    assert canonical_key(d1) == canonical_key(d2)
    d3 = Diagram((0, 1, 2), 0, ((0, 1, 2), (1, 2, 2), (2, 0, 1)))
    assert not diagrams_equal(d1, d3)


def test_json_round_trip():
    d = build_half_moon(3, 0, 2)
    back = diagram_from_json(d.to_json())
    assert back.vertices == d.vertices
    assert back.root == d.root
    assert back.edges == d.edges


def test_coupling_powers():
    assert coupling_powers(build_seashell((2, 1))) == (3, 3)
    assert coupling_powers(build_half_moon(3, 0, 2)) == (5, 3)


def test_structural_seashell_values():
    for k in (2, 3, 4):
        assert value(build_seashell((k,))) == normalize(zeta(k))
    assert value(build_seashell((2, 1))) == normalize(zeta(2, 1))
    assert value(build_seashell((2, 1, 1))) == normalize(zeta(2, 1, 1))
    assert value(build_seashell((3, 2, 1))) == normalize(zeta(3, 2, 1))


def test_structural_half_moon_values():
    for a, b in [(2, 1), (3, 2), (2, 2), (4, 1)]:
        assert value(build_half_moon(a, 0, b)) == normalize(zeta(a, b))


def test_pure_cycle_value():
    cyc = Diagram((0, 1, 2), 0, ((0, 1, 2), (1, 2, 0), (2, 0, 2)))
    assert value(cyc) == normalize(zeta(4))
    assert order_expansion(cyc) == normalize(zeta(4))


def test_order_expansion_needs_zero_chords():
    hm = build_half_moon(2, 1, 2)
    with pytest.raises(IrreducibleDiagramError):
        order_expansion(hm)
    with pytest.raises(IrreducibleDiagramError):
        reduce(hm, strategy="structural")


def test_disconnected_diagram_factorizes():
    d = Diagram((0, 1), 0, ((0, 0, 2), (1, 1, 3)))
    assert value(d) == normalize(zeta(2) * zeta(3))


def test_root_zero_rule_factorizes_double_branch():
    pk = build_peacock((0,), (2,), (2,))
    assert value(pk) == normalize(zeta(2) * zeta(2))
    sh = reduce(pk, strategy="shuffle")
    assert sh == normalize(zeta(2, 2).scaled(2) + zeta(3, 1).scaled(4))
    assert abs(numeric(sh) - numeric(value(pk))) < 1e-12


def test_shuffle_expansion_pins():
    assert shuffle_expansion((2,), (2,)) == normalize(
        zeta(2, 2).scaled(2) + zeta(3, 1).scaled(4))
    assert shuffle_expansion((2,), (3,)) == normalize(
        zeta(2, 3) + zeta(3, 2).scaled(3) + zeta(4, 1).scaled(6))


def test_shuffle_expansion_matches_stuffle_value():
    pairs = [((2,), (2,)), ((2,), (3,)), ((2, 1), (2,)), ((3,), (2, 1))]
    for left, right in pairs:
        sh = shuffle_expansion(left, right)
        st = stuffle(composition(*left), composition(*right))
        assert abs(numeric(sh) - numeric(st)) < 1e-10, (left, right)


def test_reverse_edge_preserves_cycle_value():
    cyc = Diagram((0, 1, 2), 0, ((0, 1, 2), (1, 2, 0), (2, 0, 2)))
    pieces = rewrite_reverse_edge(cyc, 1)
    assert len(pieces) == 3
    total = one(0)
    for coeff, d in pieces:
        total = total + value(d).scaled(coeff)
    assert normalize(total) == normalize(zeta(4))
    # the whole value sits in the fused piece, a 2-cycle
    fused = [d for coeff, d in pieces
             if diagrams_equal(d, Diagram((0, 1), 0, ((0, 1, 2), (1, 0, 2))))]
    assert len(fused) == 1
    zero_pieces = [d for _, d in pieces if value(d).is_zero()]
    assert len(zero_pieces) == 2


def test_reverse_edge_seashell_chord_divergent_pieces():
    # reversing the ordering chord of the (2,1) ladder trades the nested
    # sum for divergent pieces that recombine to it exactly
    s = build_seashell((2, 1))
    zi = [i for i, e in enumerate(s.edges) if e[2] == 0][0]
    total = one(0)
    values = []
    for coeff, d in rewrite_reverse_edge(s, zi):
        v = value(d)
        values.append(v)
        total = total + v.scaled(coeff)
    assert total.regularized
    assert normalize(zeta(composition(1)) * zeta(2)) in values
    assert normalize(zeta(1, 2)) in values
    assert eliminate_zeta1(total) == normalize(zeta(2, 1))


def test_reverse_edge_peacock_trunk():
    pk = build_peacock((0,), (2,), (2,))
    zi = [i for i, e in enumerate(pk.edges) if e[2] == 0][0]
    pieces = rewrite_reverse_edge(pk, zi)
    vals = sorted(str(value(d)) for _, d in pieces)
    assert vals == ["0", "0", str(normalize(zeta(2) * zeta(2)))]
    total = one(0)
    for coeff, d in pieces:
        total = total + value(d).scaled(coeff)
    assert normalize(total) == normalize(zeta(2) * zeta(2))


def test_reverse_edge_validation():
    s = build_seashell((2, 1))
    with pytest.raises(ValueError):
        rewrite_reverse_edge(s, 0)      # label 2, not an ordering kernel
    loop = Diagram((0,), 0, ((0, 0, 0),))
    with pytest.raises(ValueError):
        rewrite_reverse_edge(loop, 0)


def test_integrate_valence2():
    cyc = Diagram((0, 1, 2), 0, ((0, 1, 2), (1, 2, 1), (2, 0, 1)))
    res = rewrite_integrate_valence2(cyc, 1)
    assert len(res) == 1
    coeff, merged = res[0]
    assert coeff == Fraction(1)
    assert merged.vertices == (0, 2)
    assert diagrams_equal(merged, Diagram((0, 2), 0, ((0, 2, 3), (2, 0, 1))))
    assert value(merged) == value(cyc) == normalize(zeta(4))


def test_integrate_valence2_validation():
    cyc = Diagram((0, 1, 2), 0, ((0, 1, 2), (1, 2, 1), (2, 0, 1)))
    with pytest.raises(ValueError):
        rewrite_integrate_valence2(cyc, 0)      # root
    hm = build_half_moon(2, 1, 2)
    with pytest.raises(ValueError):
        rewrite_integrate_valence2(hm, 1)       # two out-edges


def test_partial_integration_half_moon():
    hm = build_half_moon(3, 0, 2)
    pieces = rewrite_partial_integration(hm, 1)
    assert sorted(coeff for coeff, _ in pieces) == [Fraction(-1), Fraction(1)]
    by_coeff = {coeff: d for coeff, d in pieces}
    assert diagrams_equal(by_coeff[Fraction(1)], build_half_moon(2, 1, 2))
    assert diagrams_equal(by_coeff[Fraction(-1)], build_half_moon(3, 1, 1))
    total = one(0)
    for coeff, d in pieces:
        total = total + reduce(d, strategy="auto").scaled(coeff)
    assert normalize(value(hm) - total).is_zero()


def test_partial_integration_needs_raise_target():
    hm = build_half_moon(3, 1, 2)
    with pytest.raises(ValueError):
        rewrite_partial_integration(hm, 1)
    res = rewrite_partial_integration(hm, 1, raise_edge=1)
    assert len(res) == 2


def test_exchange_inner_label_swap():
    d = Diagram((0, 1, 2), 0, ((0, 1, 2), (1, 2, 0), (1, 0, 3), (2, 0, 1)))
    res = rewrite_exchange_inner(d, 2)
    assert len(res) == 1 and res[0][0] == Fraction(1)
    expected = Diagram((0, 1, 2), 0, ((0, 1, 2), (1, 2, 0), (1, 0, 1), (2, 0, 3)))
    assert diagrams_equal(res[0][1], expected)
    # the swap reflects the inner momentum, a box-preserving bijection
    for M in (40, 80):
        assert abs(brute_diagram(d, M) - brute_diagram(res[0][1], M)) < 1e-12


def test_exchange_inner_validation():
    d = Diagram((0, 1, 2), 0, ((0, 1, 2), (1, 2, 0), (1, 0, 3), (2, 0, 1)))
    with pytest.raises(ValueError):
        rewrite_exchange_inner(d, 1)


def test_three_point_emits_seven_terms():
    s3 = build_seashell((2, 1, 1))
    terms = rewrite_three_point(s3, 0)
    assert len(terms) == 7
    assert sum(coeff for coeff, _ in terms) == 1
    assert sorted(coeff for coeff, _ in terms) == [-1, -1, -1, 1, 1, 1, 1]


def test_three_point_out_edge_variant():
    s3 = build_seashell((2, 1, 1))
    rev = Diagram(s3.vertices, s3.root,
                  tuple((b, a, k) for (a, b, k) in s3.edges))
    assert len(rewrite_three_point(rev, 0)) == 7
    cyc = Diagram((0, 1, 2), 0, ((0, 1, 2), (1, 2, 1), (2, 0, 1)))
    with pytest.raises(ValueError):
        rewrite_three_point(cyc, 1)


def test_momentum_sum_oracle_agreement():
    # box-truncated momentum sums with Richardson extrapolation against
    # the reduced values
    cases = [
        (build_seashell((2, 1)), "structural", 0.02),
        (build_seashell((2, 2)), "structural", 5e-3),
        (build_half_moon(3, 0, 2), "structural", 5e-3),
        (build_peacock((0,), (2,), (2,)), "structural", 5e-3),
        (build_half_moon(2, 1, 2), "auto", 5e-3),
    ]
    for d, strategy, tol in cases:
        got = brute_diagram_richardson(d, 100)
        want = numeric(reduce(d, strategy=strategy))
        assert abs(got - want) < tol, (d.edges, got, want)


def test_rightward_reduction_pins():
    assert reduce(build_seashell((2, 1)), strategy="rightward") == normalize(zeta(3))
    r = reduce(build_seashell((3, 2)), strategy="rightward")
    expected = normalize(
        zeta(2) * zeta(3) - zeta(5).scaled(3) + zeta(2, 3).scaled(2)
        + zeta(3, 2) - zeta(4, 1).scaled(3))
    assert r == expected
    assert r == partial_integration_length2(3, 2).rhs


def test_rightward_matches_length3_emitter():
    r = reduce(build_seashell((2, 1, 1)), strategy="rightward")
    p = partial_integration_length3(2, 1, 1, variant="rightward")
    assert r == p.rhs


def test_auto_falls_back_on_loaded_half_moon():
    hm = build_half_moon(2, 1, 2)
    auto = reduce(hm, strategy="auto")
    right = reduce(hm, strategy="rightward")
    assert auto == right
    assert auto == normalize(zeta(5) - zeta(2, 3) + zeta(4, 1))


def test_reduce_trace_and_bad_strategy():
    comb, trace = reduce(build_seashell((2, 1)), strategy="rightward", trace=True)
    assert comb == normalize(zeta(3))
    assert trace and all(isinstance(line, str) for line in trace)
    with pytest.raises(ValueError):
        reduce(build_seashell((2,)), strategy="sideways")
