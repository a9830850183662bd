import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hypdilog.errors import DomainError
from hypdilog.fuchsian import build_four_holed, build_torus, holonomy
from hypdilog.spectrum import (
    GEN_BOUNDARY,
    TorusMarking,
    brute_force_torus_curves,
    canonical_slope,
    christoffel_word,
    cyclic_reduce,
    enumerate_fourholed_curves,
    enumerate_torus_curves,
    fourholed_pairing,
    free_reduce,
    markov_move,
    minimal_triple,
    slope_word,
    trace_to_length,
    word_length,
)
from hypdilog.terms import bar_f

EIGHT_PI2 = 8 * math.pi**2


def _kappa(t):
    x, y, z = t
    return x * x + y * y + z * z - x * y * z - 2


FOUR_HOLED = build_four_holed([1.0, 1.5, 2.0, 2.5], 2.0, 0.3)


@pytest.fixture(scope="module")
def four_holed():
    return FOUR_HOLED


# ------------------------------------------------------------------ torus


def test_marking_boundary_length():
    m = TorusMarking(3, 3, 4)
    assert m.c == pytest.approx(2.6339157938496334, rel=1e-14)
    assert TorusMarking(3, 3, 3).c == 0.0


@pytest.mark.parametrize("bad", [(2, 3, 3), (1.5, 3, 3), (3, 3, 8.5)])
def test_marking_rejects_non_hyperbolic(bad):
    with pytest.raises(DomainError):
        TorusMarking(*bad)


@given(st.sampled_from([(3, 3, 4), (3, 4, 5), (2.5, 3, 5), (3.2, 3.3, 6)]), st.integers(0, 2))
def test_markov_move_is_an_involution_preserving_boundary(t, k):
    t = tuple(float(v) for v in t)
    once = markov_move(t, k)
    assert _kappa(once) == pytest.approx(_kappa(t), rel=1e-12)
    assert markov_move(once, k) == pytest.approx(t, rel=1e-12)


def test_minimal_triple_undoes_moves():
    t = (3.0, 3.0, 4.0)
    for k in (2, 0, 1, 2, 0):
        t = markov_move(t, k)
    assert max(t) > 100
    back = minimal_triple(*t)
    assert back.as_tuple() == pytest.approx((3.0, 3.0, 4.0), rel=1e-9)


@given(st.integers(-30, 30), st.integers(0, 30))
def test_christoffel_word_letter_counts(p, q):
    if math.gcd(abs(p), q) != 1:
        with pytest.raises(DomainError):
            christoffel_word(p, q)
        return
    w = christoffel_word(p, q)
    assert sum(1 for x in w if x == 1) == q
    assert sum(1 for x in w if abs(x) == 2) == abs(p)


def test_enumeration_matches_holonomy_oracle():
    marking = TorusMarking(3, 3, 4)
    l_max = 12.0
    tree = enumerate_torus_curves(marking, l_max)
    brute = [r for r in brute_force_torus_curves(marking, 20) if r.a <= l_max]
    assert len(tree) == 34
    # x = y makes lengths come in equal pairs, so compare by slope
    tree_map = {r.slope: r.trace for r in tree}
    brute_map = {r.slope: r.trace for r in brute}
    assert tree_map.keys() == brute_map.keys()
    for s in tree_map:
        assert tree_map[s] == pytest.approx(brute_map[s], rel=1e-9)
    assert all(abs(r.slope[0]) <= 20 and r.slope[1] <= 20 for r in tree)


def test_enumeration_sorted_and_monotone_in_cutoff():
    counts = [len(enumerate_torus_curves((3, 3, 4), lm)) for lm in (4, 6, 8, 10, 12)]
    assert counts == sorted(counts) and counts[0] >= 3
    recs = enumerate_torus_curves((3, 3, 4), 10)
    assert [r.a for r in recs] == sorted(r.a for r in recs)
    assert recs[0].a == pytest.approx(trace_to_length(3.0))


def test_enumeration_accepts_tuple_and_marking():
    a = enumerate_torus_curves((3, 3, 4), 8)
    b = enumerate_torus_curves(TorusMarking(3, 3, 4), 8)
    assert [r.slope for r in a] == [r.slope for r in b]


def test_word_traces_on_concrete_model():
    model = build_torus((3, 3, 4))
    for r in enumerate_torus_curves((3, 3, 4), 9):
        assert abs(holonomy(model, list(r.word)).trace) == pytest.approx(r.trace, rel=1e-9)


def test_canonical_slope():
    assert canonical_slope((2, -3)) == (-2, 3)
    assert canonical_slope((-1, 0)) == (1, 0)
    assert canonical_slope((1, 2)) == (1, 2)


# ------------------------------------------------------------------ words


@given(st.lists(st.sampled_from([1, -1, 2, -2, 3, -3]), max_size=30))
def test_free_reduce_idempotent_and_no_cancelling_pairs(w):
    r = free_reduce(w)
    assert free_reduce(r) == r
    assert all(r[k] != -r[k + 1] for k in range(len(r) - 1))
    c = cyclic_reduce(w)
    assert not c or c[0] != -c[-1] or len(c) == 1


# the side test resolves curves comfortably beyond any desk-scale cutoff
SHORT_SLOPES = [
    (p, q)
    for q in range(13)
    for p in range(-12, 13)
    if math.gcd(abs(p), q) == 1
    and canonical_slope((p, q)) == (p, q)
    and word_length(FOUR_HOLED, slope_word(p, q)) <= 20.0
]


@given(st.sampled_from(SHORT_SLOPES))
def test_braid_images_are_boundary_conjugates(slope):
    p, q = slope
    word = slope_word(p, q)
    assert word == free_reduce(word)
    assert len(cyclic_reduce(word)) >= 2
    # raises unless each braid image reduces to one generator and the four
    # boundary axes split two and two across the curve axis
    (left, right), pair_word = fourholed_pairing(FOUR_HOLED, p, q)
    assert pair_word == word
    assert sorted(left + right) == [1, 2, 3, 4]


def test_slope_word_small_cases():
    assert slope_word(0, 1) == [1, 2]
    assert cyclic_reduce(slope_word(1, 0)) in ([2, 3], [3, 2], [1, 2, 3, -1])


# ------------------------------------------------------------------ four-holed sphere


def test_gluing_curve_is_slope_zero_one(four_holed):
    (left, right), word = fourholed_pairing(four_holed, 0, 1)
    assert {left, right} == {(1, 2), (3, 4)}
    assert word_length(four_holed, word) == pytest.approx(2.0, rel=1e-12)


def test_pairing_depends_on_slope_parity(four_holed):
    seen = {}
    for r in enumerate_fourholed_curves(four_holed, 11.0):
        key = (r.slope[0] % 2, r.slope[1] % 2)
        pair = frozenset(r.pairing)
        assert seen.setdefault(key, pair) == pair
        assert sorted(r.pairing[0] + r.pairing[1]) == [1, 2, 3, 4]
    assert len(set(seen.values())) == len(seen) == 3


def test_pants_carry_boundary_lengths(four_holed):
    b = four_holed.params["boundary"]
    for r in enumerate_fourholed_curves(four_holed, 10.0):
        for pants, pair in zip((r.pants_a, r.pants_b), r.pairing):
            assert (pants.l1, pants.l2) == (b[pair[0] - 1], b[pair[1] - 1])
            assert pants.l3 == r.length


def _farey_traces(model, n):
    """Signed traces of every slope with |p|, q <= n from the trace recursion.

    For Farey neighbours u, v: t(u + v) + t(u - v) + t(u) t(v) equals a
    constant fixed by the parity class of u + v, built from boundary traces.
    Only three short words are evaluated directly.
    """
    a, b, c, d = (holonomy(model, [k]).trace for k in (1, 2, 3, 4))
    d *= np.sign(holonomy(model, [1, 2, 3, 4]).trace)
    theta = {(0, 1): a * b + c * d, (1, 0): b * c + a * d, (1, 1): a * c + b * d}
    t = {s: holonomy(model, cyclic_reduce(slope_word(*s))).trace for s in [(1, 0), (0, 1), (1, 1)]}
    t[(-1, 1)] = theta[(1, 1)] - t[(1, 0)] * t[(0, 1)] - t[(1, 1)]

    def grow(u, v, third):
        w = (u[0] + v[0], u[1] + v[1])
        if abs(w[0]) > n or w[1] > n:
            return
        tu, tv, tt = (t[canonical_slope(s)] for s in (u, v, third))
        t[canonical_slope(w)] = theta[(w[0] % 2, w[1] % 2)] - tu * tv - tt
        grow(u, w, v)
        grow(w, v, u)

    grow((1, 0), (1, 1), (0, 1))
    grow((1, 1), (0, 1), (1, 0))
    grow((-1, 0), (-1, 1), (0, 1))
    grow((-1, 1), (0, 1), (-1, 0))
    return t


def test_lengths_match_trace_recursion(four_holed):
    traces = _farey_traces(four_holed, 12)
    recs = enumerate_fourholed_curves(four_holed, 16.0)
    for r in recs:
        assert r.length == pytest.approx(trace_to_length(traces[r.slope]), rel=1e-10)
    inside = {s for s, tr in traces.items() if trace_to_length(tr) <= 16.0}
    assert inside == {r.slope for r in recs}


def test_enumeration_complete_against_larger_box(four_holed):
    l_max = 10.0
    got = {r.slope for r in enumerate_fourholed_curves(four_holed, l_max)}
    want = set()
    for q in range(0, 13):
        for p in range(-12, 13):
            if math.gcd(abs(p), q) != 1 or canonical_slope((p, q)) != (p, q):
                continue
            if word_length(four_holed, slope_word(p, q)) <= l_max:
                want.add((p, q))
    assert got == want


def test_partial_sums_monotone_and_bounded(four_holed):
    recs = enumerate_fourholed_curves(four_holed, 12.0)
    terms = [bar_f(r.pants_a).value + bar_f(r.pants_b).value for r in recs]
    partial = np.cumsum(terms)
    assert np.all(np.diff(partial) > 0)
    assert partial[-1] < EIGHT_PI2


def test_twist_changes_other_curves_only():
    a = build_four_holed([1.0, 1.5, 2.0, 2.5], 2.0, 0.0)
    b = build_four_holed([1.0, 1.5, 2.0, 2.5], 2.0, 0.7)
    assert word_length(a, slope_word(0, 1)) == pytest.approx(word_length(b, slope_word(0, 1)), rel=1e-12)
    assert abs(word_length(a, slope_word(1, 0)) - word_length(b, slope_word(1, 0))) > 1e-3


def test_generator_boundary_labels(four_holed):
    b = four_holed.params["boundary"]
    for k, bnd in GEN_BOUNDARY.items():
        assert word_length(four_holed, [k]) == pytest.approx(b[bnd - 1], rel=1e-10)


def test_enumeration_rejects_other_models():
    with pytest.raises(DomainError):
        enumerate_fourholed_curves(build_torus((3, 3, 4)), 5.0)
