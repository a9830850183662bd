import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hypdilog.errors import DomainError
from hypdilog.geoflow.mc import pants_groups, pants_theory
from hypdilog.spectrum import enumerate_torus_curves
from hypdilog.terms import (
    F_VARIANTS,
    FOUR_PI2,
    bar_f,
    cusp_limit_f,
    f_pants,
    f_value,
    g_from_cuts,
    g_torus,
    hat_f,
)

EQ = 2 * math.acosh(2)
# mpmath oracle at 40 digits, written independently of the package
REFERENCE = {
    (EQ, EQ, EQ): (1.1348133631900327, 5.4680438835182883, 18.249245297240756),
    (1.0, 2.0, 3.0): (2.7028097392308339, 4.9309774376875626, 14.598182030068448),
    (2.0, 2.0, 2.0): (2.6191690713505165, 8.096789378090824, 20.383205555759797),
}
G14_334_AT_12 = 13.15161647996238

length = st.floats(0.1, 10.0)
triples = st.tuples(length, length, length)


@pytest.mark.parametrize("ls", list(REFERENCE))
def test_reference_values(ls):
    f, hat, bar = REFERENCE[ls]
    assert f_value(ls) == pytest.approx(f, rel=1e-13)
    assert hat_f(ls).value == pytest.approx(hat, rel=1e-13)
    assert bar_f(ls).value == pytest.approx(bar, rel=1e-13)


@given(triples)
def test_printed_forms_agree(ls):
    vals = [f_pants(ls, v).value for v in F_VARIANTS]
    assert max(vals) - min(vals) <= 1e-9


def test_printed_forms_agree_vectorised_sweep():
    rng = np.random.default_rng(11)
    worst = 0.0
    for ls in rng.uniform(0.1, 10, (2000, 3)):
        vals = [f_pants(tuple(ls), v).value for v in F_VARIANTS]
        worst = max(worst, max(vals) - min(vals))
    assert worst <= 1e-9


@given(triples)
def test_classes_partition_full_measure(ls):
    th = pants_theory(ls)
    coarse = [k for k in pants_groups() if "/" not in k]
    assert math.fsum(th[k] for k in coarse) == pytest.approx(FOUR_PI2, rel=1e-13)


@given(triples)
def test_bordered_chain(ls):
    f = f_value(ls)
    hat = hat_f(ls).value
    bar = bar_f(ls).value
    assert 0 < f < hat < bar < FOUR_PI2


@given(triples)
def test_bordered_differences(ls):
    th = pants_theory(ls)
    hat = hat_f(ls).value - f_value(ls)
    assert hat == pytest.approx(th["H(B1)"] + th["W(L2,M3)"] + th["W(L3,M2)"], rel=1e-10, abs=1e-12)
    extra = bar_f(ls).value - hat_f(ls).value
    want = th["H(B2)"] + th["H(M3)"] + th["W(L1,M3)"] + th["W(L3,M1)"]
    assert extra == pytest.approx(want, rel=1e-10, abs=1e-12)


@given(triples)
def test_f_symmetric(ls):
    a = f_value(ls)
    for perm in [(1, 0, 2), (2, 1, 0), (1, 2, 0)]:
        assert f_value(tuple(ls[i] for i in perm)) == pytest.approx(a, rel=1e-12, abs=1e-13)


@given(triples)
def test_hat_symmetric_in_other_two(ls):
    a = hat_f(ls).value
    b = hat_f((ls[0], ls[2], ls[1])).value
    assert a == pytest.approx(b, rel=1e-12)


def test_components_sum_to_value():
    rep = bar_f((1.0, 2.0, 3.0))
    assert rep.value == math.fsum(v for _, v in rep.components)
    assert rep.formula_variant == "BARF"
    assert rep.to_dict()["value"] == rep.value


def test_unknown_variant():
    with pytest.raises(DomainError):
        f_pants((1, 1, 1), "F99")


def test_torus_sum_reference():
    rep = g_torus((3, 3, 4), 12.0)
    assert rep.value == pytest.approx(G14_334_AT_12, rel=1e-12)
    assert rep.truncation.terms_used == 34


def test_torus_partial_sums_strictly_decreasing():
    rep = g_torus((3, 3, 4), 12.0)
    partial = np.cumsum([v for _, v in rep.components])
    assert np.all(np.diff(partial) < 0)


def test_torus_sum_single_term():
    records = enumerate_torus_curves((3, 3, 4), 12.0)
    one = g_from_cuts([records[0].cut], "G14")
    assert one.truncation.terms_used == 1
    assert one.value < FOUR_PI2


def test_torus_forms_agree_within_truncation():
    a = g_torus((3, 3, 4), 12.0, "G14")
    b = g_torus((3, 3, 4), 12.0, "G15")
    gap = abs(a.value - b.value)
    assert gap <= max(10 * a.truncation.last_term_magnitude, 1e-6)


def test_arc_form_converges_on_cusped_torus():
    # every arc from the cusp is infinite, so G14 is exactly 4 pi^2 and the
    # G15 partial sums must creep up to it
    vals = [g_torus((3, 3, 3), lm, "G15").value for lm in (6, 8, 10, 12, 14)]
    assert g_torus((3, 3, 3), 8, "G14").value == pytest.approx(FOUR_PI2, rel=1e-15)
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert FOUR_PI2 - vals[-1] < 5e-3


def test_g_below_systole():
    with pytest.raises(DomainError):
        g_torus((3, 3, 4), 0.5)


def test_cusp_reference():
    # f(1e-30, 2, 2) stands in for the cusp value
    res = cusp_limit_f(2.0, 2.0, [1e-2, 1e-3, 1e-4])
    assert res.values[-1] == pytest.approx(7.1328212796658621, rel=1e-12)
    cusp = 7.1340195898893305
    # the approach is like eps log eps, so Aitken helps but is not exact
    assert abs(res.extrapolated - cusp) < 0.1 * abs(res.values[-1] - cusp)
    assert res.decreasing


@given(st.floats(0.2, 8), st.floats(0.2, 8))
def test_cusp_differences_decrease(l2, l3):
    assert cusp_limit_f(l2, l3, [1e-2, 1e-3, 1e-4]).decreasing


def test_cusp_sequence_validation():
    with pytest.raises(DomainError):
        cusp_limit_f(1, 1, [1e-3, 1e-2])
    with pytest.raises(DomainError):
        cusp_limit_f(1, 1, [1e-3])
