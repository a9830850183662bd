import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hypdilog.dilog import (
    PI2_6,
    PI2_12,
    lasso,
    lasso_variables,
    lasso_xy,
    lemma55_defect,
    li2,
    omega_bracket,
    pentagon_defect,
    pentagon_variant_defect,
    rogers_l,
    rogers_l_derivative,
    rogers_l_pair,
)
from hypdilog.errors import DomainError

# mpmath at 40 digits: polylog(2, x) and polylog(2, x) + log|x| log(1-x) / 2
LI2_REFERENCE = [
    (-50.0, -9.2769951853326218401),
    (-3.5, -2.1620967990779750951),
    (-0.75, -0.64276126883997887911),
    (0.2, 0.21100377543970477261),
    (0.8, 1.0747946000082483594),
    (0.99, 1.588625448076375327),
]
ROGERS_REFERENCE = [
    (-3.5, -1.2199705668618598223),
    (-0.75, -0.72325698366497824924),
    (0.2, 0.39057162113984142484),
    (0.8, 1.2543624457083850116),
    (0.99, 1.6117672015922313345),
]
# lasso values from the same oracle, La(1, 1) also by direct double integration
LASSO_REFERENCE = [
    (1.0, 1.0, 0.66836228685206922738),
    (0.5, 2.0, 0.99143587199234405484),
    (3.0, 0.2, 0.12743337461430937936),
]

unit = st.floats(min_value=1e-6, max_value=1 - 1e-6)


@pytest.mark.parametrize("x, want", LI2_REFERENCE)
def test_li2_matches_reference(x, want):
    assert li2(x) == pytest.approx(want, rel=2e-15, abs=1e-15)


@pytest.mark.parametrize("x, want", ROGERS_REFERENCE)
def test_rogers_matches_reference(x, want):
    assert rogers_l(x) == pytest.approx(want, rel=2e-15, abs=1e-15)


@pytest.mark.parametrize("l, m, want", LASSO_REFERENCE)
def test_lasso_matches_reference(l, m, want):
    assert lasso(l, m) == pytest.approx(want, rel=1e-14)


def test_special_values():
    assert li2(1.0) == pytest.approx(PI2_6, rel=1e-15)
    assert li2(-1.0) == pytest.approx(-PI2_12, rel=1e-15)
    assert li2(0.0) == 0.0
    assert rogers_l(0.5) == pytest.approx(PI2_12, rel=1e-15)
    assert rogers_l(0.0) == 0.0
    assert rogers_l_pair(1.0, 0.0) == pytest.approx(PI2_6, rel=1e-15)
    golden = (math.sqrt(5) - 1) / 2
    assert rogers_l(golden) == pytest.approx(math.pi**2 / 10, rel=1e-14)
    assert rogers_l(golden**2) == pytest.approx(math.pi**2 / 15, rel=1e-14)


def test_vector_path_matches_scalar():
    xs = np.linspace(-20, 0.999, 301)
    vec = rogers_l(xs)
    assert np.allclose(vec, [rogers_l(float(x)) for x in xs], rtol=1e-14, atol=1e-15)
    vec = li2(xs)
    assert np.allclose(vec, [li2(float(x)) for x in xs], rtol=1e-14, atol=1e-15)


@given(unit)
def test_reflection(x):
    assert abs(rogers_l(x) + rogers_l(1 - x) - PI2_6) < 1e-13


@given(st.floats(min_value=1e-4, max_value=1e4))
def test_negative_argument_inversion(t):
    # L(-t) + L(-1/t) = -pi^2/6
    assert abs(rogers_l(-t) + rogers_l(-1 / t) + PI2_6) < 1e-12


@given(unit, unit)
def test_pentagon(x, y):
    assert abs(pentagon_defect(x, y)) < 1e-12
    assert abs(pentagon_variant_defect(x, y)) < 1e-12


def test_pentagon_vectorized():
    rng = np.random.default_rng(3)
    x, y = rng.random((2, 5000))
    assert np.max(np.abs(pentagon_defect(x, y))) < 1e-12


@given(st.floats(1e-3, 1 - 1e-3))
def test_derivative_against_finite_difference(x):
    h = 1e-5 * min(x, 1 - x)
    fd = (rogers_l(x + h) - rogers_l(x - h)) / (2 * h)
    assert rogers_l_derivative(x) == pytest.approx(fd, rel=1e-5)


@given(unit, unit)
def test_lasso_bracket_identity(s, t):
    assert abs(lemma55_defect(s, t)) < 1e-11


def test_lasso_bracket_at_symmetric_point():
    # c = 2, d = 4 corresponds to s = t = 1/2 and gives pi^2/12
    assert omega_bracket(2.0, 4.0) == pytest.approx(PI2_12, abs=1e-15)
    assert lemma55_defect(0.5, 0.5) == pytest.approx(0.0, abs=1e-15)


def test_closed_form_variants_disagree():
    a = omega_bracket(2.0, 4.0, "CminusD")
    b = omega_bracket(2.0, 4.0, "DminusOne")
    assert abs(a - b) > 1e-3


@given(st.floats(0.01, 30), st.floats(0.01, 30))
def test_lasso_positive_and_bounded(l, m):
    # absolute accuracy is about 1e-16 when the value itself is that small;
    # the four lasso sets of a class, 8 La in total, fit in a pants of measure 4 pi^2
    v = lasso(l, m)
    assert -1e-15 < v < math.pi**2 / 2


@given(st.floats(0.05, 20), st.floats(0.05, 20), st.floats(1.01, 3))
def test_lasso_decreasing_in_length(l, m, k):
    assert lasso(l * k, m) < lasso(l, m)


def test_lasso_limits():
    # both l -> infinity and m -> infinity kill the lasso; m -> 0 leaves L(e^-l)
    assert abs(lasso(60.0, 1.0)) < 1e-20
    assert abs(lasso(1.0, 80.0)) < 1e-20
    assert lasso(1.0, 1e-9) == pytest.approx(rogers_l(math.exp(-1.0)), rel=1e-12)


def test_lasso_is_not_monotone_in_arc_length():
    ms = np.linspace(0.05, 8, 400)
    vals = lasso(np.full_like(ms, 1.0), ms)
    diffs = np.diff(vals)
    assert np.any(diffs > 0) and np.any(diffs < 0)


def test_lasso_variables_complements():
    x, omx, y, omy = lasso_variables(40.0, 45.0)
    assert omx == pytest.approx(1.0) and 0 < omy < 1e-18
    assert x + omx == pytest.approx(1.0) and y + omy == pytest.approx(1.0)
    assert lasso_xy(x, omx, y, omy) == lasso(40.0, 45.0)


@pytest.mark.parametrize(
    "call",
    [
        lambda: rogers_l_pair(1.5, -0.5),
        lambda: lasso(0.0, 1.0),
        lambda: lasso(1.0, -1.0),
        lambda: pentagon_defect(0.0, 0.5),
        lambda: lemma55_defect(1.0, 0.5),
        lambda: omega_bracket(0.5, 2.0),
        lambda: omega_bracket(3.0, 2.0),
        lambda: omega_bracket(2.0, 3.0, "nope"),
        lambda: rogers_l_derivative(1.0),
    ],
)
def test_domain_errors(call):
    with pytest.raises(DomainError):
        call()
