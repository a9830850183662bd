import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypdilog.dilog import PI2_6, lasso
from hypdilog.errors import DomainError, InconclusiveError
from hypdilog.quadrature import (
    OmegaParams,
    _inner_as_printed,
    _inner_closed,
    _j,
    _j_prime,
    closed_form_candidates,
    inner_integral,
    omega_integrand,
    omega_volume,
    omega_volume_detail,
    resolve_closed_form_variant,
    resolve_over_grid,
)

SYMMETRIC = OmegaParams(2.0, 4.0)


def _random_params(n, seed):
    rng = np.random.default_rng(seed)
    c = 1.0 + rng.uniform(0.05, 4.0, n)
    d = c * rng.uniform(1.1, 5.0, n)
    return [OmegaParams(float(a), float(b)) for a, b in zip(c, d)]


def test_symmetric_point_is_pi2_over_6():
    assert omega_volume(SYMMETRIC, "closed") == pytest.approx(PI2_6, abs=1e-15)
    num = omega_volume_detail(SYMMETRIC)
    assert num.value == pytest.approx(PI2_6, abs=1e-6)
    assert num.error < 1e-7


@pytest.mark.parametrize("p", _random_params(5, 7))
def test_numeric_matches_closed(p):
    assert omega_volume(p, "numeric") == pytest.approx(omega_volume(p, "closed"), abs=1e-6)


def test_volume_is_twice_the_lasso():
    l, m = 0.8, 1.3
    p = OmegaParams.from_lasso(l, m)
    assert omega_volume(p, "closed") == pytest.approx(2 * lasso(l, m), rel=1e-12)


@pytest.mark.parametrize("x", [0.01, 0.3, 0.5, 0.9, 0.999])
def test_inner_closed_matches_quadrature(x):
    for p in (SYMMETRIC, OmegaParams(1.3, 9.0)):
        assert inner_integral(x, p, "closed") == pytest.approx(inner_integral(x, p, "numeric"), abs=1e-9)


def test_printed_inner_regrouping_does_not_match():
    # the regrouped line with (x - c)/(x - d) in its last bracket is off
    closed = _inner_closed(0.5, 2.0, 4.0)
    assert closed == pytest.approx(inner_integral(0.5, SYMMETRIC, "numeric"), abs=1e-9)
    assert closed == pytest.approx(1.5489, abs=1e-4)
    assert abs(_inner_as_printed(0.5, 2.0, 4.0) - closed) > 0.5


@given(st.floats(0.05, 0.95), st.floats(0.1, 0.9), st.floats(1.5, 6.0))
@settings(max_examples=50)
def test_j_prime_is_derivative_of_j(x, a_frac, b):
    # J(x; a, b) = 2 L((x - b)/(a - b)) on the interval where its argument is in (0, 1)
    a = a_frac * x
    h = 1e-6
    fd = (_j(x + h, a, b) - _j(x - h, a, b)) / (2 * h)
    assert _j_prime(x, a, b) == pytest.approx(fd, rel=1e-5, abs=1e-7)


def test_variant_resolution_on_grid():
    grid = _random_params(4, 21)
    assert resolve_over_grid(grid) == "CminusD"


def test_variants_differ_away_from_coincidence():
    vals = closed_form_candidates(OmegaParams(1.5, 7.0))
    assert abs(vals["CminusD"] - vals["DminusOne"]) > 1e-3


def test_resolution_inconclusive_when_both_or_none_match():
    p = OmegaParams(1.5, 7.0)
    vals = closed_form_candidates(p)
    with pytest.raises(InconclusiveError):
        resolve_closed_form_variant(p, numeric=vals["CminusD"], tol=10.0)
    with pytest.raises(InconclusiveError):
        resolve_closed_form_variant(p, numeric=vals["CminusD"] + 1.0)


def test_integrand_formula():
    for x in (0.1, 0.5, 0.9):
        for y in (2.1, 3.0, 3.9):
            r = y * (x - 2) * (x - 4) / (x * (y - 2) * (4 - y))
            assert omega_integrand(x, y, SYMMETRIC) == pytest.approx(math.log(abs(r)) / (y - x) ** 2, rel=1e-14)


@pytest.mark.parametrize("c, d", [(0.5, 2.0), (3.0, 2.0), (1.0, 2.0), (2.0, math.inf)])
def test_params_domain(c, d):
    with pytest.raises(DomainError):
        OmegaParams(c, d)


def test_mode_and_point_validation():
    with pytest.raises(DomainError):
        omega_volume(SYMMETRIC, "trapezoid")
    with pytest.raises(DomainError):
        inner_integral(1.5, SYMMETRIC)
    with pytest.raises(DomainError):
        omega_integrand(0.5, 5.0, SYMMETRIC)
