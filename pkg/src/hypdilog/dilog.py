"""Real dilogarithm, Rogers L-function and the lasso function.

Scalars take a pure ``math`` path (fast for per-sample loops); numpy arrays
take a vectorized path.  Both share the same algorithm:

* ``Li2`` on ``[-1, 1/2]`` by the Bernoulli series in ``u = -log(1 - x)``;
* reflection ``x -> 1 - x`` and inversion ``x -> 1/x`` elsewhere.

Internally, arguments are carried together with their complement ``1 - x``
whenever that complement is known more accurately than by subtraction.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

import numpy as np

from .errors import DomainError

ArrayLike = Union[float, np.ndarray]

PI2_6 = math.pi**2 / 6.0
PI2_12 = math.pi**2 / 12.0


def _bernoulli_numbers(n: int) -> list[Fraction]:
    b = [Fraction(0)] * (n + 1)
    b[0] = Fraction(1)
    for m in range(1, n + 1):
        b[m] = -sum(Fraction(math.comb(m + 1, k)) * b[k] for k in range(m)) / (m + 1)
    return b


_B = _bernoulli_numbers(26)
# Li2 = u - u^2/4 + sum_k B_{2k} u^{2k+1} / (2k+1)!
_SERIES = [float(_B[2 * k] / math.factorial(2 * k + 1)) for k in range(1, 13)]
_SERIES_NP = np.array(_SERIES[::-1])


def _li2_series(u: float) -> float:
    u2 = u * u
    acc = 0.0
    for coef in reversed(_SERIES):
        acc = acc * u2 + coef
    return u - 0.25 * u2 + u * u2 * acc


def _li2_series_vec(u: np.ndarray) -> np.ndarray:
    u2 = u * u
    acc = np.zeros_like(u)
    for coef in _SERIES_NP:
        acc = acc * u2 + coef
    return u - 0.25 * u2 + u * u2 * acc


# ---------------------------------------------------------------- scalar core

def _li2_scalar(x: float) -> float:
    if x > 1.0 or math.isnan(x):
        raise DomainError(f"li2 requires x <= 1, got {x!r}")
    if x == 1.0:
        return PI2_6
    if x < -1.0:
        lx = math.log(-x)
        return -PI2_6 - 0.5 * lx * lx - _li2_series(-math.log1p(-1.0 / x))
    if x <= 0.5:
        return _li2_series(-math.log1p(-x))
    c = 1.0 - x
    return PI2_6 - math.log(x) * math.log(c) - _li2_series(-math.log(x))


def _l_half(t: float) -> float:
    """Rogers L on [0, 1/2]."""
    if t == 0.0:
        return 0.0
    u = -math.log1p(-t)
    return _li2_series(u) - 0.5 * u * math.log(t)


def _l_pair(v: float, c: float) -> float:
    """Rogers L(v) for v in [0, 1] given c = 1 - v accurately."""
    if v <= 0.5:
        return _l_half(v)
    return PI2_6 - _l_half(c)


def _rogers_scalar(x: float) -> float:
    if not x < 1.0:
        raise DomainError(f"rogers_l requires x < 1, got {x!r}")
    if x >= 0.0:
        return _l_pair(x, 1.0 - x)
    # L(x) = -L(x/(x-1)) with x/(x-1) in (0, 1)
    return -_l_pair(x / (x - 1.0), 1.0 / (1.0 - x))


# ---------------------------------------------------------------- vector core

def _l_half_vec(t: np.ndarray) -> np.ndarray:
    safe = np.where(t > 0.0, t, 0.5)
    u = -np.log1p(-safe)
    val = _li2_series_vec(u) - 0.5 * u * np.log(safe)
    return np.where(t > 0.0, val, 0.0)


def _l_pair_vec(v: np.ndarray, c: np.ndarray) -> np.ndarray:
    lo = v <= 0.5
    t = np.where(lo, v, c)
    h = _l_half_vec(np.clip(t, 0.0, 0.5))
    return np.where(lo, h, PI2_6 - h)


def _rogers_vec(x: np.ndarray) -> np.ndarray:
    if np.any(~(x < 1.0)):
        raise DomainError("rogers_l requires every x < 1")
    pos = x >= 0.0
    xp = np.where(pos, x, 0.0)
    xn = np.where(pos, -1.0, x)
    out_pos = _l_pair_vec(xp, 1.0 - xp)
    out_neg = -_l_pair_vec(xn / (xn - 1.0), 1.0 / (1.0 - xn))
    return np.where(pos, out_pos, out_neg)


def _li2_vec(x: np.ndarray) -> np.ndarray:
    if np.any(~(x <= 1.0)):
        raise DomainError("li2 requires every x <= 1")
    out = np.empty_like(x)
    low = x < -1.0
    mid = (x >= -1.0) & (x <= 0.5)
    high = x > 0.5
    if low.any():
        xl = x[low]
        lx = np.log(-xl)
        out[low] = -PI2_6 - 0.5 * lx * lx - _li2_series_vec(-np.log1p(-1.0 / xl))
    if mid.any():
        out[mid] = _li2_series_vec(-np.log1p(-x[mid]))
    if high.any():
        xh = x[high]
        c = 1.0 - xh
        with np.errstate(divide="ignore", invalid="ignore"):
            cross = np.where(c > 0.0, np.log(xh) * np.log(np.where(c > 0, c, 1.0)), 0.0)
        out[high] = PI2_6 - cross - _li2_series_vec(-np.log(xh))
    return out


# ---------------------------------------------------------------- public API

def li2(x: ArrayLike) -> ArrayLike:
    """Real dilogarithm ``Li2(x)`` for ``x <= 1``."""
    if np.ndim(x) == 0:
        return _li2_scalar(float(x))
    return _li2_vec(np.asarray(x, dtype=float))


def rogers_l(x: ArrayLike) -> ArrayLike:
    """Rogers L-function ``Li2(x) + log|x| log(1 - x) / 2`` for ``x < 1``.

    ``L(1) = pi^2/6`` is available as :data:`PI2_6`; ``x = 1`` itself is
    rejected because the defining expression is not evaluated there.
    """
    if np.ndim(x) == 0:
        return _rogers_scalar(float(x))
    return _rogers_vec(np.asarray(x, dtype=float))


# rounding slack tolerated on ratio arguments that are mathematically in [0, 1]
_SLACK = 1e-12


def rogers_l_pair(v: ArrayLike, c: ArrayLike) -> ArrayLike:
    """Rogers L(v) on ``[0, 1]`` given the complement ``c = 1 - v``.

    Use this when ``1 - v`` is available without cancellation (for example
    ``1 - tanh^2(m/2) = 1/cosh^2(m/2)``).  ``v = 1`` is allowed here.
    """
    if np.ndim(v) == 0 and np.ndim(c) == 0:
        v = float(v)
        if not (-_SLACK <= v <= 1.0 + _SLACK):
            raise DomainError(f"rogers_l_pair requires v in [0, 1], got {v!r}")
        return _l_pair(min(max(v, 0.0), 1.0), max(float(c), 0.0))
    v = np.asarray(v, dtype=float)
    c = np.asarray(c, dtype=float)
    if np.any(~((v >= -_SLACK) & (v <= 1.0 + _SLACK))):
        raise DomainError("rogers_l_pair requires v in [0, 1]")
    return _l_pair_vec(np.clip(v, 0.0, 1.0), np.maximum(c, 0.0))


def lasso_xy(x: ArrayLike, omx: ArrayLike, y: ArrayLike, omy: ArrayLike) -> ArrayLike:
    """Lasso function in substitution variables.

    ``La = L(y) - L((1-x)/(1-xy)) + L((1-y)/(1-xy))`` with the complements
    ``omx = 1 - x`` and ``omy = 1 - y`` passed explicitly.
    """
    den = omx + x * omy  # 1 - xy
    a = omx / den
    a_c = x * omy / den
    b = omy / den
    b_c = y * omx / den
    return rogers_l_pair(y, omy) - rogers_l_pair(a, a_c) + rogers_l_pair(b, b_c)


def lasso_variables(l: ArrayLike, m: ArrayLike):
    """Return ``(x, 1-x, y, 1-y)`` for ``x = e^-l`` and ``y = tanh^2(m/2)``."""
    if np.ndim(l) == 0 and np.ndim(m) == 0:
        x = math.exp(-l)
        omx = -math.expm1(-l)
        em = math.exp(-m)
        y = (-math.expm1(-m) / (1.0 + em)) ** 2
        omy = 4.0 * em / (1.0 + em) ** 2
        return x, omx, y, omy
    l = np.asarray(l, dtype=float)
    m = np.asarray(m, dtype=float)
    x = np.exp(-l)
    omx = -np.expm1(-l)
    em = np.exp(-m)
    y = (-np.expm1(-m) / (1.0 + em)) ** 2
    omy = 4.0 * em / (1.0 + em) ** 2
    return x, omx, y, omy


def lasso(l: ArrayLike, m: ArrayLike) -> ArrayLike:
    """Lasso function ``La(l, m)`` for ``l, m > 0``."""
    if np.any(~(np.asarray(l) > 0.0)) or np.any(~(np.asarray(m) > 0.0)):
        raise DomainError("lasso requires l > 0 and m > 0")
    return lasso_xy(*lasso_variables(l, m))


def _check_open_unit(name: str, *vals) -> None:
    for v in vals:
        arr = np.asarray(v)
        if np.any(~((arr > 0.0) & (arr < 1.0))):
            raise DomainError(f"{name} requires arguments in (0, 1)")


def pentagon_defect(x: ArrayLike, y: ArrayLike) -> ArrayLike:
    """Five-term relation residual; zero up to rounding on ``(0,1)^2``."""
    _check_open_unit("pentagon_defect", x, y)
    if np.ndim(x) == 0 and np.ndim(y) == 0:
        x, y = float(x), float(y)
    else:
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    omx, omy = 1.0 - x, 1.0 - y
    den = omx + x * omy  # 1 - xy
    total = (
        rogers_l_pair(x, omx)
        + rogers_l_pair(y, omy)
        + rogers_l_pair(den, x * y)
        + rogers_l_pair(omx / den, x * omy / den)
        + rogers_l_pair(omy / den, y * omx / den)
    )
    return total - 3.0 * PI2_6


def pentagon_variant_defect(x: ArrayLike, y: ArrayLike) -> ArrayLike:
    """Residual of ``L(xy) - L(x) - L(y) + L(x(1-y)/(1-xy)) + L(y(1-x)/(1-xy))``."""
    _check_open_unit("pentagon_variant_defect", x, y)
    if np.ndim(x) == 0 and np.ndim(y) == 0:
        x, y = float(x), float(y)
    else:
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    omx, omy = 1.0 - x, 1.0 - y
    den = omx + x * omy
    return (
        rogers_l_pair(x * y, den)
        - rogers_l_pair(x, omx)
        - rogers_l_pair(y, omy)
        + rogers_l_pair(x * omy / den, omx / den)
        + rogers_l_pair(y * omx / den, omy / den)
    )


CLOSED_FORM_VARIANTS = ("CminusD", "DminusOne")


def omega_bracket(c: ArrayLike, d: ArrayLike, variant: str = "CminusD") -> ArrayLike:
    """Half the closed-form volume for parameters ``1 < c < d``.

    ``CminusD``:   L((d-1)/d) - L((c-1)/c) + 2L((c-1)/(c-d)) - 2L(c/(c-d))
    ``DminusOne``: same with the third argument replaced by (c-1)/(d-1).
    """
    if variant not in CLOSED_FORM_VARIANTS:
        raise DomainError(f"unknown closed-form variant {variant!r}")
    ca, da = np.asarray(c, float), np.asarray(d, float)
    if np.any(~((ca > 1.0) & (da > ca))):
        raise DomainError("omega_bracket requires 1 < c < d")
    if np.ndim(c) == 0 and np.ndim(d) == 0:
        c, d = float(c), float(d)
    else:
        c, d = ca, da
    first = rogers_l_pair((d - 1.0) / d, 1.0 / d) - rogers_l_pair((c - 1.0) / c, 1.0 / c)
    last = rogers_l(c / (c - d))
    if variant == "CminusD":
        third = rogers_l((c - 1.0) / (c - d))
    else:
        third = rogers_l_pair((c - 1.0) / (d - 1.0), (d - c) / (d - 1.0))
    return first + 2.0 * third - 2.0 * last


def lemma55_defect(s: ArrayLike, t: ArrayLike) -> ArrayLike:
    """Difference between the (c, d) bracket and the lasso form at c=1/s, d=1/(st).

    The bracket arguments are written directly in s and t, e.g.
    (c - 1)/(c - d) = -t(1 - s)/(1 - t), so nothing is lost to the
    round trip through c and d when s or t is close to 1.
    """
    _check_open_unit("lemma55_defect", s, t)
    if np.ndim(s) == 0 and np.ndim(t) == 0:
        s, t = float(s), float(t)
    else:
        s, t = np.broadcast_arrays(np.asarray(s, float), np.asarray(t, float))
    oms, omt = 1.0 - s, 1.0 - t
    omst = oms + s * omt  # 1 - st
    bracket = (
        rogers_l_pair(omst, s * t)
        - rogers_l_pair(oms, s)
        + 2.0 * rogers_l(-t * oms / omt)
        - 2.0 * rogers_l(-t / omt)
    )
    return bracket - lasso_xy(s, oms, t, omt)


def rogers_l_derivative(x: ArrayLike) -> ArrayLike:
    """Analytic derivative ``-(log(1-x)/x + log(x)/(1-x)) / 2`` on (0, 1)."""
    _check_open_unit("rogers_l_derivative", x)
    x = np.asarray(x, float) if np.ndim(x) else float(x)
    lg = np.log1p(-x) if isinstance(x, np.ndarray) else math.log1p(-x)
    lx = np.log(x) if isinstance(x, np.ndarray) else math.log(x)
    return -0.5 * (lg / x + lx / (1.0 - x))
