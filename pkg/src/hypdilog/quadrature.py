"""Numerical oracle for the volume of the lasso region in (x, y) coordinates.

The volume is a double integral over x in (0, 1) and y in (c, d) of
ln R / (y - x)^2 with R = |y (x - c)(x - d) / (x (y - c)(y - d))|.  Closed
forms are checked against nested adaptive quadrature.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable

from scipy.integrate import IntegrationWarning, quad

from .dilog import CLOSED_FORM_VARIANTS, omega_bracket, rogers_l
from .errors import DomainError, InconclusiveError, QuadratureError

INNER_TOL = 1e-10
OUTER_TOL = 1e-8
VARIANT_TOL = 1e-5
QUAD_LIMIT = 200
HEAD_CUT = 60.0


@dataclass(frozen=True)
class OmegaParams:
    c: float
    d: float

    def __post_init__(self):
        if not (1.0 < self.c < self.d) or math.isinf(self.d):
            raise DomainError(f"need 1 < c < d, got c={self.c}, d={self.d}")

    @classmethod
    def from_lasso(cls, l: float, m: float) -> "OmegaParams":
        """Parameters of the region whose volume is twice the lasso value La(l, m)."""
        c = math.exp(l)
        return cls(c, c / math.tanh(m / 2.0) ** 2)


def omega_integrand(x: float, y: float, p: OmegaParams) -> float:
    c, d = p.c, p.d
    if not (0.0 < x < 1.0 and c < y < d):
        raise DomainError(f"(x, y) = ({x}, {y}) outside (0,1) x ({c},{d})")
    return _integrand(x, y, c, d)


def _integrand(x: float, y: float, c: float, d: float, ymc: float | None = None, ymd: float | None = None) -> float:
    # ymc, ymd: y - c and y - d when known more accurately than by subtraction
    ymc = y - c if ymc is None else ymc
    ymd = y - d if ymd is None else ymd
    r = abs(y * (x - c) * (x - d) / (x * ymc * ymd))
    return math.log(r) / (y - x) ** 2


def _quad(f, a: float, b: float, tol: float) -> tuple[float, float]:
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            val, err = quad(f, a, b, epsabs=tol, epsrel=0.0, limit=QUAD_LIMIT)
        except IntegrationWarning as exc:
            raise QuadratureError(str(exc).splitlines()[0]) from exc
    if not math.isfinite(val) or err > 10.0 * tol:
        raise QuadratureError(f"quadrature error estimate {err:.3g} exceeds {tol:.3g}")
    return val, err


def _j(x: float, a: float, b: float) -> float:
    return 2.0 * float(rogers_l((x - b) / (a - b)))


def _j_prime(x: float, a: float, b: float) -> float:
    return math.log(abs((x - b) / (a - b))) / (x - a) - math.log(abs((x - a) / (b - a))) / (x - b)


def _inner_closed(x: float, c: float, d: float) -> float:
    return _j_prime(x, 0.0, d) - _j_prime(x, 0.0, c) + 2.0 * _j_prime(x, d, c)


def _inner_as_printed(x: float, c: float, d: float) -> float:
    """The regrouped three-bracket expression in its printed form.

    Kept for the record: its last bracket uses (x - c)/(x - d) where the
    derivation gives (x - c)/(d - c), and it does not match quadrature.
    """
    lg = math.log
    return (
        (lg(abs((x - d) / d)) / x - lg(abs(x / d)) / (x - d))
        - (lg(abs((x - c) / c)) / x - lg(abs(x / c)) / (x - c))
        + 2.0 * (lg(abs((x - c) / (x - d))) / (x - d) - lg(abs((x - d) / (x - c))) / (x - c))
    )


def _inner_numeric(x: float, c: float, d: float, tol: float) -> tuple[float, float]:
    # y = c + h u^2 and y = d - h u^2 flatten the log singularities at both ends
    h = 0.5 * (d - c)

    def left_part(u: float) -> float:
        t = h * u * u
        return 2.0 * h * u * _integrand(x, c + t, c, d, t, c - d + t) if u > 0 else 0.0

    def right_part(u: float) -> float:
        t = h * u * u
        return 2.0 * h * u * _integrand(x, d - t, c, d, d - c - t, -t) if u > 0 else 0.0

    left, e1 = _quad(left_part, 0.0, 1.0, tol / 2)
    right, e2 = _quad(right_part, 0.0, 1.0, tol / 2)
    return left + right, e1 + e2


def inner_integral(x: float, p: OmegaParams, mode: str = "closed", tol: float = INNER_TOL) -> float:
    """Integral over y in (c, d) of the integrand at fixed x."""
    if not (0.0 < x < 1.0):
        raise DomainError(f"x = {x} outside (0, 1)")
    if mode == "closed":
        return _inner_closed(x, p.c, p.d)
    if mode == "numeric":
        return _inner_numeric(x, p.c, p.d, tol)[0]
    raise DomainError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    error: float


def omega_volume_detail(p: OmegaParams, tol: float = OUTER_TOL, inner_tol: float = INNER_TOL) -> VolumeEstimate:
    """Nested quadrature with a conservative error: outer estimate plus inner tolerance."""
    c, d = p.c, p.d

    def w(x: float) -> float:
        return _inner_numeric(x, c, d, inner_tol)[0]

    # x = e^{-v} on (0, 1/2] tames the log growth of the inner integral at 0;
    # the integrand decays like v e^{-v}, so v > HEAD_CUT is below roundoff
    head, e1 = _quad(lambda v: w(math.exp(-v)) * math.exp(-v), math.log(2.0), HEAD_CUT, tol / 2)
    tail, e2 = _quad(w, 0.5, 1.0, tol / 2)
    return VolumeEstimate(head + tail, e1 + e2 + inner_tol)


def omega_volume(p: OmegaParams, mode: str = "closed", tol: float = OUTER_TOL) -> float:
    if mode == "closed":
        return 2.0 * float(omega_bracket(p.c, p.d, "CminusD"))
    if mode == "numeric":
        return omega_volume_detail(p, tol).value
    raise DomainError(f"unknown mode {mode!r}")


def closed_form_candidates(p: OmegaParams) -> dict[str, float]:
    return {v: 2.0 * float(omega_bracket(p.c, p.d, v)) for v in CLOSED_FORM_VARIANTS}


def resolve_closed_form_variant(p: OmegaParams, tol: float = VARIANT_TOL, numeric: float | None = None) -> str:
    """Which printed closed form reproduces the quadrature value at ``p``."""
    if numeric is None:
        numeric = omega_volume(p, "numeric")
    hits = [v for v, val in closed_form_candidates(p).items() if abs(val - numeric) <= tol]
    if len(hits) != 1:
        raise InconclusiveError(f"variants matching within {tol} at {p}: {hits or 'none'}")
    return hits[0]


def resolve_over_grid(grid: Iterable[OmegaParams], tol: float = VARIANT_TOL) -> str:
    """Single consistent winner across a grid, or InconclusiveError."""
    winners = {resolve_closed_form_variant(p, tol) for p in grid}
    if len(winners) != 1:
        raise InconclusiveError(f"no single winning variant: {sorted(winners)}")
    return winners.pop()
