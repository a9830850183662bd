"""Right-angled hexagon trigonometry for pairs of pants and cut tori.

Index convention used everywhere in the package: for ``{i, j, k} = {1, 2, 3}``,
``m_i`` is the orthogeodesic between boundaries ``L_j`` and ``L_k`` and
``p_i`` is the orthogeodesic from ``L_i`` back to itself.  Python tuples are
0-based, so ``m[0]`` is ``m_1``.

All quantities are computed from the excess ``u_i = cosh(m_i) - 1``, which
has the cancellation-free closed form

    u_i = (cosh(l_i/2) + cosh((l_j - l_k)/2)) / (sinh(l_j/2) sinh(l_k/2)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError

MAX_LENGTH = 500.0


def acosh1p(u: float) -> float:
    """Stable ``arccosh(1 + u)`` for ``u >= 0``."""
    return math.log1p(u + math.sqrt(u * (2.0 + u)))


@dataclass(frozen=True)
class PantsLengths:
    l1: float
    l2: float
    l3: float

    def __post_init__(self):
        for v in (self.l1, self.l2, self.l3):
            if not (v > 0.0) or math.isinf(v):
                raise DomainError(f"pants lengths must be positive and finite, got {self.as_tuple()}")
            if v > MAX_LENGTH:
                raise DomainError(f"boundary length {v} exceeds the overflow guard {MAX_LENGTH}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.l1, self.l2, self.l3)


@dataclass(frozen=True)
class PantsInvariants:
    """Orthogeodesic lengths and substitution variables of a pair of pants.

    Besides ``m``, ``p``, ``x``, ``y`` the record keeps exact complements
    (``omx = 1 - x``, ``omy = 1 - y = 1/cosh^2(m/2)``) and
    ``inv_cosh2_p = 1/cosh^2(p/2)`` so that downstream Rogers-L calls never
    form ``1 - x`` by subtraction.
    """

    lengths: tuple[float, float, float]
    m: tuple[float, float, float]
    p: tuple[float, float, float]
    x: tuple[float, float, float]
    y: tuple[float, float, float]
    omx: tuple[float, float, float] = field(repr=False)
    omy: tuple[float, float, float] = field(repr=False)
    inv_cosh2_p: tuple[float, float, float] = field(repr=False)
    tanh2_p: tuple[float, float, float] = field(repr=False)

    @property
    def m1(self):
        return self.m[0]

    @property
    def m2(self):
        return self.m[1]

    @property
    def m3(self):
        return self.m[2]

    @property
    def p1(self):
        return self.p[0]

    @property
    def p2(self):
        return self.p[1]

    @property
    def p3(self):
        return self.p[2]

    @property
    def inv_cosh2_m(self) -> tuple[float, float, float]:
        return self.omy


def _cosh_excess(li: float, lj: float, lk: float) -> float:
    return (math.cosh(li / 2) + math.cosh((lj - lk) / 2)) / (math.sinh(lj / 2) * math.sinh(lk / 2))


def pants_invariants(l: PantsLengths | tuple) -> PantsInvariants:
    if not isinstance(l, PantsLengths):
        l = PantsLengths(*l)
    ls = l.as_tuple()
    u = tuple(_cosh_excess(ls[i], ls[(i + 1) % 3], ls[(i + 2) % 3]) for i in range(3))
    m = tuple(acosh1p(ui) for ui in u)
    sinh_m = tuple(math.sqrt(ui * (2.0 + ui)) for ui in u)
    p, icp, t2p = [], [], []
    for k in range(3):
        i = (k + 1) % 3
        j = (k + 2) % 3
        ch = math.sinh(ls[i] / 2) * sinh_m[j]  # cosh(p_k / 2)
        p.append(2.0 * acosh1p(ch - 1.0) if ch < 2.0 else 2.0 * math.acosh(ch))
        icp.append(1.0 / (ch * ch))
        t2p.append((ch - 1.0) * (ch + 1.0) / (ch * ch))
    x = tuple(math.exp(-li) for li in ls)
    omx = tuple(-math.expm1(-li) for li in ls)
    y = tuple(ui / (2.0 + ui) for ui in u)
    omy = tuple(2.0 / (2.0 + ui) for ui in u)
    return PantsInvariants(ls, m, tuple(p), x, y, omx, omy, tuple(icp), tuple(t2p))


def sine_rule_ratios(inv: PantsInvariants) -> tuple[float, float, float]:
    return tuple(math.sinh(inv.m[i]) / math.sinh(inv.lengths[i] / 2) for i in range(3))


def perpendicular_residuals(inv: PantsInvariants) -> list[float]:
    """Relative residuals of cosh(p_k/2) = sinh(l_i/2) sinh(m_j) over all orderings."""
    out = []
    for k in range(3):
        for i in range(3):
            if i == k:
                continue
            j = 3 - i - k
            lhs = math.cosh(inv.p[k] / 2)
            rhs = math.sinh(inv.lengths[i] / 2) * math.sinh(inv.m[j])
            out.append(abs(lhs - rhs) / abs(lhs))
    return out


def substitution_residuals(inv: PantsInvariants) -> list[float]:
    """Relative residuals of 1/cosh^2(p_k/2) = (1-y_j)^2 x_i / ((1-x_i)^2 y_j)."""
    out = []
    for k in range(3):
        for i in range(3):
            if i == k:
                continue
            j = 3 - i - k
            rhs = inv.omy[j] ** 2 * inv.x[i] / (inv.omx[i] ** 2 * inv.y[j])
            lhs = inv.inv_cosh2_p[k]
            out.append(abs(lhs - rhs) / abs(lhs))
    return out


def half_cosh_from_arcs(m: tuple[float, float, float]) -> tuple[float, float, float]:
    """Invert the cosine rule: recover cosh(l_i/2) from the three m's.

    The hexagon has alternate sides (l1/2, l2/2, l3/2) and opposite sides
    (m1, m2, m3); the hexagon rule is symmetric under swapping the two
    triples, so cosh(l_i/2) = (cosh m_i + cosh m_j cosh m_k)/(sinh m_j sinh m_k).
    """
    out = []
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        out.append((math.cosh(m[i]) + math.cosh(m[j]) * math.cosh(m[k])) / (math.sinh(m[j]) * math.sinh(m[k])))
    return tuple(out)


@dataclass(frozen=True)
class TorusCutInvariants:
    """Cut pants ``P_A`` of a one-holed torus: boundaries (C, A+, A-) = (c, a, a).

    ``m_A = m_3`` joins C to A+, ``p_A = p_1`` returns from C to C and
    ``q_A = m_1`` joins A+ to A-.  At ``c = 0`` the arcs touching C are
    infinite; the record then stores ``m_A = p_A = inf`` with the relevant
    reciprocal cosh^2 values equal to 0, plus the limiting ratio
    ``cusp_ratio = lim (1/cosh^2(m_A/2)) / (1 - e^{-c/2}) = tanh(a/2)``.
    """

    c: float
    a: float
    m_A: float
    p_A: float
    q_A: float
    inv_cosh2_m_A: float
    tanh2_m_A: float
    inv_cosh2_p_A: float
    inv_cosh2_q_A: float
    tanh2_q_A: float
    cusp_ratio: float


def torus_cut_invariants(c: float, a: float) -> TorusCutInvariants:
    if not (a > 0.0) or math.isinf(a):
        raise DomainError(f"cut curve length must be positive, got {a!r}")
    if not (c >= 0.0) or math.isinf(c):
        raise DomainError(f"torus boundary length must be non-negative, got {c!r}")
    if a > MAX_LENGTH or c > MAX_LENGTH:
        raise DomainError("length exceeds the overflow guard")
    ratio = math.tanh(a / 2)
    # q_A = m_1: arc between the two copies of A, finite for every c >= 0.
    u1 = (math.cosh(c / 2) + 1.0) / math.sinh(a / 2) ** 2
    q = acosh1p(u1)
    if c == 0.0:
        return TorusCutInvariants(
            0.0, a, math.inf, math.inf, q, 0.0, 1.0, 0.0, 2.0 / (2.0 + u1), u1 / (2.0 + u1), ratio
        )
    inv = pants_invariants(PantsLengths(c, a, a))
    return TorusCutInvariants(
        c,
        a,
        inv.m[2],
        inv.p[0],
        inv.m[0],
        inv.omy[2],
        inv.y[2],
        inv.inv_cosh2_p[0],
        inv.omy[0],
        inv.y[0],
        ratio,
    )
