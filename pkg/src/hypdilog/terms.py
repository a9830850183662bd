"""Closed-form terms: f of a pair of pants (three forms), g of a one-holed
torus (two forms, truncated), the bordered corrections and cusp limits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .dilog import PI2_6, lasso_xy, rogers_l_pair
from .errors import DomainError
from .hyptrig import PantsInvariants, PantsLengths, TorusCutInvariants, pants_invariants

FOUR_PI2 = 4.0 * math.pi**2
F_VARIANTS = ("F11", "F12", "F13")
G_VARIANTS = ("G14", "G15")


@dataclass(frozen=True)
class Truncation:
    l_max: float
    terms_used: int
    last_term_magnitude: float


@dataclass
class TermReport:
    value: float
    formula_variant: str
    components: list[tuple[str, float]] = field(default_factory=list)
    truncation: Optional[Truncation] = None

    @classmethod
    def from_components(cls, variant: str, components: list[tuple[str, float]], truncation=None):
        return cls(math.fsum(v for _, v in components), variant, components, truncation)

    def to_dict(self) -> dict:
        out = {
            "value": self.value,
            "formula_variant": self.formula_variant,
            "components": [[k, v] for k, v in self.components],
        }
        if self.truncation is not None:
            t = self.truncation
            out["truncation"] = {
                "l_max": t.l_max,
                "terms_used": t.terms_used,
                "last_term_magnitude": t.last_term_magnitude,
            }
        return out


def _as_invariants(l) -> PantsInvariants:
    if isinstance(l, PantsInvariants):
        return l
    return pants_invariants(l if isinstance(l, PantsLengths) else PantsLengths(*l))


def _l_m(inv: PantsInvariants, i: int) -> float:
    """L(1/cosh^2(m_i/2)), 0-based index."""
    return rogers_l_pair(inv.omy[i], inv.y[i])


def _l_p(inv: PantsInvariants, k: int) -> float:
    """L(1/cosh^2(p_k/2)), 0-based index."""
    return rogers_l_pair(inv.inv_cosh2_p[k], inv.tanh2_p[k])


def _la(inv: PantsInvariants, i: int, j: int) -> float:
    """La(l_i, m_j), 0-based indices."""
    return lasso_xy(inv.x[i], inv.omx[i], inv.y[j], inv.omy[j])


_PAIRS = [(i, j) for i in range(3) for j in range(3) if i != j]


def _f11(inv: PantsInvariants) -> list[tuple[str, float]]:
    comps = [("4pi^2", FOUR_PI2)]
    for i in range(3):
        comps.append((f"-8 L(1/cosh^2(m{i + 1}/2))", -8.0 * _l_m(inv, i)))
    for i in range(3):
        comps.append((f"-8 L(1/cosh^2(p{i + 1}/2))", -8.0 * _l_p(inv, i)))
    for i, j in _PAIRS:
        comps.append((f"-8 La(l{i + 1},m{j + 1})", -8.0 * _la(inv, i, j)))
    return comps


def _ratio_args(inv: PantsInvariants, i: int, j: int):
    x, omx, y, omy = inv.x[i], inv.omx[i], inv.y[j], inv.omy[j]
    den = omx + x * omy  # 1 - x_i y_j
    return (omx / den, x * omy / den), (omy / den, y * omx / den)


def _f12(inv: PantsInvariants) -> list[tuple[str, float]]:
    comps = []
    for i, j in _PAIRS:
        (a, ac), (b, bc) = _ratio_args(inv, i, j)
        comps.append((f"8 L((1-x{i + 1})/(1-x{i + 1}y{j + 1}))", 8.0 * rogers_l_pair(a, ac)))
        comps.append((f"-8 L((1-y{j + 1})/(1-x{i + 1}y{j + 1}))", -8.0 * rogers_l_pair(b, bc)))
    for k in range(3):
        comps.append((f"-8 L(y{k + 1})", -8.0 * rogers_l_pair(inv.y[k], inv.omy[k])))
        comps.append((f"-8 L(1/cosh^2(p{k + 1}/2))", -8.0 * _l_p(inv, k)))
    return comps


def _f13(inv: PantsInvariants) -> list[tuple[str, float]]:
    comps = []
    for i, j in _PAIRS:
        (a, ac), (b, bc) = _ratio_args(inv, i, j)
        # substitution form of 1/cosh^2(p_k/2), evaluated literally from x, y
        s = inv.omy[j] ** 2 * inv.x[i] / (inv.omx[i] ** 2 * inv.y[j])
        tag = f"{i + 1}{j + 1}"
        comps.append((f"8 L(A{tag})", 8.0 * rogers_l_pair(a, ac)))
        comps.append((f"-8 L(B{tag})", -8.0 * rogers_l_pair(b, bc)))
        comps.append((f"-4 L(y{j + 1})", -4.0 * rogers_l_pair(inv.y[j], inv.omy[j])))
        comps.append((f"-4 L(S{tag})", -4.0 * rogers_l_pair(s, 1.0 - s)))
    return comps


_F_FORMS = {"F11": _f11, "F12": _f12, "F13": _f13}


def f_pants(l, variant: str = "F11") -> TermReport:
    """Measure of the full-spine set of a pair of pants."""
    if variant not in _F_FORMS:
        raise DomainError(f"unknown f variant {variant!r}")
    inv = _as_invariants(l)
    return TermReport.from_components(variant, _F_FORMS[variant](inv))


def f_value(l) -> float:
    return f_pants(l, "F11").value


def hat_f(l) -> TermReport:
    """f plus the classes whose spine also spans P when L1 lies on the border."""
    inv = _as_invariants(l)
    comps = _f11(inv)
    comps += [
        ("+8 L(1/cosh^2(p1/2))", 8.0 * _l_p(inv, 0)),
        ("+8 La(l2,m3)", 8.0 * _la(inv, 1, 2)),
        ("+8 La(l3,m2)", 8.0 * _la(inv, 2, 1)),
    ]
    return TermReport.from_components("HATF", comps)


def bar_f(l) -> TermReport:
    """As :func:`hat_f` with both L1 and L2 on the border."""
    inv = _as_invariants(l)
    comps = _f11(inv)
    comps += [
        ("+8 L(1/cosh^2(p1/2))", 8.0 * _l_p(inv, 0)),
        ("+8 L(1/cosh^2(p2/2))", 8.0 * _l_p(inv, 1)),
        ("+8 L(1/cosh^2(m3/2))", 8.0 * _l_m(inv, 2)),
        ("+8 La(l2,m3)", 8.0 * _la(inv, 1, 2)),
        ("+8 La(l3,m2)", 8.0 * _la(inv, 2, 1)),
        ("+8 La(l1,m3)", 8.0 * _la(inv, 0, 2)),
        ("+8 La(l3,m1)", 8.0 * _la(inv, 2, 0)),
    ]
    return TermReport.from_components("BARF", comps)


# ------------------------------------------------------------------ torus


def torus_curve_term(cut: TorusCutInvariants, variant: str) -> float:
    """Contribution of one cut curve A to the G14 sum (subtracted) or G15 sum."""
    a = cut.a
    x_a, omx_a = math.exp(-a), -math.expm1(-a)
    la_a = lasso_xy(x_a, omx_a, cut.tanh2_m_A, cut.inv_cosh2_m_A)
    l_p = rogers_l_pair(cut.inv_cosh2_p_A, 1.0 - cut.inv_cosh2_p_A)
    if variant == "G14":
        return 8.0 * (l_p + 2.0 * la_a)
    if variant != "G15":
        raise DomainError(f"unknown g variant {variant!r}")
    l_m = rogers_l_pair(cut.inv_cosh2_m_A, cut.tanh2_m_A)
    l_q = rogers_l_pair(cut.inv_cosh2_q_A, cut.tanh2_q_A)
    if cut.c > 0.0:
        h = cut.c / 2
        la_c = lasso_xy(math.exp(-h), -math.expm1(-h), cut.tanh2_m_A, cut.inv_cosh2_m_A)
    else:
        # joint limit c -> 0, m_A -> inf with (1/cosh^2(m_A/2)) / (c/2) -> tanh(a/2)
        r = cut.cusp_ratio
        la_c = PI2_6 - rogers_l_pair(1.0 / (1.0 + r), r / (1.0 + r)) + rogers_l_pair(r / (1.0 + r), 1.0 / (1.0 + r))
    return FOUR_PI2 - 8.0 * (2.0 * l_m + l_q + l_p + 2.0 * la_c + 2.0 * la_a)


def g_from_cuts(cuts: Sequence[TorusCutInvariants], variant: str = "G14", l_max: float = math.inf) -> TermReport:
    """Truncated g from an explicit list of cut curves (sorted by length)."""
    if variant not in G_VARIANTS:
        raise DomainError(f"unknown g variant {variant!r}")
    cuts = sorted(cuts, key=lambda ct: ct.a)
    comps: list[tuple[str, float]] = []
    if variant == "G14":
        comps.append(("4pi^2", FOUR_PI2))
    last = 0.0
    for n, cut in enumerate(cuts):
        t = torus_curve_term(cut, variant)
        if variant == "G14":
            comps.append((f"-A{n} (a={cut.a:.12g})", -t))
        else:
            comps.append((f"A{n} (a={cut.a:.12g})", t))
        last = abs(t)
    trunc = Truncation(l_max, len(cuts), last)
    return TermReport.from_components(variant, comps, trunc)


def g_torus(marking, l_max: float, variant: str = "G14", node_cap: int = 10**6) -> TermReport:
    """Truncated g over simple closed geodesics of length <= l_max."""
    from .spectrum import enumerate_torus_curves

    records = enumerate_torus_curves(marking, l_max, node_cap=node_cap)
    if not records:
        raise DomainError(f"l_max={l_max} is below the systole of the marking")
    return g_from_cuts([r.cut for r in records], variant, l_max)


# ------------------------------------------------------------------ cusp limit


@dataclass(frozen=True)
class CuspLimitResult:
    eps: tuple[float, ...]
    values: tuple[float, ...]
    differences: tuple[float, ...]
    cauchy_gap: float
    extrapolated: float

    @property
    def decreasing(self) -> bool:
        d = self.differences
        return all(d[k + 1] < d[k] for k in range(len(d) - 1))


def cusp_limit_f(l2: float, l3: float, eps_sequence: Iterable[float]) -> CuspLimitResult:
    """f(eps, l2, l3) along a decreasing eps sequence, with Aitken extrapolation."""
    eps = tuple(float(e) for e in eps_sequence)
    if len(eps) < 2 or any(e <= 0 for e in eps) or any(eps[k + 1] >= eps[k] for k in range(len(eps) - 1)):
        raise DomainError("eps_sequence must be strictly decreasing and positive, length >= 2")
    vals = tuple(f_value((e, l2, l3)) for e in eps)
    diffs = tuple(abs(vals[k + 1] - vals[k]) for k in range(len(vals) - 1))
    extrap = vals[-1]
    if len(vals) >= 3:
        a, b, c = vals[-3:]
        den = (c - b) - (b - a)
        if den != 0.0:
            extrap = c - (c - b) ** 2 / den
    return CuspLimitResult(eps, vals, diffs, diffs[-1], extrap)
