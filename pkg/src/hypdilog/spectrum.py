"""Simple closed geodesics on the one-holed torus and the four-holed sphere.

Torus curves are indexed by coprime slopes ``(p, q)`` (``p`` copies of B and
``q`` copies of A); traces obey the Markov recursion on the Farey graph.
Four-holed-sphere curves are indexed the same way; their words come from
cutting sequences of straight lines on the flat pillowcase.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Optional

import numpy as np

from .errors import AmbiguityError, BudgetError, DomainError
from .hyptrig import PantsLengths, TorusCutInvariants, torus_cut_invariants

Slope = tuple[int, int]
DEFAULT_NODE_CAP = 10**6
CUSP_TOL = 1e-12


def canonical_slope(s: Slope) -> Slope:
    p, q = s
    if q < 0 or (q == 0 and p < 0):
        return (-p, -q)
    return (p, q)


def _add(a: Slope, b: Slope, k: int = 1) -> Slope:
    return (a[0] + k * b[0], a[1] + k * b[1])


def trace_to_length(tr: float) -> float:
    t = abs(tr) / 2.0
    if t <= 1.0:
        return 0.0
    return 2.0 * math.acosh(t)


# ------------------------------------------------------------------ markings


@dataclass(frozen=True)
class TorusMarking:
    """Fricke trace triple ``(tr A, tr B, tr AB)`` of a one-holed torus."""

    x: float
    y: float
    z: float
    boundary_trace: float = field(init=False)
    c: float = field(init=False)

    def __post_init__(self):
        for v in (self.x, self.y, self.z):
            if not (v > 2.0) or math.isinf(v):
                raise DomainError(f"marking traces must exceed 2, got {(self.x, self.y, self.z)}")
        kappa = self.x**2 + self.y**2 + self.z**2 - self.x * self.y * self.z - 2.0
        scale = max(1.0, self.x * self.y * self.z)
        if kappa > -2.0 + CUSP_TOL * scale:
            raise DomainError(f"boundary trace {kappa} > -2: not a hyperbolic one-holed torus")
        if abs(kappa + 2.0) <= CUSP_TOL * scale:
            kappa = -2.0
        object.__setattr__(self, "boundary_trace", kappa)
        object.__setattr__(self, "c", 2.0 * math.acosh(-kappa / 2.0) if kappa < -2.0 else 0.0)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


def markov_move(t: tuple[float, float, float], k: int = 2) -> tuple[float, float, float]:
    """Replace coordinate ``k`` by (product of the other two) - itself."""
    t = list(t)
    i, j = [n for n in range(3) if n != k]
    t[k] = t[i] * t[j] - t[k]
    return tuple(t)


def minimal_triple(x: float, y: float, z: float) -> TorusMarking:
    """Reduce a trace triple to its sum-minimal representative (sorted ascending)."""
    start = TorusMarking(x, y, z)
    t = start.as_tuple()
    for _ in range(10000):
        best = None
        for k in range(3):
            cand = markov_move(t, k)
            if cand[k] <= 2.0:
                raise DomainError(f"reduction reached a trace <= 2 at {cand}: not discrete")
            if cand[k] < t[k] - 1e-12 * t[k] and (best is None or sum(cand) < sum(best)):
                best = cand
        if best is None:
            break
        t = best
    else:
        raise BudgetError("minimal_triple did not terminate")
    a, b, c = sorted(t)
    return TorusMarking(a, b, c)


# ------------------------------------------------------------------ torus curves


def christoffel_word(p: int, q: int) -> list[int]:
    """Primitive word with |p| letters B^{sign p} and q letters A (q >= 0).

    Letters are signed generator indices: 1 = A, 2 = B, negatives are inverses.
    """
    if gcd(abs(p), abs(q)) != 1:
        raise DomainError(f"slope {(p, q)} is not primitive")
    if q < 0:
        p, q = -p, -q
    n = abs(p) + q
    b = 2 if p >= 0 else -2
    ap = abs(p)
    word = []
    for k in range(1, n + 1):
        word.append(b if (k * ap) // n - ((k - 1) * ap) // n == 1 else 1)
    return word


@dataclass(frozen=True)
class SimpleCurveRecord:
    slope: Slope
    trace: float
    a: float
    cut: TorusCutInvariants
    word: tuple[int, ...]


def _torus_record(marking: TorusMarking, slope: Slope, trace: float) -> SimpleCurveRecord:
    a = trace_to_length(trace)
    return SimpleCurveRecord(slope, trace, a, torus_cut_invariants(marking.c, a), tuple(christoffel_word(*slope)))


def enumerate_torus_curves(marking: TorusMarking, l_max: float, node_cap: int = DEFAULT_NODE_CAP) -> list[SimpleCurveRecord]:
    """All unoriented simple closed geodesics of length <= l_max, sorted by length.

    Best-first search over the Farey graph.  Around a vertex ``v`` the
    neighbours ``s + n v`` carry traces ``t_{n+1} = t_v t_n - t_{n-1}``,
    a convex sequence; each chain is walked until the trace exceeds the
    bound and is increasing.  The sub-level set of the trace function is
    connected, so the search is complete once it starts from the minimum,
    which is reached first by Markov descent.
    """
    if not isinstance(marking, TorusMarking):
        marking = TorusMarking(*marking)
    if not (l_max > 0):
        raise DomainError("l_max must be positive")
    tmax = 2.0 * math.cosh(l_max / 2.0)
    # descent from the marking triangle to the sum-minimal triangle, tracking slopes
    tri = [((0, 1), marking.x), ((1, 0), marking.y), ((1, 1), marking.z)]
    for _ in range(100000):
        improved = False
        for k in range(3):
            (si, ti), (sj, tj) = [tri[n] for n in range(3) if n != k]
            sk, tk = tri[k]
            tnew = ti * tj - tk
            if tnew < tk * (1 - 1e-14):
                plus = canonical_slope(_add(si, sj))
                snew = _add(si, sj, -1) if plus == canonical_slope(sk) else _add(si, sj)
                tri[k] = (canonical_slope(snew), tnew)
                improved = True
                break
        if not improved:
            break
    else:
        raise BudgetError("Markov descent did not terminate")

    found: dict[Slope, float] = {}
    heap: list = []
    counter = 0
    # a queued vertex w carries two further vertices (v, u) of a Farey triangle
    for k in range(3):
        sk, tk = tri[k]
        (sv, tv), (su, tu) = tri[(k + 1) % 3], tri[(k + 2) % 3]
        counter += 1
        heapq.heappush(heap, (tk, counter, sk, tk, sv, tv, su, tu))

    nodes = 0
    expanded: set[Slope] = set()
    while heap:
        _, _, w, tw, v, tv, u, tu = heapq.heappop(heap)
        if w in expanded:
            continue
        if tw > tmax:
            continue
        found[w] = tw
        expanded.add(w)
        # neighbours of w form the chain N_n = v + n*step with N_1 = u (as vectors)
        if canonical_slope(_add(u, v, -1)) != w:
            u = (-u[0], -u[1])
            if canonical_slope(_add(u, v, -1)) != w:
                raise AssertionError("inconsistent Farey triangle")
        step = _add(u, v, -1)
        for direction in (1, -1):
            if direction == 1:
                prev_s, prev_t, cur_s, cur_t = v, tv, u, tu
            else:
                prev_s, prev_t, cur_s, cur_t = u, tu, v, tv
            while True:
                nodes += 1
                if nodes > node_cap:
                    raise BudgetError(f"torus enumeration exceeded node cap {node_cap}")
                cs = canonical_slope(cur_s)
                if cur_t <= tmax and cs not in expanded:
                    counter += 1
                    heapq.heappush(heap, (cur_t, counter, cs, cur_t, w, tw, canonical_slope(prev_s), prev_t))
                if cur_t > tmax and cur_t > prev_t:
                    break
                nxt_s = _add(cur_s, step, direction)
                nxt_t = tw * cur_t - prev_t
                prev_s, prev_t, cur_s, cur_t = cur_s, cur_t, nxt_s, nxt_t
    records = [_torus_record(marking, s, t) for s, t in found.items()]
    records.sort(key=lambda r: (r.a, r.slope))
    return records


def brute_force_torus_curves(marking: TorusMarking, q_max: int) -> list[SimpleCurveRecord]:
    """Independent oracle: every primitive slope with |p|, q <= q_max, traced by holonomy.

    Builds the concrete Fuchsian model of the marking and evaluates the trace
    of the Christoffel word of each slope.  Meant for tests only.
    """
    from .fuchsian.models import build_torus, holonomy

    if q_max < 1:
        raise DomainError("q_max must be >= 1")
    model = build_torus(marking)
    out = []
    for q in range(0, q_max + 1):
        for p in range(-q_max, q_max + 1):
            if gcd(abs(p), q) != 1 or canonical_slope((p, q)) != (p, q):
                continue
            word = christoffel_word(p, q)
            tr = abs(holonomy(model, word).trace)
            out.append(SimpleCurveRecord((p, q), tr, trace_to_length(tr), torus_cut_invariants(marking.c, trace_to_length(tr)), tuple(word)))
    out.sort(key=lambda r: (r.a, r.slope))
    return out


# ------------------------------------------------------------------ four-holed sphere

# generator k of the four-holed model is the holonomy of boundary GEN_BOUNDARY[k]
GEN_BOUNDARY = {1: 2, 2: 1, 3: 4, 4: 3}
SIDE_TOL = 1e-9


@dataclass(frozen=True)
class FourHoledCurveRecord:
    slope: Slope
    length: float
    pairing: tuple[tuple[int, int], tuple[int, int]]
    pants_a: PantsLengths
    pants_b: PantsLengths
    word: tuple[int, ...]


def free_reduce(word) -> list[int]:
    out: list[int] = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return out


def cyclic_reduce(word) -> list[int]:
    w = free_reduce(word)
    i, j = 0, len(w) - 1
    while i < j and w[i] == -w[j]:
        i += 1
        j -= 1
    return w[i : j + 1]


def _invert(word) -> list[int]:
    return [-x for x in reversed(word)]


# Artin action of the half twists on (x1, x2, x3); x1 x2 x3 is preserved.
_HALF_TWIST = {
    1: {1: [1, 2, -1], 2: [1], 3: [3]},
    -1: {1: [2], 2: [-2, 1, 2], 3: [3]},
    2: {1: [1], 2: [2, 3, -2], 3: [2]},
    -2: {1: [1], 2: [3], 3: [-3, 2, 3]},
}


def _apply_twist(letter: int, word) -> list[int]:
    img = _HALF_TWIST[letter]
    out: list[int] = []
    for x in word:
        out.extend(img[x] if x > 0 else _invert(img[-x]))
    return free_reduce(out)


def slope_braid(p: int, q: int) -> list[int]:
    """Half-twist word carrying the slope (0, 1) curve to slope (p, q).

    Half twist 2 acts on slopes as (p, q) -> (p - q, q) and half twist 1 as
    (p, q) -> (p, q + p); the word is read left to right as a composition.
    """
    if gcd(abs(p), abs(q)) != 1:
        raise DomainError(f"slope {(p, q)} is not primitive")
    ops: list[int] = []
    while p != 0:
        if q == 0:
            ops += [2, 1, 2]
            break
        if abs(p) >= abs(q):
            k = round(p / q)
            ops += [-2 if k > 0 else 2] * abs(k)
            p -= k * q
        else:
            j = round(q / p)
            ops += [1 if j > 0 else -1] * abs(j)
            q -= j * p
    return ops


def slope_word(p: int, q: int, base=(1, 2)) -> list[int]:
    w = list(base)
    for letter in reversed(slope_braid(p, q)):
        w = _apply_twist(letter, w)
    return w


def _endpoints(M: np.ndarray) -> tuple[tuple[float, float], tuple[float, float]]:
    """Fixed points of a hyperbolic SL(2, R) matrix as homogeneous pairs (x, w)."""
    a, b, c, d = M[0, 0], M[0, 1], M[1, 0], M[1, 1]
    root = math.sqrt(max((a + d) ** 2 - 4.0, 0.0))
    q = (a - d) + math.copysign(root, a - d)
    return (q, 2.0 * c), (-2.0 * b, q)


def _side(M: np.ndarray, pt: tuple[float, float]) -> tuple[float, float]:
    """Fixed-point quadratic of ``M`` at a boundary point, with its rounding scale."""
    a, b, c, d = M[0, 0], M[0, 1], M[1, 0], M[1, 1]
    x, w = pt
    terms = (c * x * x, (d - a) * x * w, -b * w * w)
    return sum(terms), sum(abs(t) for t in terms)


def fourholed_pairing(model, p: int, q: int, tol: float = SIDE_TOL):
    """Split the boundaries by the slope (p, q) curve, decided on the geometry.

    The curve word is the product of two boundary conjugates; together with
    the remaining pair they multiply to the identity.  Both endpoints of each
    boundary axis must lie on one side of the curve axis, and the four axes
    must fall two and two.  Returns (pair on the left, pair on the right, curve word).
    """
    from .fuchsian.models import word_sl2

    braid = slope_braid(p, q)
    images = []
    for k in (1, 2, 3):
        w = [k]
        for letter in reversed(braid):
            w = _apply_twist(letter, w)
        images.append(w)
    labels = []
    for w in images:
        core = cyclic_reduce(w)
        if len(core) != 1 or core[0] < 0:
            raise AssertionError(f"half-twist image {w} is not a boundary conjugate")
        labels.append(GEN_BOUNDARY[core[0]])
    labels.append(GEN_BOUNDARY[4])
    # conjugate so the curve word is cyclically reduced; fewer digits are lost
    word = free_reduce(images[0] + images[1])
    core = cyclic_reduce(word)
    prefix = word[: (len(word) - len(core)) // 2]
    curve = word_sl2(model, core)
    sides = []
    for w in images + [[4]]:
        E = word_sl2(model, free_reduce(_invert(prefix) + w + prefix))
        vals = [_side(curve, pt) for pt in _endpoints(E)]
        if min(abs(v) / scale for v, scale in vals) < tol:
            raise AmbiguityError(f"boundary axis within {tol} of the slope {(p, q)} curve axis")
        if np.sign(vals[0][0]) != np.sign(vals[1][0]):
            raise AmbiguityError(f"a boundary axis crosses the slope {(p, q)} curve axis")
        sides.append(vals[0][0])
    if not (np.sign(sides[0]) == np.sign(sides[1]) != np.sign(sides[2]) == np.sign(sides[3])):
        raise AmbiguityError(f"boundary axes do not split two and two for slope {(p, q)}")
    left = tuple(sorted(labels[:2]))
    right = tuple(sorted(labels[2:]))
    return (left, right), word


def _collar(length: float) -> float:
    return math.asinh(1.0 / math.sinh(length / 2.0))


def enumerate_fourholed_curves(model, l_max: float, node_cap: int = DEFAULT_NODE_CAP) -> list[FourHoledCurveRecord]:
    """All essential simple closed geodesics of length <= l_max, sorted by length.

    A slope (p, q) curve crosses the slope (0, 1) curve 2|p| times and the
    slope (1, 0) curve 2|q| times, each crossing traversing a full collar, so
    its length is at least 4 max(|p| w0, |q| w1) with w the collar half-widths.
    Every slope inside that box is evaluated.
    """
    if model.kind != "FourHoledSphere":
        raise DomainError("enumerate_fourholed_curves needs a four-holed sphere model")
    if not (l_max > 0):
        raise DomainError("l_max must be positive")
    b = model.params["boundary"]
    w0 = _collar(word_length(model, slope_word(0, 1)))
    w1 = _collar(word_length(model, slope_word(1, 0)))
    p_max = int(l_max / (4.0 * w0))
    q_max = int(l_max / (4.0 * w1))
    if (2 * p_max + 1) * (q_max + 1) > node_cap:
        raise BudgetError(f"four-holed enumeration box exceeds node cap {node_cap}")
    out = []
    for q in range(0, q_max + 1):
        for p in range(-p_max, p_max + 1):
            if gcd(abs(p), q) != 1 or canonical_slope((p, q)) != (p, q):
                continue
            length = word_length(model, slope_word(p, q))
            if length > l_max:
                continue
            (left, right), word = fourholed_pairing(model, p, q)
            pa = PantsLengths(b[left[0] - 1], b[left[1] - 1], length)
            pb = PantsLengths(b[right[0] - 1], b[right[1] - 1], length)
            out.append(FourHoledCurveRecord((p, q), length, (left, right), pa, pb, tuple(word)))
    out.sort(key=lambda r: (r.length, r.slope))
    return out


def word_length(model, word) -> float:
    from .fuchsian.models import word_length as _length

    return _length(model, cyclic_reduce(word))
