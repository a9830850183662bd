"""Reference geodesic ray tracing through a polygon complex (plain numpy).

The Monte Carlo kernel in ``geoflow`` re-implements the same stepping in
compiled form; this module is the readable version used for single rays,
closed-geodesic signatures and cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError
from .lorentz import (
    ORIGIN,
    axis_normal,
    geodesic_point,
    geodesic_tangent,
    lcross,
    lorentz_inverse,
    mdot,
    normalize_point,
    normalize_space,
    so21_trace_to_sl2_abs,
    unit_tangent,
)
from .models import SurfaceModel

EPS_VERTEX = 1e-9


class VertexProximityError(DomainError):
    """A ray passed within the vertex tolerance of a polygon corner."""


@dataclass
class RayState:
    polygon: int
    x: np.ndarray
    v: np.ndarray
    copy: np.ndarray = field(default_factory=lambda: np.eye(3))
    word: list[int] = field(default_factory=list)
    entered: int = -1

    def developed(self) -> tuple[np.ndarray, np.ndarray]:
        return self.copy @ self.x, self.copy @ self.v


@dataclass(frozen=True)
class Segment:
    polygon: int
    x: np.ndarray
    v: np.ndarray
    length: float
    exit_side: int
    exit_position: float


def polygon_centroid(model: SurfaceModel, p: int) -> np.ndarray:
    return normalize_point(np.sum(model.polygon.vertices[p], axis=0))


def _side_offset(cx, s: int, x: np.ndarray, v: np.ndarray, t: float) -> float:
    u = math.asinh(mdot(geodesic_point(x, v, t), cx.side_tangent[s]))
    return max(-u, u - float(cx.side_len[s]), 0.0)


def _renormalize(x: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # long rays drift off the hyperboloid without this
    x = normalize_point(x)
    return x, normalize_space(v + mdot(x, v) * x)


def exit_side(model: SurfaceModel, p: int, x: np.ndarray, v: np.ndarray, skip: int = -1):
    """First side of polygon ``p`` met by the ray (x, v); returns (side, distance).

    Adjacent sides can be collinear (a straight angle between them); such
    ties are broken by which side actually contains the exit point.
    """
    cx = model.polygon
    best, best_t = -1, math.inf
    for s in cx.sides_of(p):
        if s == skip:
            continue
        n = cx.side_normal[s]
        dv = mdot(v, n)
        if dv >= 0.0:
            continue
        r = -mdot(x, n) / dv
        if r >= 1.0:
            continue
        t = math.atanh(r)
        if best >= 0 and abs(t - best_t) <= 1e-9 * (1.0 + t):
            if _side_offset(cx, s, x, v, t) < _side_offset(cx, best, x, v, best_t):
                best, best_t = s, t
        elif t < best_t:
            best, best_t = s, t
    return best, best_t


def unfold_step(model: SurfaceModel, state: RayState, max_step: float = math.inf):
    """Advance a ray by at most ``max_step`` inside the current polygon.

    Returns ``(segment, new_state)``.  When the ray reaches a paired side it
    is carried across (``new_state`` lives in the partner polygon and its
    copy transform and side word are updated); at a boundary side the new
    state is ``None``.
    """
    cx = model.polygon
    s, t = exit_side(model, state.polygon, state.x, state.v, state.entered)
    if s < 0:
        raise DomainError("ray does not leave the polygon (point outside?)")
    if t > max_step:
        x, v = _renormalize(geodesic_point(state.x, state.v, max_step), geodesic_tangent(state.x, state.v, max_step))
        seg = Segment(state.polygon, state.x, state.v, max_step, -1, math.nan)
        return seg, RayState(state.polygon, x, v, state.copy, list(state.word), state.entered)
    y, w = _renormalize(geodesic_point(state.x, state.v, t), geodesic_tangent(state.x, state.v, t))
    u = math.asinh(mdot(y, cx.side_tangent[s]))
    if u < EPS_VERTEX or u > cx.side_len[s] - EPS_VERTEX:
        raise VertexProximityError(f"ray passes within {EPS_VERTEX} of a vertex of side {s}")
    seg = Segment(state.polygon, state.x, state.v, t, s, u)
    if cx.side_kind[s] >= 0:
        return seg, None
    g = cx.side_map[s]
    partner = int(cx.side_partner[s])
    new = RayState(int(cx.side_poly[partner]), g @ y, g @ w, state.copy @ lorentz_inverse(g), state.word + [s], partner)
    return seg, new


def flow(model: SurfaceModel, state: RayState, length: float, max_segments: int = 100000):
    """Trace a ray for ``length``; returns (segments, final state or None at the boundary)."""
    segs = []
    remaining = length
    for _ in range(max_segments):
        seg, new = unfold_step(model, state, remaining)
        segs.append(seg)
        remaining -= seg.length
        if new is None or seg.exit_side < 0:
            return segs, new
        state = new
        if remaining <= 0.0:
            return segs, state
    raise DomainError("segment budget exhausted")


@dataclass
class LocateResult:
    inside: bool
    polygon: int
    point: np.ndarray
    copy: np.ndarray
    word: list[int]
    boundary_side: int = -1


def locate(model: SurfaceModel, point: np.ndarray) -> LocateResult:
    """Fold a root-frame point into the fundamental domain.

    Walks the geodesic from the centroid of polygon 0 to ``point`` across
    side pairings.  Returns ``inside=False`` with the boundary side met when
    the point lies beyond the surface boundary in the developed picture.
    """
    cx = model.polygon
    start = cx.home[0] @ polygon_centroid(model, 0)
    target = normalize_point(np.asarray(point, dtype=float))
    d = math.acosh(max(-mdot(start, target), 1.0))
    local0 = lorentz_inverse(cx.home[0]) @ start
    if d < 1e-15:
        return LocateResult(True, 0, local0, cx.home[0].copy(), [])
    u = lorentz_inverse(cx.home[0]) @ unit_tangent(start, target)
    state = RayState(0, local0, u, cx.home[0].copy(), [])
    segs, final = flow(model, state, d)
    if final is None:
        return LocateResult(False, segs[-1].polygon, segs[-1].x, state.copy, state.word, segs[-1].exit_side)
    return LocateResult(True, final.polygon, final.x, final.copy, final.word)


def closed_geodesic_crossings(model: SurfaceModel, element: np.ndarray, ndigits: int = 7):
    """Side crossings of the closed geodesic whose lift is the axis of ``element``.

    Returns a sorted tuple of ``(side, position)`` pairs, each crossing
    recorded once on the lower-numbered side of its pair.  Two hyperbolic
    elements give the same tuple exactly when they are conjugate up to
    inversion (their closed geodesics coincide as sets).
    """
    cx = model.polygon
    length = 2.0 * math.acosh(so21_trace_to_sl2_abs(element) / 2.0)
    n = axis_normal(element)
    o = cx.home[0] @ polygon_centroid(model, 0)
    p = normalize_point(o - mdot(o, n) * n)
    u = lcross(n, p)
    loc = locate(model, p)
    if not loc.inside:
        raise DomainError("closed geodesic leaves the surface")
    ci = lorentz_inverse(loc.copy)
    state = RayState(loc.polygon, loc.point, normalize_space(ci @ u))
    segs, _ = flow(model, state, length)
    out = []
    for seg in segs:
        s = seg.exit_side
        if s < 0:
            continue
        t = int(cx.side_partner[s])
        pos = seg.exit_position
        if t >= 0 and t < s:
            s, pos = t, float(cx.side_len[t]) - pos
        out.append((s, round(pos, ndigits)))
    return tuple(sorted(out))
