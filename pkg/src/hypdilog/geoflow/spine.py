"""Single-vector spine growth and its classification."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import AmbiguityError, DomainError
from ..fuchsian.lorentz import lorentz_inverse, normalize_point
from ..fuchsian.models import SurfaceModel
from . import kernel as K
from .sampling import UnitTangentSample

DEFAULT_EPS_VERTEX = 1e-9
TRACE_REL_TOL = 1e-6


@dataclass(frozen=True)
class KernelGeometry:
    arrays: tuple
    home: np.ndarray
    Kmat: np.ndarray
    Kinv: np.ndarray
    centroid0: np.ndarray
    closed: bool
    t_max: float

    def grow_args(self) -> tuple:
        return self.arrays[:8]

    def batch_args(self) -> tuple:
        return self.arrays + (self.home, self.Kmat, self.Kinv)


def kernel_geometry(model: SurfaceModel, t_max: float | None = None) -> KernelGeometry:
    cx = model.polygon
    smap = np.ascontiguousarray(cx.side_map, dtype=float)
    smap_inv = np.ascontiguousarray([lorentz_inverse(g) for g in smap])
    arrays = (
        np.ascontiguousarray(cx.poly_first, dtype=np.int64),
        np.ascontiguousarray(cx.side_poly, dtype=np.int64),
        np.ascontiguousarray(cx.side_normal, dtype=float),
        np.ascontiguousarray(cx.side_tangent, dtype=float),
        np.ascontiguousarray(cx.side_len, dtype=float),
        np.ascontiguousarray(cx.side_kind, dtype=np.int64),
        np.ascontiguousarray(cx.side_partner, dtype=np.int64),
        smap,
        smap_inv,
    )
    S = cx.n_sides
    Kmat = np.tile(np.eye(3), (S, 1, 1))
    Kinv = np.tile(np.eye(3), (S, 1, 1))
    for b in model.boundary:
        for s, k in zip(b.sides, b.K):
            Kmat[s] = k
            Kinv[s] = lorentz_inverse(k)
    # base point for closed-geodesic signatures: generic, so that the walk to
    # a symmetric axis does not run through the vertex
    wts = 1.0 + 0.37 * np.sqrt(np.arange(2, len(cx.vertices[0]) + 2))
    centroid0 = normalize_point(np.sum(wts[:, None] * np.asarray(cx.vertices[0]), axis=0))
    if t_max is None:
        t_max = default_t_max(model)
    return KernelGeometry(arrays, np.ascontiguousarray(cx.home, dtype=float), Kmat, Kinv, centroid0,
                          not model.boundary, t_max)


def default_t_max(model: SurfaceModel) -> float:
    """50 plus ten times a diameter proxy (largest polygon vertex spread)."""
    from ..fuchsian.lorentz import distance

    diam = 0.0
    for verts in model.polygon.vertices:
        for a in verts:
            for b in verts:
                diam = max(diam, distance(a, b))
    return 50.0 + 10.0 * diam


@dataclass(frozen=True)
class Arc:
    ray: int
    polygon: int
    start: np.ndarray
    direction: np.ndarray
    t_start: float
    length: float
    exit_side: int


@dataclass(frozen=True)
class HitEvent:
    kind: str  # "boundary" or "knot"
    ray: int
    time: float
    boundary: int = -1
    partner_ray: int = -1
    partner_time: float = math.nan


@dataclass
class SpineGraph:
    status: str
    plus_arcs: list[Arc] = field(default_factory=list)
    minus_arcs: list[Arc] = field(default_factory=list)
    t1: float = math.nan
    t2: float = math.nan
    first: HitEvent | None = None
    second: HitEvent | None = None
    # raw kernel output for classification
    _ev: np.ndarray | None = None
    _evf: np.ndarray | None = None
    _buffers: tuple | None = None
    sample: UnitTangentSample | None = None

    @property
    def degenerate(self) -> bool:
        return self.status != "ok"

    @property
    def boundary_components_touched(self) -> set[int]:
        return {e.boundary for e in (self.first, self.second) if e is not None and e.kind == "boundary"}

    def ray_length(self, ray: int) -> float:
        """Final length of the + (0) or - (1) ray in the grown graph."""
        owner = self.first.ray
        return self.t1 if ray == owner else self.t2


def _event(kind_arr, ev, evf, base: int, fbase: int, seg_ray, seg_t0) -> HitEvent:
    typ, own, other = ev[base], ev[base + 1], ev[base + 2]
    t = seg_t0[own] + evf[fbase]
    if typ == K.EV_BOUNDARY:
        return HitEvent("boundary", int(seg_ray[own]), float(t), boundary=int(kind_arr[other]))
    return HitEvent("knot", int(seg_ray[own]), float(t), partner_ray=int(seg_ray[other]),
                    partner_time=float(seg_t0[other] + evf[fbase + 1]))


def grow_spine(model: SurfaceModel, v: UnitTangentSample, t_max: float | None = None,
               eps_vertex: float = DEFAULT_EPS_VERTEX, geometry: KernelGeometry | None = None) -> SpineGraph:
    geo = geometry or kernel_geometry(model, t_max)
    cap = K.SEG_CAP
    bufs = (
        np.empty(cap, dtype=np.int64), np.empty(cap, dtype=np.int64), np.empty((cap, 3)), np.empty((cap, 3)),
        np.empty((cap, 3)), np.empty(cap), np.empty(cap), np.empty(cap, dtype=np.int64), np.empty(cap),
        np.empty(cap, dtype=np.int64), np.empty((2, cap), dtype=np.int64),
    )
    ev = np.empty(8, dtype=np.int64)
    evf = np.empty(8)
    n = K.grow(*geo.grow_args(), int(v.polygon), np.asarray(v.basepoint, float), np.asarray(v.direction, float),
               geo.t_max if t_max is None else t_max, eps_vertex, *bufs, ev, evf)
    seg_ray, seg_poly, seg_x, seg_v, _, seg_t0, seg_len, seg_exit = bufs[:8]
    status = K.STATUS_NAMES[int(ev[0])]
    g = SpineGraph(status, _ev=ev, _evf=evf, _buffers=bufs, sample=v)
    for k in range(n):
        arc = Arc(int(seg_ray[k]), int(seg_poly[k]), seg_x[k].copy(), seg_v[k].copy(), float(seg_t0[k]),
                  float(seg_len[k]), int(seg_exit[k]))
        (g.plus_arcs if arc.ray == 0 else g.minus_arcs).append(arc)
    if status != "ok":
        return g
    kind_arr = geo.arrays[5]
    g.t1, g.t2 = float(evf[0]), float(evf[1])
    g.first = _event(kind_arr, ev, evf, 2, 2, seg_ray, seg_t0)
    g.second = _event(kind_arr, ev, evf, 5, 4, seg_ray, seg_t0)
    # trim arcs to the grown graph
    for ray, arcs in ((0, g.plus_arcs), (1, g.minus_arcs)):
        end = g.ray_length(ray)
        kept = []
        for a in arcs:
            if a.t_start >= end:
                break
            kept.append(a if a.t_start + a.length <= end else Arc(a.ray, a.polygon, a.start, a.direction,
                                                                   a.t_start, end - a.t_start, -1))
        arcs[:] = kept
    return g


# ------------------------------------------------------------------ classification


@dataclass(frozen=True)
class Classification:
    kind: str  # FullSpine, SimpleArc, Lasso, Degenerate
    label: str
    detail: dict = field(default_factory=dict)


def _sl2_abs_trace(L: np.ndarray) -> float:
    return math.sqrt(max(float(np.trace(L)) + 1.0, 0.0))


def boundary_left_signs(model: SurfaceModel) -> np.ndarray:
    """Sign of <axis normal of the boundary delta, interior point> per component.

    Deltas translate with the interior on the left, so these are +1 when the
    axis-normal convention puts the left side positive."""
    out = []
    c = model.polygon.home[0] @ normalize_point(np.sum(model.polygon.vertices[0], axis=0))
    for b in model.boundary:
        n = K.skew_normal(np.ascontiguousarray(b.delta))
        out.append(1 if float(-n[0] * c[0] + n[1] * c[1] + n[2] * c[2]) > 0 else -1)
    return np.array(out, dtype=np.int64)


def match_boundary(model: SurfaceModel, abs_trace: float, tol: float = TRACE_REL_TOL) -> int:
    """Index of the boundary whose |trace| matches, or raise AmbiguityError."""
    traces = np.array([2 * math.cosh(b.length / 2) for b in model.boundary])
    rel = np.abs(traces - abs_trace) / traces
    hits = np.flatnonzero(rel < tol)
    if len(hits) != 1:
        # equal-length boundaries cannot be told apart by trace alone
        if len(hits) > 1:
            raise AmbiguityError("loop trace matches several boundary components")
        raise AmbiguityError(f"loop trace {abs_trace} matches no boundary component")
    return int(hits[0])


def pants_arc_label(k_plus: int, k_minus: int) -> tuple[str, str]:
    if k_plus == k_minus:
        return "SimpleArc", f"H(B{k_plus + 1})"
    third = 3 - k_plus - k_minus
    sign = "+" if k_plus > k_minus else "-"
    return "SimpleArc", f"H(M{third + 1}){sign}"


def pants_lasso_label(loop: int, loop_sign: int, stem: int, boundary_ray: int) -> str:
    j = 3 - loop - stem
    orient = "pos" if boundary_ray == 1 else "neg"
    return f"W(L{loop + 1}{'+' if loop_sign > 0 else '-'},M{j + 1})/{orient}"


CHORD_REL_TOL = 1e-7


@dataclass(frozen=True)
class Chord:
    """Geodesic through a sample followed to the boundary in both directions."""

    ends: tuple[int, int]
    cosh_distance: float
    G: np.ndarray


def boundary_chord(model: SurfaceModel, v: UnitTangentSample, geo: KernelGeometry | None = None,
                   eps_vertex: float = DEFAULT_EPS_VERTEX) -> Chord | None:
    """None when either ray misses the boundary within ``t_max`` or grazes a vertex."""
    geo = geo or kernel_geometry(model)
    side = np.empty(2, dtype=np.int64)
    C = np.empty((2, 3, 3))
    st = K.chord(*geo.arrays, int(v.polygon), np.asarray(v.basepoint, float), np.asarray(v.direction, float),
                 geo.t_max, eps_vertex, side, C)
    if st != K.ST_OK:
        return None
    cx = model.polygon
    na = C[0] @ cx.side_normal[side[0]]
    nb = C[1] @ cx.side_normal[side[1]]
    cosh_d = abs(float(-na[0] * nb[0] + na[1] * nb[1] + na[2] * nb[2]))
    G = geo.Kmat[side[1]] @ lorentz_inverse(C[1]) @ C[0] @ geo.Kinv[side[0]]
    kinds = cx.side_kind
    return Chord((int(kinds[side[0]]), int(kinds[side[1]])), cosh_d, G)


class ChordClassifier:
    """Decides whether a boundary chord lies in a boundary-arc class.

    A chord is in such a class when it is homotopic (ends sliding on the
    boundary) to a simple orthogeodesic.  On a pants that orthogeodesic is
    the shortest one between the chord's end components, so the distance
    between the boundary lifts at the two ends decides.  On a one-holed
    torus the chord must be disjoint from a simple closed curve A (checked
    against the simple length spectrum up to ``length_cap``) and span the
    boundary-to-boundary distance of the pants cut along A.  Chords whose
    curve is longer than the cap are accepted on the distance test alone.
    """

    def __init__(self, model: SurfaceModel, tol: float = CHORD_REL_TOL, length_cap: float = 16.0):
        self.kind = model.kind
        self.tol = tol
        if model.kind == "Pants":
            from ..hyptrig import pants_invariants

            inv = pants_invariants(tuple(model.params["lengths"]))
            self.cosh_m = np.cosh(np.asarray(inv.m))
            self.cosh_p = np.cosh(np.asarray(inv.p))
        elif model.kind == "OneHoledTorus":
            from ..hyptrig import torus_cut_invariants
            from ..spectrum import TorusMarking, enumerate_torus_curves

            self.c = float(model.params["c"])
            self.delta = np.ascontiguousarray(model.boundary[0].delta)
            self.length_cap = length_cap
            recs = enumerate_torus_curves(TorusMarking(*model.params["marking"]), length_cap)
            self.simple_lengths = np.array(sorted({round(r.a, 12) for r in recs}))
            self.cosh_pA = np.array([math.cosh(torus_cut_invariants(self.c, a).p_A) for a in self.simple_lengths])
        else:
            raise DomainError(f"no boundary-arc classes for {model.kind}")

    def _close(self, a: float, b: float) -> bool:
        return abs(a - b) <= self.tol * b

    def pants(self, ends, cosh_d: float) -> str | None:
        ka, kb = int(ends[0]), int(ends[1])
        if ka < 0 or kb < 0:
            return None
        if ka != kb:
            third = 3 - ka - kb
            if self._close(cosh_d, self.cosh_m[third]):
                return f"H(M{third + 1}){'+' if ka > kb else '-'}"
            return None
        return f"H(B{ka + 1})" if self._close(cosh_d, self.cosh_p[ka]) else None

    def torus(self, ends, cosh_d: float, G: np.ndarray, curve_length: float | None = None) -> float | None:
        """Length of the disjoint simple closed curve, or None."""
        from ..hyptrig import torus_cut_invariants

        if ends[0] < 0 or ends[1] < 0:
            return None
        a = torus_arc_curve_length(G, self.delta) if curve_length is None else curve_length
        if a > self.length_cap:
            try:
                cp = math.cosh(torus_cut_invariants(self.c, a).p_A)
            except DomainError:
                return None
            return a if self._close(cosh_d, cp) else None
        q = int(np.searchsorted(self.simple_lengths, a))
        for r in (q - 1, q):
            if 0 <= r < len(self.simple_lengths) and abs(self.simple_lengths[r] - a) <= 1e-6 * max(a, 1.0):
                return a if self._close(cosh_d, self.cosh_pA[r]) else None
        return None


def classify(model: SurfaceModel, spine: SpineGraph, chord: Chord | None = None) -> Classification:
    """Class of a sample on a pants or one-holed torus model.

    Boundary-arc classes are decided on the full boundary chord through the
    sample, whose grown graph may be a lasso when the chord crosses itself.
    Otherwise the grown graph decides.  Closed surfaces are classified
    through the batch pipeline in ``mc``.
    """
    if spine.degenerate:
        return Classification("Degenerate", spine.status)
    geo = kernel_geometry(model)
    ev, evf = spine._ev, spine._evf
    bufs = spine._buffers
    seg_ray, seg_poly, seg_x, seg_v, seg_n, seg_t0, seg_len, seg_exit, seg_pos, seg_k, ray_segs = bufs
    smap, smap_inv = geo.arrays[7], geo.arrays[8]
    kinds = geo.arrays[5]
    first, second = spine.first, spine.second
    nb = sum(e.kind == "boundary" for e in (first, second))
    graph = ("FullSpine", "SimpleArc", "Lasso")[0 if nb == 0 else (1 if nb == 2 else 2)]
    if chord is None and spine.sample is not None and model.boundary:
        chord = boundary_chord(model, spine.sample, geo)
    if chord is not None:
        cc = ChordClassifier(model)
        if model.kind == "Pants":
            label = cc.pants(chord.ends, chord.cosh_distance)
            if label is not None:
                return Classification("SimpleArc", label, {"ends": chord.ends, "graph": graph})
        else:
            a = cc.torus(chord.ends, chord.cosh_distance, chord.G)
            if a is not None:
                return Classification("SimpleArc", "H(B)", {"curve_length": a, "graph": graph})
    if nb == 0:
        if model.kind == "OneHoledTorus":
            return Classification("FullSpine", "W(T)")
        return Classification("FullSpine", "W(P)")
    if nb == 2:
        return Classification("Degenerate", "unmatched_arc")
    if ev[2] == K.EV_KNOT:
        a, b, sb = ev[3], ev[4], evf[3]
        boundary_ray = 1 - int(ev[1])
        stem = int(kinds[ev[7]])
    else:
        a, b, sb = ev[6], ev[7], evf[5]
        boundary_ray = int(ev[1])
        stem = int(kinds[ev[4]])
    W = K.relative(b, a, smap, smap_inv, seg_ray, seg_exit, seg_k, ray_segs)
    tr = _sl2_abs_trace(W)
    n = K.skew_normal(W)
    P = np.empty(3)
    K._point_on(b, sb, seg_x, seg_v, P)
    sgn = 1 if (-n[0] * P[0] + n[1] * P[1] + n[2] * P[2]) > 0 else -1
    if model.kind == "OneHoledTorus":
        return Classification("Lasso", "W(A)", {"curve_length": 2 * math.acosh(tr / 2), "stem": stem,
                                                "orientation": "pos" if boundary_ray == 1 else "neg"})
    lb, mis = K.axis_boundary(W, int(seg_poly[b]), P, *geo.arrays[:8], DEFAULT_EPS_VERTEX)
    if lb < 0 or mis > 1e-6:
        raise AmbiguityError("loop axis does not lie on a boundary lift")
    loop = int(lb)
    if abs(2 * math.cosh(model.boundary[loop].length / 2) - tr) > TRACE_REL_TOL * tr:
        raise AmbiguityError("loop trace disagrees with its boundary component")
    loop_sign = sgn * int(boundary_left_signs(model)[loop])
    return Classification("Lasso", pants_lasso_label(loop, loop_sign, stem, boundary_ray),
                          {"loop": loop, "stem": stem, "loop_sign": loop_sign})


def min_coset_traces(G: np.ndarray, delta: np.ndarray, max_steps: int = 256) -> np.ndarray:
    """Smallest trace of ``G delta^k`` over integers k, for a stack of matrices.

    The trace is a shifted cosh in k, so walking outward from k = 0 until it
    rises finds the minimum without forming large powers."""
    G = np.asarray(G, dtype=float)
    single = G.ndim == 2
    G = G.reshape(-1, 3, 3)
    best = np.trace(G, axis1=1, axis2=2).copy()
    for step in (delta, lorentz_inverse(delta)):
        M = G.copy()
        prev = best.copy()
        active = np.ones(len(G), dtype=bool)
        for _ in range(max_steps):
            if not active.any():
                break
            M[active] = M[active] @ step
            tr = np.trace(M, axis1=1, axis2=2)
            active &= tr < prev
            best = np.where(active, np.minimum(best, tr), best)
            prev = tr
    return best[0] if single else best


def torus_arc_curve_length(G: np.ndarray, delta: np.ndarray) -> float:
    """Length of the simple closed curve disjoint from a boundary-to-boundary arc.

    ``G`` carries the lift of the boundary at one end of the arc to the lift
    at the other; the curve is the shortest of ``G delta^k``.
    """
    t = float(min_coset_traces(G, delta))
    return 2.0 * math.acosh(max(math.sqrt(max(t + 1.0, 0.0)) / 2.0, 1.0))
