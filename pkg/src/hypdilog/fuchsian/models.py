"""Surface models: pants, one-holed torus, four-holed sphere, genus-2 octagon."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import mpmath
import numpy as np
from scipy.optimize import brentq

from ..errors import ConstructionError, DomainError
from ..hyptrig import PantsLengths
from .isometry import IsometryMap
from .lorentz import (
    ORIGIN,
    boost,
    distance,
    frame_from,
    geodesic_point,
    lorentz_inverse,
    normalize_point,
    reflection,
    rotation,
    segment_normal,
    so21_trace_to_sl2_abs,
    unit_tangent,
)
from .polygon import PolygonComplex, build_complex

KINDS = ("Pants", "OneHoledTorus", "FourHoledSphere", "GenusTwo")
CLOSING_TOL = 1e-8


@dataclass
class BoundaryComponent:
    index: int
    length: float
    sides: list[int]
    K: list[np.ndarray]
    delta: np.ndarray

    @property
    def holonomy(self) -> IsometryMap:
        return IsometryMap.from_so21(self.delta)


@dataclass
class SurfaceModel:
    kind: str
    generators: list[np.ndarray]
    generator_names: list[str]
    relation: list[int]
    polygon: PolygonComplex
    boundary: list[BoundaryComponent]
    euler_char: int
    params: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def generator_maps(self) -> list[IsometryMap]:
        return [IsometryMap.from_so21(g) for g in self.generators]

    @property
    def total_measure(self) -> float:
        return 4.0 * math.pi**2 * abs(self.euler_char)

    def word_matrix(self, word: Sequence[int]) -> np.ndarray:
        m = np.eye(3)
        for letter in word:
            g = self.generators[abs(letter) - 1]
            m = m @ (g if letter > 0 else lorentz_inverse(g))
        return m


def word_sl2(model: SurfaceModel, word: Sequence[int]) -> np.ndarray:
    """SL(2, R) product of a word of signed 1-based generator indices.

    Long words with cancellation lose far fewer digits here than in the
    3x3 Lorentz representation, whose entries are quadratic in these.
    """
    lifts = [g.matrix for g in model.generator_maps]
    m = np.eye(2)
    for letter in word:
        if letter == 0 or abs(letter) > len(lifts):
            raise DomainError(f"bad generator index {letter}")
        g = lifts[abs(letter) - 1]
        m = m @ (g if letter > 0 else np.array([[g[1, 1], -g[0, 1]], [-g[1, 0], g[0, 0]]]))
    return m


def holonomy(model: SurfaceModel, word: Sequence[int]) -> IsometryMap:
    """Product of generators for a word of signed 1-based generator indices."""
    return IsometryMap.from_matrix(word_sl2(model, word))


def word_length(model: SurfaceModel, word: Sequence[int]) -> float:
    tr = abs(float(np.trace(word_sl2(model, word))))
    return 2.0 * math.acosh(tr / 2.0) if tr > 2.0 else 0.0


def _finish(kind, generators, names, relation, cx, n_boundary, chi, params, extra) -> SurfaceModel:
    area = cx.area()
    if abs(area - 2.0 * math.pi * abs(chi)) > 1e-8:
        raise ConstructionError(f"polygon area {area} differs from 2pi|chi|")
    bcs = []
    for b in range(n_boundary):
        w = cx.boundary_walk(b)
        bcs.append(BoundaryComponent(b, w["length"], w["sides"], w["K"], w["delta"]))
    return SurfaceModel(kind, generators, names, relation, cx, bcs, chi, params, extra)


# ------------------------------------------------------------------ pants


_MP_DPS = 40


def _mp_boost(s):
    c, h = mpmath.cosh(s), mpmath.sinh(s)
    return mpmath.matrix([[c, h, 0], [h, c, 0], [0, 0, 1]])


def _mp_reflection(n):
    J = mpmath.diag([-1, 1, 1])
    return mpmath.eye(3) - 2 * (n * n.T) * J


def _to_np(m) -> np.ndarray:
    return np.array(m.tolist(), dtype=float).reshape(m.rows, m.cols)


def _pants_pieces(l: PantsLengths):
    """Octagon (two right-angled hexagons), reflections and pairing maps.

    The hexagon has sides (l1/2, m3, l2/2, m1, l3/2, m2), walked ccw with a
    moving frame whose third column is the side's left normal.  Thin pants
    put vertices far from the origin, where double-precision products of
    frames lose digits, so the construction runs in extended precision and
    is rounded once at the end.
    """
    from ..hyptrig import pants_invariants

    inv = pants_invariants(l)
    with mpmath.workdps(_MP_DPS):
        ls = [mpmath.mpf(x) for x in l.as_tuple()]
        ms = []
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            ms.append(mpmath.acosh((mpmath.cosh(ls[i] / 2) + mpmath.cosh(ls[j] / 2) * mpmath.cosh(ls[k] / 2))
                                   / (mpmath.sinh(ls[j] / 2) * mpmath.sinh(ls[k] / 2))))
        quarter = mpmath.matrix([[1, 0, 0], [0, 0, -1], [0, 1, 0]])
        F = mpmath.eye(3)
        frames = []
        for s in (ls[0] / 2, ms[2], ls[1] / 2, ms[0], ls[2] / 2, ms[1]):
            frames.append(F.copy())
            F = F * _mp_boost(s) * quarter
        err = float(mpmath.mnorm(F - mpmath.eye(3), 1))
        if err > CLOSING_TOL:
            raise ConstructionError(f"hexagon does not close (defect {err:.3g})")
        # move the midpoint of the M1 seam to the origin, seam along +x1
        J = mpmath.diag([-1, 1, 1])
        G = frames[3] * _mp_boost(ms[0] / 2)
        T = J * G.T * J
        v = [T * Fk[:, 0] for Fk in frames]
        n = [T * Fk[:, 2] for Fk in frames]
        R1, R2, R3 = _mp_reflection(n[3]), _mp_reflection(n[5]), _mp_reflection(n[1])
        w = [R1 * x for x in v]
        rn = [R1 * x for x in n]
        octagon = [v[0], v[1], v[2], w[2], w[1], w[0], w[5], v[5]]
        # reflected sides are traversed backwards, so R1 maps left normals to left normals;
        # side 2 runs v2 -> w2 along L2 and side 6 runs w5 -> v5 along L3
        normals = [n[0], n[1], n[2], rn[1], rn[0], rn[5], n[4], n[5]]
        maps = {3: (1, R3 * R1), 5: (7, R2 * R1)}
        gam = [R3 * R2, R1 * R3, R2 * R1]
        octagon = [_to_np(x).ravel() for x in octagon]
        normals = [_to_np(x).ravel() for x in normals]
        pairings = {k: (t, _to_np(g)) for k, (t, g) in maps.items()}
        gammas = [_to_np(g) for g in gam]
        refl = tuple(_to_np(R) for R in (R1, R2, R3))
    kinds = [0, -1, 1, -1, 0, -1, 2, -1]
    return inv, (octagon, normals), kinds, pairings, gammas, refl


def build_pants(l) -> SurfaceModel:
    """Pants as two right-angled hexagons glued along the three seams.

    Generators ``X = gamma_1``, ``Y = gamma_2`` translate along lifts of
    L1 and L2; ``gamma_3 gamma_2 gamma_1 = 1``.
    """
    if not isinstance(l, PantsLengths):
        l = PantsLengths(*l)
    inv, (octagon, normals), kinds, pairings, gammas, refl = _pants_pieces(l)
    cx = build_complex([octagon], [kinds], pairings, normals=[normals])
    extra = {"invariants": inv, "gamma3": gammas[2], "reflections": refl}
    return _finish("Pants", gammas[:2], ["X", "Y"], [], cx, 3, -1, {"lengths": l.as_tuple()}, extra)


# ------------------------------------------------------------------ gluing helper


def _split_pair(P2, Q2, P6, Q6, length: float, tau: float):
    """Gluing of side P2->Q2 (source) onto side P6->Q6 (target), twisted by tau.

    The gluing sends the frame at P2 looking toward Q2 to the frame at the
    point ``tau`` from Q6 looking toward P6.  Returns the split points on
    both sides, the maps for the two halves and the reduced twist.
    """
    F2 = frame_from(P2, unit_tangent(P2, Q2))
    F6 = frame_from(Q6, unit_tangent(Q6, P6))
    phi = F6 @ boost(tau) @ lorentz_inverse(F2)
    red = tau % length
    shift = F6 @ boost(-length) @ lorentz_inverse(F6)  # translation by `length` toward Q6
    phi_red = F6 @ boost(red) @ lorentz_inverse(F2)
    psi = shift @ phi_red
    eps = 1e-9 * length
    if red < eps or red > length - eps:
        return None, None, phi_red, None, 0.0, phi
    W2 = geodesic_point(P2, unit_tangent(P2, Q2), length - red)
    W6 = geodesic_point(P6, unit_tangent(P6, Q6), length - red)
    return W2, W6, phi_red, psi, red, phi


# ------------------------------------------------------------------ torus


def _torus_complex(pieces, a: float, tau: float):
    inv, (octagon, nrm), kinds, pairings, gammas, _ = pieces
    P2, Q2 = octagon[2], octagon[3]
    P6, Q6 = octagon[6], octagon[7]
    W2, W6, phi, psi, red, phi_full = _split_pair(P2, Q2, P6, Q6, a, tau)
    if W2 is None:
        verts = list(octagon)
        normals = list(nrm)
        labels = [0, -1, -1, -1, 0, -1, -1, -1]
        pair = {3: (1, pairings[3][1]), 5: (7, pairings[5][1]), 2: (6, phi)}
    else:
        # sides: 0 C, 1 M3, 2 A+ (first part), 3 A+ (rest), 4 R1M3, 5 C, 6 R1M2, 7 A-, 8 A-, 9 M2
        verts = [octagon[0], octagon[1], P2, W2, Q2, octagon[4], octagon[5], P6, W6, Q6]
        normals = nrm[:3] + [nrm[2]] + nrm[3:7] + [nrm[6], nrm[7]]
        labels = [0, -1, -1, -1, -1, 0, -1, -1, -1, -1]
        pair = {4: (1, pairings[3][1]), 6: (9, pairings[5][1]), 2: (7, phi), 3: (8, psi)}
    return verts, normals, labels, pair, phi_full


def _sl2_pos(L: np.ndarray) -> np.ndarray:
    g = IsometryMap.from_so21(L).normalized()
    return g.matrix


def build_torus(marking) -> SurfaceModel:
    """One-holed torus realising a Fricke trace triple.

    Built from the pants (c, a, a) with a = length of A, gluing the two
    copies of A with a twist chosen so that |tr B| = y and tr AB = z.  The
    fundamental domain is a ten-sided polygon (the glued sides are split at
    the twist point).  Cusped markings (c = 0) are rejected.
    """
    from ..spectrum import TorusMarking

    if not isinstance(marking, TorusMarking):
        marking = TorusMarking(*marking)
    x, y, z = marking.as_tuple()
    if marking.c <= 0.0:
        raise DomainError("build_torus needs a geodesic boundary (boundary trace < -2)")
    c = marking.c
    a = 2.0 * math.acosh(x / 2.0)
    pieces = _pants_pieces(PantsLengths(c, a, a))
    octagon = pieces[1][0]
    P2, Q2, P6, Q6 = octagon[2], octagon[3], octagon[6], octagon[7]
    F2 = frame_from(P2, unit_tangent(P2, Q2))
    F6 = frame_from(Q6, unit_tangent(Q6, P6))
    A = pieces[4][1]

    def b_of(tau):
        # B = inverse of the gluing F6 boost(tau) F2^-1
        return F2 @ boost(-tau) @ lorentz_inverse(F6)

    # tr_SO B(tau) = al cosh(tau) - be sinh(tau) + ga, convex with one minimum
    M = lorentz_inverse(F6) @ F2
    al, be, ga = M[0, 0] + M[1, 1], M[0, 1] + M[1, 0], M[2, 2]
    target = y * y - 1.0
    t0 = math.atanh(be / al) if abs(be) < abs(al) else None
    if t0 is None or al * math.cosh(t0) - be * math.sinh(t0) + ga > target:
        raise ConstructionError("twist search failed: minimum |tr B| exceeds y")
    f = lambda t: al * math.cosh(t) - be * math.sinh(t) + ga - target
    roots = []
    for direction in (-1.0, 1.0):
        hi, step = t0, 1.0
        while f(hi) < 0:
            hi += direction * step
            step *= 2
        lo, hi2 = sorted((t0, hi))
        roots.append(brentq(f, lo, hi2, xtol=1e-15, rtol=1e-15, maxiter=200))
    best = None
    for tau in roots:
        trab = float(np.trace(_sl2_pos(A) @ _sl2_pos(b_of(tau))))
        err = abs(trab - z)
        if best is None or err < best[0]:
            best = (err, tau)
    if best[0] > 1e-6 * max(1.0, z):
        raise ConstructionError(f"no twist reproduces tr AB = {z} (best error {best[0]:.3g})")
    tau = best[1]
    verts, normals, labels, pair, phi_full = _torus_complex(pieces, a, tau)
    cx = build_complex([verts], [labels], pair, normals=[normals])
    B = lorentz_inverse(phi_full)
    extra = {"twist": tau, "a": a, "pants_invariants": pieces[0]}
    return _finish("OneHoledTorus", [A, B], ["A", "B"], [1, 2, -1, -2], cx, 1, -1,
                   {"marking": marking.as_tuple(), "c": c}, extra)


def fricke_traces(model: SurfaceModel) -> tuple[float, float, float, float]:
    """(tr A, tr B, tr AB, tr [A,B]) with sign-normalised lifts of A and B."""
    A = _sl2_pos(model.generators[0])
    B = _sl2_pos(model.generators[1])
    comm = A @ B @ np.linalg.inv(A) @ np.linalg.inv(B)
    return float(np.trace(A)), float(np.trace(B)), float(np.trace(A @ B)), float(np.trace(comm))


# ------------------------------------------------------------------ four-holed sphere


def build_four_holed(b: Sequence[float], interior: float, twist: float = 0.0) -> SurfaceModel:
    """Four-holed sphere from pants (b1, b2, interior) and (b3, b4, interior).

    Generators are the boundary holonomies M1..M4 (boundaries b2, b1, b4,
    b3 in that order) with ``M1 M2 M3 M4 = 1``; ``extra['interior']`` is the
    holonomy of the gluing curve.
    """
    b = [float(v) for v in b]
    if len(b) != 4:
        raise DomainError("need four boundary lengths")
    l1 = PantsLengths(b[0], b[1], interior)
    l2 = PantsLengths(b[2], b[3], interior)
    _, (oct1, n1), k1, pair1, g1, _ = _pants_pieces(l1)
    _, (oct2, n2), k2, pair2, g2, _ = _pants_pieces(l2)
    # source: side 6 of pants 2 (P -> Q), target: side 6 of pants 1
    W_src, W_tgt, phi, psi, red, phi_full = _split_pair(oct2[6], oct2[7], oct1[6], oct1[7], interior, twist)
    if W_src is None:
        nn1, nn2 = list(n1), list(n2)
        v1, lab1 = list(oct1), [0, -1, 1, -1, 0, -1, -1, -1]
        v2, lab2 = list(oct2), [2, -1, 3, -1, 2, -1, -1, -1]
        pairs = {3: (1, pair1[3][1]), 5: (7, pair1[5][1]), 8 + 3: (8 + 1, pair2[3][1]), 8 + 5: (8 + 7, pair2[5][1]), 8 + 6: (6, phi)}
    else:
        nn1 = n1[:7] + [n1[6], n1[7]]
        nn2 = n2[:7] + [n2[6], n2[7]]
        v1 = oct1[:7] + [W_tgt] + oct1[7:]
        lab1 = [0, -1, 1, -1, 0, -1, -1, -1, -1]
        v2 = oct2[:7] + [W_src] + oct2[7:]
        lab2 = [2, -1, 3, -1, 2, -1, -1, -1, -1]
        o = 9
        pairs = {3: (1, pair1[3][1]), 5: (8, pair1[5][1]), o + 3: (o + 1, pair2[3][1]), o + 5: (o + 8, pair2[5][1]),
                 o + 6: (6, phi), o + 7: (7, psi)}
    home = [np.eye(3), phi]
    cx = build_complex([v1, v2], [lab1, lab2], pairs, home, normals=[nn1, nn2])
    H = home[1]
    Hi = lorentz_inverse(H)
    M1 = g1[1]
    M2 = g1[0]
    M3 = H @ g2[1] @ Hi
    M4 = H @ g2[0] @ Hi
    extra = {"interior": g1[2], "twist": twist}
    return _finish("FourHoledSphere", [M1, M2, M3, M4], ["M1", "M2", "M3", "M4"], [1, 2, 3, 4], cx, 4, -2,
                   {"boundary": tuple(b), "interior": interior, "twist": twist}, extra)


# ------------------------------------------------------------------ genus two


def build_genus2_octagon() -> SurfaceModel:
    """Regular octagon with angles pi/4 and pairing a1 b1 a1^-1 b1^-1 a2 b2 a2^-1 b2^-1."""
    cosh_r = 3.0 + 2.0 * math.sqrt(2.0)  # cot^2(pi/8)
    r = math.acosh(cosh_r)
    verts = []
    for k in range(8):
        th = math.pi / 8 + k * math.pi / 4
        verts.append(np.array([cosh_r, math.sinh(r) * math.cos(th), math.sinh(r) * math.sin(th)]))
    pairs = {}
    names = []
    gens = []
    for i, j, name in ((0, 2, "a1"), (1, 3, "b1"), (4, 6, "a2"), (5, 7, "b2")):
        Pi, Qi = verts[i], verts[(i + 1) % 8]
        Pj, Qj = verts[j], verts[(j + 1) % 8]
        g = frame_from(Qj, unit_tangent(Qj, Pj)) @ lorentz_inverse(frame_from(Pi, unit_tangent(Pi, Qi)))
        pairs[i] = (j, g)
        names.append(name)
        gens.append(lorentz_inverse(g))
    cx = build_complex([verts], [[-1] * 8], pairs)
    cycles = cx.vertex_cycles()
    if len(cycles) != 1 or abs(cycles[0]["angle"] - 2 * math.pi) > 1e-9:
        raise ConstructionError("octagon vertex cycle is not a single 2pi cycle")
    return _finish("GenusTwo", gens, names, [], cx, 0, -2, {}, {"vertex_cycles": cycles})


# ------------------------------------------------------------------ checks


def reduced_words(n_gen: int, max_len: int):
    letters = [i for k in range(1, n_gen + 1) for i in (k, -k)]
    for L in range(1, max_len + 1):
        for w in itertools.product(letters, repeat=L):
            if any(w[k] == -w[k + 1] for k in range(L - 1)):
                continue
            yield list(w)


def min_abs_trace(model: SurfaceModel, max_len: int) -> float:
    """Smallest |tr| over non-identity reduced words (discreteness smoke test)."""
    best = math.inf
    for w in reduced_words(len(model.generators), max_len):
        m = model.word_matrix(w)
        if np.max(np.abs(m - np.eye(3))) < 1e-9:
            continue
        best = min(best, so21_trace_to_sl2_abs(m))
    return best
