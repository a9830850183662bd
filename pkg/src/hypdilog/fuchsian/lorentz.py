"""Hyperboloid-model primitives.

Points are unit timelike vectors ``X`` (``<X,X> = -1``, ``X[0] > 0``) for the
form ``<u,v> = -u0 v0 + u1 v1 + u2 v2``.  A geodesic is stored by a unit
spacelike normal ``n``; its left side (for an oriented geodesic ``P -> Q``) is
``<n, w> > 0``.  Isometries are 3x3 matrices in O(2,1).

The upper half-plane point ``z = s + i t`` corresponds to
``X = ((s^2 + t^2 + 1)/(2t), s/t, (s^2 + t^2 - 1)/(2t))``, so the half-plane
directions (right, up) match the hyperboloid directions (x1, x2) at ``i``.
"""

from __future__ import annotations

import math

import numpy as np

J = np.diag([-1.0, 1.0, 1.0])
ORIGIN = np.array([1.0, 0.0, 0.0])


def mdot(u: np.ndarray, v: np.ndarray) -> float:
    return -u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def lcross(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Lorentz cross product: ``<lcross(u, v), w> = det[u, v, w]``."""
    return J @ np.cross(u, v)


def normalize_point(x: np.ndarray) -> np.ndarray:
    n = math.sqrt(max(-mdot(x, x), 0.0))
    x = x / n
    return x if x[0] > 0 else -x


def normalize_space(v: np.ndarray) -> np.ndarray:
    return v / math.sqrt(mdot(v, v))


def distance(x: np.ndarray, y: np.ndarray) -> float:
    # 4 sinh^2(d/2) = <x-y, x-y>; accurate for nearby points
    d = x - y
    q = mdot(d, d)
    return 2.0 * math.asinh(0.5 * math.sqrt(max(q, 0.0)))


def boost(s: float) -> np.ndarray:
    """Translation by ``s`` along the x1-axis through the origin."""
    c, h = math.cosh(s), math.sinh(s)
    return np.array([[c, h, 0.0], [h, c, 0.0], [0.0, 0.0, 1.0]])


def rotation(a: float) -> np.ndarray:
    """Counter-clockwise rotation by ``a`` about the origin."""
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def reflection(n: np.ndarray) -> np.ndarray:
    """Reflection in the geodesic with unit normal ``n``."""
    return np.eye(3) - 2.0 * np.outer(n, n) @ J


def lorentz_inverse(g: np.ndarray) -> np.ndarray:
    return J @ g.T @ J


def segment_normal(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Unit normal of the geodesic through p, q; the left of p -> q is positive."""
    return normalize_space(lcross(p, q))


def unit_tangent(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Unit tangent at ``p`` pointing toward ``q``."""
    v = q + mdot(p, q) * p
    return normalize_space(v)


def geodesic_point(x: np.ndarray, v: np.ndarray, t: float) -> np.ndarray:
    return math.cosh(t) * x + math.sinh(t) * v


def geodesic_tangent(x: np.ndarray, v: np.ndarray, t: float) -> np.ndarray:
    return math.sinh(t) * x + math.cosh(t) * v


def frame_from(x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """SO(2,1) matrix sending (origin, e1) to (x, v); columns x, v, left normal."""
    n = lcross(x, v)
    return np.column_stack([x, v, n])


def geodesic_intersection(n1: np.ndarray, n2: np.ndarray):
    """Intersection point of two geodesics, or ``None`` when they do not meet."""
    p = lcross(n1, n2)
    q = mdot(p, p)
    if q >= 0.0:
        return None
    p = p / math.sqrt(-q)
    return p if p[0] > 0 else -p


def geodesic_distance(n1: np.ndarray, n2: np.ndarray) -> float:
    """Distance between disjoint geodesics (0 when they meet)."""
    c = abs(mdot(n1, n2))
    return math.acosh(c) if c > 1.0 else 0.0


def klein(x: np.ndarray) -> np.ndarray:
    return np.asarray(x)[..., 1:] / np.asarray(x)[..., :1]


def from_klein(k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    r2 = k[0] ** 2 + k[1] ** 2
    s = 1.0 / math.sqrt(1.0 - r2)
    return np.array([s, s * k[0], s * k[1]])


def from_upper_half_plane(z: complex) -> np.ndarray:
    s, t = z.real, z.imag
    r = s * s + t * t
    return np.array([(r + 1.0) / (2.0 * t), s / t, (r - 1.0) / (2.0 * t)])


def to_upper_half_plane(x: np.ndarray) -> complex:
    t = 1.0 / (x[0] - x[2])
    return complex(x[1] * t, t)


# ---------------------------------------------------------------- SL2 <-> SO(2,1)


def sl2_to_so21(m: np.ndarray) -> np.ndarray:
    """Matrix of the isometry ``z -> (az+b)/(cz+d)`` acting on the hyperboloid.

    With ``H(X) = [[x0 + x2, x1], [x1, x0 - x2]]`` the action is
    ``H -> g H g^T``.
    """
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    basis = (
        np.array([[1.0, 0.0], [0.0, 1.0]]),  # e0
        np.array([[0.0, 1.0], [1.0, 0.0]]),  # e1
        np.array([[1.0, 0.0], [0.0, -1.0]]),  # e2
    )
    g = np.array([[a, b], [c, d]])
    out = np.empty((3, 3))
    for k, h in enumerate(basis):
        r = g @ h @ g.T
        out[0, k] = 0.5 * (r[0, 0] + r[1, 1])
        out[1, k] = r[0, 1]
        out[2, k] = 0.5 * (r[0, 0] - r[1, 1])
    return out


def so21_to_sl2(L: np.ndarray) -> np.ndarray:
    """Inverse of :func:`sl2_to_so21` (defined up to sign)."""
    # columns in the symmetric-matrix basis give quadratic expressions in a,b,c,d
    a2 = 0.5 * (L[0, 0] + L[2, 0] + L[0, 2] + L[2, 2])
    b2 = 0.5 * (L[0, 0] + L[2, 0] - L[0, 2] - L[2, 2])
    c2 = 0.5 * (L[0, 0] - L[2, 0] + L[0, 2] - L[2, 2])
    d2 = 0.5 * (L[0, 0] - L[2, 0] - L[0, 2] + L[2, 2])
    ab = 0.5 * (L[0, 1] + L[2, 1])
    cd = 0.5 * (L[0, 1] - L[2, 1])
    ac = 0.5 * (L[1, 0] + L[1, 2])
    bd = 0.5 * (L[1, 0] - L[1, 2])
    sq = [max(a2, 0.0), max(b2, 0.0), max(c2, 0.0), max(d2, 0.0)]
    k = int(np.argmax(sq))
    r = math.sqrt(sq[k])
    if k == 0:
        a = r
        b, c = ab / a, ac / a
        d = (1.0 + b * c) / a
    elif k == 1:
        b = r
        a, d = ab / b, bd / b
        c = (a * d - 1.0) / b
    elif k == 2:
        c = r
        a, d = ac / c, cd / c
        b = (a * d - 1.0) / c
    else:
        d = r
        b, c = bd / d, cd / d
        a = (1.0 + b * c) / d
    return np.array([[a, b], [c, d]])


def so21_trace_to_sl2_abs(L: np.ndarray) -> float:
    """|tr| of the SL2 lift: tr_SO = tr_SL^2 - 1."""
    return math.sqrt(max(np.trace(L) + 1.0, 0.0))


def translation_length(L: np.ndarray) -> float:
    c = 0.5 * (np.trace(L) - 1.0)
    return math.acosh(c) if c > 1.0 else 0.0


def axis_of(L: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Attracting/repelling fixed light-like vectors of a hyperbolic element.

    Returns ``(repelling, attracting)`` normalised to ``v[0] = 1``.
    """
    w, vecs = np.linalg.eig(L)
    w = np.real(w)
    vecs = np.real(vecs)
    i_att = int(np.argmax(w))
    i_rep = int(np.argmin(w))
    att = vecs[:, i_att] / vecs[0, i_att]
    rep = vecs[:, i_rep] / vecs[0, i_rep]
    return rep, att


def axis_normal(L: np.ndarray) -> np.ndarray:
    """Unit normal of the oriented axis of a hyperbolic element; the left of
    the direction of translation is positive.

    Uses ``J (L - L^-1) = 2 sinh(len) [n]_x``, which avoids an eigen-solve.
    """
    A = J @ (L - lorentz_inverse(L))
    return normalize_space(np.array([A[2, 1], A[0, 2], A[1, 0]]))


def axis_distance(L1: np.ndarray, L2: np.ndarray) -> float:
    return geodesic_distance(axis_normal(L1), axis_normal(L2))
