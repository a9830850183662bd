"""Fundamental domains made of convex geodesic polygons with side pairings.

A complex holds one or more convex polygons, each in its own coordinate
frame on the hyperboloid, listed counter-clockwise.  Sides are numbered
globally.  A side is either on the surface boundary (``kind >= 0`` is the
boundary component) or paired with a partner side by a map ``side_map[s]``
taking the frame of its polygon to the frame of the partner's polygon,
with ``start(s) -> end(partner)`` and ``end(s) -> start(partner)``.

``home[p]`` places polygon ``p`` in the root developing frame.  Crossing
side ``s`` while developing updates a copy transform ``C -> C @ inv(side_map[s])``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConstructionError
from .lorentz import (
    distance,
    lcross,
    lorentz_inverse,
    mdot,
    segment_normal,
    to_upper_half_plane,
    unit_tangent,
)

PAIRING_TOL = 1e-9


@dataclass
class PolygonComplex:
    vertices: list[np.ndarray]
    poly_first: np.ndarray
    side_poly: np.ndarray
    side_start: np.ndarray
    side_end: np.ndarray
    side_len: np.ndarray
    side_normal: np.ndarray
    side_tangent: np.ndarray
    side_kind: np.ndarray
    side_partner: np.ndarray
    side_map: np.ndarray
    home: np.ndarray

    @property
    def n_polygons(self) -> int:
        return len(self.vertices)

    @property
    def n_sides(self) -> int:
        return len(self.side_poly)

    def sides_of(self, p: int) -> range:
        return range(int(self.poly_first[p]), int(self.poly_first[p + 1]))

    def next_side(self, s: int) -> int:
        p = int(self.side_poly[s])
        a, b = int(self.poly_first[p]), int(self.poly_first[p + 1])
        return a + (s - a + 1) % (b - a)

    def prev_side(self, s: int) -> int:
        p = int(self.side_poly[s])
        a, b = int(self.poly_first[p]), int(self.poly_first[p + 1])
        return a + (s - a - 1) % (b - a)

    def map_inverse(self, s: int) -> np.ndarray:
        return lorentz_inverse(self.side_map[s])

    # ------------------------------------------------------------ geometry

    def corner_angle(self, s_in: int, s_out: int) -> float:
        """Interior angle at the vertex where side ``s_in`` ends and ``s_out`` starts."""
        n1, n2 = self.side_normal[s_in], self.side_normal[s_out]
        c = lcross(n1, n2)
        sin_a = math.sqrt(max(-mdot(c, c), 0.0))
        if mdot(c, self.side_start[s_out]) < 0:
            sin_a = -sin_a
        return math.atan2(sin_a, -mdot(n1, n2)) % (2.0 * math.pi)

    def polygon_area(self, p: int) -> float:
        sides = list(self.sides_of(p))
        total = sum(self.corner_angle(self.prev_side(s), s) for s in sides)
        return (len(sides) - 2) * math.pi - total

    def area(self) -> float:
        return math.fsum(self.polygon_area(p) for p in range(self.n_polygons))

    def contains(self, p: int, x: np.ndarray, tol: float = 0.0) -> bool:
        return all(mdot(self.side_normal[s], x) >= -tol * x[0] for s in self.sides_of(p))

    def pairing_defects(self) -> list[float]:
        """Endpoint mismatches of every pairing and its involutivity."""
        out = []
        for s in range(self.n_sides):
            t = int(self.side_partner[s])
            if t < 0:
                continue
            g = self.side_map[s]
            out.append(distance(g @ self.side_start[s], self.side_end[t]))
            out.append(distance(g @ self.side_end[s], self.side_start[t]))
            scale = float(np.max(np.abs(g))) ** 2
            out.append(float(np.max(np.abs(self.side_map[t] @ g - np.eye(3)))) / scale)
            out.append(abs(self.side_len[s] - self.side_len[t]))
        return out

    def sides_uhp(self) -> list[tuple[complex, complex]]:
        """Side endpoints in upper half-plane coordinates (root frame)."""
        out = []
        for s in range(self.n_sides):
            h = self.home[self.side_poly[s]]
            out.append((to_upper_half_plane(h @ self.side_start[s]), to_upper_half_plane(h @ self.side_end[s])))
        return out

    # ------------------------------------------------------------ vertex walks

    def _corner_chain(self, s_in: int, C: np.ndarray, stop_at_boundary: bool, first_out: int | None = None):
        """Sweep around a vertex by crossing outgoing sides.

        Starts at the corner (s_in, next_side(s_in)).  Returns the list of
        visited corners, the accumulated copy transform and the angle sum.
        """
        corners = []
        angle = 0.0
        s_in_cur = s_in
        for _ in range(4 * self.n_sides + 4):
            s_out = self.next_side(s_in_cur)
            corners.append((s_in_cur, s_out))
            angle += self.corner_angle(s_in_cur, s_out)
            if stop_at_boundary and self.side_kind[s_out] >= 0:
                return corners, C, angle, s_out
            t = int(self.side_partner[s_out])
            C = C @ self.map_inverse(s_out)
            s_in_cur = t
            if not stop_at_boundary and s_in_cur == s_in:
                return corners, C, angle, None
        raise ConstructionError("vertex walk did not close")

    def vertex_cycles(self) -> list[dict]:
        """Interior vertex cycles with their angle sums and holonomies."""
        seen = set()
        out = []
        boundary_corners = set()
        for s in range(self.n_sides):
            if self.side_kind[s] >= 0:
                corners, _, _, _ = self._corner_chain(s, np.eye(3), True)
                boundary_corners.update(corners)
        for s in range(self.n_sides):
            corner = (s, self.next_side(s))
            if corner in seen or corner in boundary_corners:
                continue
            corners, C, angle, _ = self._corner_chain(s, np.eye(3), False)
            seen.update(corners)
            out.append({"corners": corners, "angle": angle, "holonomy": C})
        return out

    def boundary_walk(self, kind: int) -> dict:
        """Lift transforms of the sides of one boundary component.

        Returns the sides in boundary order, per-side transforms ``K`` placing
        each side on one common lift of the boundary geodesic (root frame), the
        primitive deck element ``delta`` translating along that lift in the
        boundary direction (interior on the left) and the total length.
        """
        start = [s for s in range(self.n_sides) if self.side_kind[s] == kind]
        if not start:
            raise ConstructionError(f"no sides for boundary component {kind}")
        s0 = start[0]
        K0 = self.home[self.side_poly[s0]].copy()
        sides, Ks, length = [], [], 0.0
        s, K = s0, K0
        for _ in range(self.n_sides + 1):
            sides.append(s)
            Ks.append(K)
            length += float(self.side_len[s])
            _, C, _, s_next = self._corner_chain(s, K, True)
            if s_next == s0:
                delta = C @ lorentz_inverse(K0)
                return {"sides": sides, "K": Ks, "delta": delta, "length": length}
            s, K = s_next, C
        raise ConstructionError("boundary walk did not close")


def build_complex(
    polygons: list[np.ndarray],
    kinds: list[list[int]],
    pairings: dict[int, tuple[int, np.ndarray]],
    home: list[np.ndarray] | None = None,
    normals: list[list[np.ndarray]] | None = None,
) -> PolygonComplex:
    """Assemble a complex from ccw vertex lists, per-side boundary labels and pairings.

    ``pairings`` maps a global side index to ``(partner, map)``; the reverse
    direction is filled in automatically with the inverse map.  Side normals
    may be supplied when the caller knows them more accurately than the
    cross product of the endpoints.
    """
    first = [0]
    for verts in polygons:
        first.append(first[-1] + len(verts))
    S = first[-1]
    side_poly = np.empty(S, dtype=np.int64)
    P = np.empty((S, 3))
    Q = np.empty((S, 3))
    for p, verts in enumerate(polygons):
        k = len(verts)
        for i in range(k):
            s = first[p] + i
            side_poly[s] = p
            P[s] = verts[i]
            Q[s] = verts[(i + 1) % k]
    length = np.array([distance(P[s], Q[s]) for s in range(S)])
    if normals is None:
        normal = np.array([segment_normal(P[s], Q[s]) for s in range(S)])
    else:
        normal = np.array([n for ns in normals for n in ns], dtype=float)
        if normal.shape != (S, 3):
            raise ConstructionError("normal count mismatch")
    # unit tangent at the start: <lcross(n, P), .> completes the frame (P, U, n)
    tangent = np.array([lcross(normal[s], P[s]) for s in range(S)])
    kind = np.array([k for ks in kinds for k in ks], dtype=np.int64)
    if len(kind) != S:
        raise ConstructionError("side label count mismatch")
    partner = -np.ones(S, dtype=np.int64)
    maps = np.tile(np.eye(3), (S, 1, 1))
    for s, (t, g) in pairings.items():
        for a, b, m in ((s, t, g), (t, s, lorentz_inverse(g))):
            if partner[a] >= 0 and partner[a] != b:
                raise ConstructionError(f"side {a} paired twice")
            partner[a] = b
            maps[a] = m
    for s in range(S):
        if (kind[s] < 0) == (partner[s] < 0):
            raise ConstructionError(f"side {s} must be either boundary or paired")
    homes = np.array(home if home is not None else [np.eye(3)] * len(polygons))
    cx = PolygonComplex(
        [np.asarray(v, dtype=float) for v in polygons],
        np.array(first, dtype=np.int64),
        side_poly, P, Q, length, normal, tangent, kind, partner, maps, homes,
    )
    for p in range(cx.n_polygons):
        for v in cx.vertices[p]:
            if not cx.contains(p, v, 1e-9):
                raise ConstructionError(f"polygon {p} is not convex or not counter-clockwise")
    bad = max(cx.pairing_defects(), default=0.0)
    if bad > 1e-7:
        raise ConstructionError(f"side pairing defect {bad:.3g}")
    return cx
