"""Liouville-uniform sampling of unit tangent vectors on a surface model."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..fuchsian.lorentz import J, distance, lcross, normalize_point, unit_tangent
from ..fuchsian.models import SurfaceModel


@dataclass(frozen=True)
class UnitTangentSample:
    polygon: int
    basepoint: np.ndarray
    direction: np.ndarray
    angle: float

    def reversed(self) -> "UnitTangentSample":
        return UnitTangentSample(self.polygon, self.basepoint, -self.direction, (self.angle + math.pi) % (2 * math.pi))


@dataclass(frozen=True)
class _Disk:
    centre: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    cosh_r: float


def _bounding_disks(model: SurfaceModel) -> list[_Disk]:
    out = []
    for verts in model.polygon.vertices:
        c = normalize_point(np.sum(verts, axis=0))
        radius = max(distance(c, v) for v in verts)
        e1 = unit_tangent(c, verts[0])
        out.append(_Disk(c, e1, lcross(c, e1), math.cosh(radius)))
    return out


def tangent_basis(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal tangent frames at an array of points (N, 3)."""
    a = np.zeros_like(x)
    a[:, 1] = 1.0
    e1 = a + x[:, 1:2] * x
    e1 /= np.sqrt(1.0 + x[:, 1:2] ** 2)
    e2 = np.cross(x, e1) @ J  # row-wise lcross(x, e1)
    return e1, e2


def sample_points(model: SurfaceModel, rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Area-uniform points: polygon chosen by area, then rejection from a bounding disk."""
    cx = model.polygon
    areas = np.array([cx.polygon_area(p) for p in range(cx.n_polygons)])
    polys = rng.choice(cx.n_polygons, size=n, p=areas / areas.sum()) if cx.n_polygons > 1 else np.zeros(n, dtype=np.int64)
    pts = np.empty((n, 3))
    disks = _bounding_disks(model)
    for p in range(cx.n_polygons):
        idx = np.flatnonzero(polys == p)
        if idx.size == 0:
            continue
        d = disks[p]
        normals = cx.side_normal[list(cx.sides_of(p))]
        disk_area = 2 * math.pi * (d.cosh_r - 1.0)
        accept = max(areas[p] / disk_area, 1e-3)
        got = []
        need = idx.size
        while need > 0:
            m = int(need / accept * 1.2) + 16
            u = rng.random(m)
            th = rng.random(m) * 2 * math.pi
            r = np.arccosh(1.0 + u * (d.cosh_r - 1.0))
            dirs = np.cos(th)[:, None] * d.e1 + np.sin(th)[:, None] * d.e2
            cand = np.cosh(r)[:, None] * d.centre + np.sinh(r)[:, None] * dirs
            inside = np.all((cand @ J) @ normals.T >= 0.0, axis=1)
            sel = cand[inside][:need]
            got.append(sel)
            need -= len(sel)
        pts[idx] = np.concatenate(got)
    return polys.astype(np.int64), pts


def sample_tangents(model: SurfaceModel, rng: np.random.Generator, n: int):
    """Return (polygons, points, directions, angles) for ``n`` Liouville-uniform vectors."""
    polys, x = sample_points(model, rng, n)
    angles = rng.random(n) * 2 * math.pi
    e1, e2 = tangent_basis(x)
    v = np.cos(angles)[:, None] * e1 + np.sin(angles)[:, None] * e2
    return polys, x, v, angles


def sample_tangent(model: SurfaceModel, rng: np.random.Generator) -> UnitTangentSample:
    polys, x, v, a = sample_tangents(model, rng, 1)
    return UnitTangentSample(int(polys[0]), x[0], v[0], float(a[0]))
