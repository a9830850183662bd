"""Plain-text dump/load of surface models.

Format (one record per line, ``#`` starts a comment, numbers with 17
significant digits)::

    format hypdilog-model 1
    kind Pants
    param lengths 1.0 2.0 3.0
    generator X a b c d
    vertex <polygon> <index> <re> <im>
    pairing <side> <partner side> a b c d

Generators are SL(2, R) matrices acting on the upper half-plane, vertices
are upper-half-plane points in the root frame, and pairings are the side
maps in the same chart.  Loading rebuilds the model from its constructor
parameters and checks every recorded number against the rebuilt one, so a
file that does not describe the stated construction is rejected.
"""

from __future__ import annotations

import io
from typing import TextIO

import numpy as np

from ..errors import ConstructionError, DomainError
from .lorentz import so21_to_sl2, to_upper_half_plane
from .models import SurfaceModel, build_four_holed, build_genus2_octagon, build_pants, build_torus

FORMAT_TAG = "hypdilog-model"
FORMAT_VERSION = 1
LOAD_TOL = 1e-12


def _num(v: float) -> str:
    return format(float(v), ".17g")


def _sl2(m: np.ndarray) -> np.ndarray:
    s = so21_to_sl2(m)
    # fix the sign ambiguity: first nonzero entry positive
    flat = s.ravel()
    k = int(np.flatnonzero(np.abs(flat) > 1e-300)[0])
    return s if flat[k] > 0 else -s


def _records(model: SurfaceModel) -> list[str]:
    lines = [f"format {FORMAT_TAG} {FORMAT_VERSION}", f"kind {model.kind}"]
    for key, val in sorted(model.params.items()):
        vals = val if isinstance(val, (tuple, list)) else (val,)
        lines.append("param " + key + " " + " ".join(_num(v) for v in vals))
    for name, g in zip(model.generator_names, model.generators):
        lines.append("generator " + name + " " + " ".join(_num(v) for v in _sl2(g).ravel()))
    cx = model.polygon
    for p, verts in enumerate(cx.vertices):
        for k, v in enumerate(verts):
            z = to_upper_half_plane(cx.home[p] @ v)
            lines.append(f"vertex {p} {k} {_num(z.real)} {_num(z.imag)}")
    for s in range(cx.n_sides):
        t = int(cx.side_partner[s])
        if t < 0:
            continue
        hs = cx.home[cx.side_poly[s]]
        ht = cx.home[cx.side_poly[t]]
        g = ht @ cx.side_map[s] @ np.linalg.inv(hs)
        lines.append(f"pairing {s} {t} " + " ".join(_num(v) for v in _sl2(g).ravel()))
    return lines


def dump_model(model: SurfaceModel, fh: TextIO) -> None:
    fh.write("\n".join(_records(model)) + "\n")


def dumps_model(model: SurfaceModel) -> str:
    buf = io.StringIO()
    dump_model(model, buf)
    return buf.getvalue()


def _parse(fh: TextIO) -> dict:
    out: dict = {"params": {}, "generator": [], "vertex": [], "pairing": []}
    for raw in fh:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        if head == "format":
            if rest != [FORMAT_TAG, str(FORMAT_VERSION)]:
                raise DomainError(f"unsupported format line: {line!r}")
            out["format"] = True
        elif head == "kind":
            out["kind"] = rest[0]
        elif head == "param":
            out["params"][rest[0]] = [float(v) for v in rest[1:]]
        elif head == "generator":
            out["generator"].append((rest[0], [float(v) for v in rest[1:]]))
        elif head in ("vertex", "pairing"):
            out[head].append([float(v) for v in rest])
        else:
            raise DomainError(f"unknown record {head!r}")
    if "format" not in out or "kind" not in out:
        raise DomainError("missing format or kind record")
    return out


def _rebuild(kind: str, params: dict) -> SurfaceModel:
    try:
        if kind == "Pants":
            return build_pants(tuple(params["lengths"]))
        if kind == "OneHoledTorus":
            return build_torus(tuple(params["marking"]))
        if kind == "FourHoledSphere":
            return build_four_holed(params["boundary"], params["interior"][0], params["twist"][0])
        if kind == "GenusTwo":
            return build_genus2_octagon()
    except KeyError as exc:
        raise DomainError(f"missing parameter {exc} for {kind}") from exc
    raise DomainError(f"unknown model kind {kind!r}")


def load_model(fh: TextIO, tol: float = LOAD_TOL) -> SurfaceModel:
    data = _parse(fh)
    model = _rebuild(data["kind"], data["params"])
    ref = _parse(io.StringIO(dumps_model(model)))
    for key in ("generator", "vertex", "pairing"):
        got, want = data[key], ref[key]
        if len(got) != len(want):
            raise ConstructionError(f"{key} count {len(got)} differs from the rebuilt model ({len(want)})")
        for a, b in zip(got, want):
            va = np.asarray(a[1] if key == "generator" else a, float)
            vb = np.asarray(b[1] if key == "generator" else b, float)
            if key == "generator" and a[0] != b[0]:
                raise ConstructionError(f"generator name {a[0]} differs from {b[0]}")
            if np.max(np.abs(va - vb) / np.maximum(1.0, np.abs(vb))) > tol:
                raise ConstructionError(f"{key} record {a} differs from the rebuilt model")
    return model


def loads_model(text: str, tol: float = LOAD_TOL) -> SurfaceModel:
    return load_model(io.StringIO(text), tol)
