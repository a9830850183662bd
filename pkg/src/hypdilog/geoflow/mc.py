"""Monte Carlo estimation of spine-class measures.

Samples are processed in fixed-size blocks; block ``b`` draws from the
``b``-th child of ``SeedSequence(seed)``, so the report depends only on
(seed, n_samples, block size) and not on how many workers run the blocks.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .. import __version__
from ..errors import DomainError
from ..fuchsian.models import SurfaceModel
from ..hyptrig import pants_invariants
from ..terms import _l_m, _l_p, _la, bar_f, f_value, hat_f
from . import kernel as K
from .sampling import sample_tangents
from .spine import (
    DEFAULT_EPS_VERTEX,
    ChordClassifier,
    KernelGeometry,
    boundary_left_signs,
    kernel_geometry,
    min_coset_traces,
)

DEFAULT_BLOCK = 4096
REPORT_SCHEMA = 1
LENGTH_TOL = 1e-6


# ------------------------------------------------------------------ report


@dataclass
class MCReport:
    model_kind: str
    total_samples: int
    total_measure: float
    counts: dict[str, int]
    discarded: dict[str, int]
    seed: int
    workers: int
    block_size: int
    caps: dict[str, float]
    extra: dict = field(default_factory=dict)

    @property
    def n_discarded(self) -> int:
        return sum(self.discarded.values())

    @property
    def degenerate_fraction(self) -> float:
        return self.n_discarded / self.total_samples

    def count(self, labels: str | Iterable[str]) -> int:
        if isinstance(labels, str):
            labels = [labels]
        return sum(self.counts.get(lab, 0) for lab in labels)

    def estimate(self, labels: str | Iterable[str]) -> tuple[float, float]:
        """Measure estimate and binomial standard error of a union of classes."""
        n = self.total_samples
        p = self.count(labels) / n
        return p * self.total_measure, self.total_measure * math.sqrt(max(p * (1 - p), 0.0) / n)

    @property
    def estimates(self) -> dict[str, float]:
        return {k: self.estimate(k)[0] for k in sorted(self.counts)}

    @property
    def standard_errors(self) -> dict[str, float]:
        return {k: self.estimate(k)[1] for k in sorted(self.counts)}

    def prorated(self) -> dict[str, float]:
        """Estimates with the degenerate mass spread proportionally over the classes."""
        kept = self.total_samples - self.n_discarded
        return {k: c / kept * self.total_measure for k, c in sorted(self.counts.items())} if kept else {}

    def closure(self) -> float:
        """Sum of class estimates plus degenerate mass minus the total measure (zero)."""
        s = sum(self.counts.values()) + self.n_discarded
        return (s - self.total_samples) / self.total_samples * self.total_measure

    def to_dict(self) -> dict:
        d = asdict(self)
        d["schema_version"] = REPORT_SCHEMA
        d["library_version"] = __version__
        d["estimates"] = self.estimates
        d["standard_errors"] = self.standard_errors
        d["degenerate_fraction"] = self.degenerate_fraction
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), default=_json_default, **kw)


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(type(o))


# ------------------------------------------------------------------ block simulation


@dataclass
class RawBlock:
    status: np.ndarray
    code: np.ndarray
    bk: np.ndarray
    mat: np.ndarray
    sign: np.ndarray
    t: np.ndarray
    owner: np.ndarray
    loop: np.ndarray
    nf: np.ndarray
    faces: np.ndarray
    sig_n: np.ndarray
    sig_side: np.ndarray
    sig_pos: np.ndarray
    sig_dir: np.ndarray
    chord_bk: np.ndarray
    chord_cosh: np.ndarray
    chord_mat: np.ndarray


def simulate_block(model: SurfaceModel, geo: KernelGeometry, seed_seq: np.random.SeedSequence, n: int,
                   eps_vertex: float = DEFAULT_EPS_VERTEX) -> RawBlock:
    rng = np.random.default_rng(seed_seq)
    polys, xs, vs, _ = sample_tangents(model, rng, n)
    closed = geo.closed
    nc = n if closed else 0
    out = RawBlock(
        np.empty(n, np.int64), np.empty(n, np.int64), np.empty((n, 2), np.int64), np.zeros((n, 3, 3)),
        np.empty(n, np.int64), np.empty((n, 2)), np.empty(n, np.int64), np.empty(n, np.int64),
        np.zeros(n, np.int64), np.zeros((max(nc, 1), 3, 3, 3)), np.zeros((max(nc, 1), 3), np.int64),
        np.zeros((max(nc, 1), 3, K.SIG_CAP), np.int64), np.zeros((max(nc, 1), 3, K.SIG_CAP)),
        np.zeros((max(nc, 1), 3, K.SIG_CAP), np.int64),
        np.empty((n, 2), np.int64), np.empty(n), np.zeros((n, 3, 3)),
    )
    K.run_batch(*geo.batch_args(), np.ascontiguousarray(polys), np.ascontiguousarray(xs), np.ascontiguousarray(vs),
                geo.t_max, eps_vertex, closed, geo.centroid0,
                out.status, out.code, out.bk, out.mat, out.sign, out.t, out.owner, out.loop,
                out.nf, out.faces, out.sig_n, out.sig_side, out.sig_pos, out.sig_dir,
                out.chord_bk, out.chord_cosh, out.chord_mat)
    return out


def _blocks(n_samples: int, block: int) -> list[int]:
    full, rest = divmod(n_samples, block)
    return [block] * full + ([rest] if rest else [])


def simulate(model: SurfaceModel, n_samples: int, seed: int, workers: int = 1, block: int = DEFAULT_BLOCK,
             t_max: float | None = None, eps_vertex: float = DEFAULT_EPS_VERTEX):
    if n_samples < 1:
        raise DomainError("n_samples must be >= 1")
    geo = kernel_geometry(model, t_max)
    sizes = _blocks(n_samples, block)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = list(zip(seeds, sizes))

    def run(job):
        return simulate_block(model, geo, job[0], job[1], eps_vertex)

    if workers <= 1:
        raws = [run(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            raws = list(ex.map(run, jobs))
    return geo, raws


def _discard_counts(raws: Sequence[RawBlock]) -> Counter:
    c: Counter = Counter()
    for r in raws:
        for st in np.unique(r.status):
            if st != K.ST_OK:
                c[K.STATUS_NAMES[int(st)]] += int(np.sum(r.status == st))
    return c


def _report(model, n_samples, counts, discarded, seed, workers, block, geo, eps_vertex, extra=None) -> MCReport:
    return MCReport(model.kind, n_samples, model.total_measure, dict(sorted(counts.items())),
                    dict(sorted(discarded.items())), seed, workers, block,
                    {"t_max": geo.t_max, "eps_vertex": eps_vertex}, extra or {})


# ------------------------------------------------------------------ pants


def pants_labels(model: SurfaceModel, raw: RawBlock) -> Counter:
    """Fine class labels for one block of pants samples (see ``spine.classify``)."""
    left = boundary_left_signs(model)
    cc = ChordClassifier(model)
    c: Counter = Counter()
    ok = raw.status == K.ST_OK
    for i in np.flatnonzero(ok):
        lab = cc.pants(raw.chord_bk[i], raw.chord_cosh[i])
        if lab is not None:
            c[lab] += 1
            continue
        code = raw.code[i]
        if code == K.CODE_SPINE:
            c["W(P)"] += 1
        elif code == K.CODE_ARC:
            c["unmatched_arc"] += 1
        else:
            boundary_ray = 0 if raw.bk[i, 0] >= 0 else 1
            stem = raw.bk[i, boundary_ray]
            loop = raw.loop[i]
            if loop < 0 or loop == stem:
                c["unmatched_loop"] += 1
                continue
            j = 3 - loop - stem
            sgn = "+" if raw.sign[i] * left[loop] > 0 else "-"
            orient = "pos" if boundary_ray == 1 else "neg"
            c[f"W(L{loop + 1}{sgn},M{j + 1})/{orient}"] += 1
    return c


def pants_groups() -> dict[str, list[str]]:
    """Named unions of fine pants classes."""
    g: dict[str, list[str]] = {"W(P)": ["W(P)"]}
    for i in range(1, 4):
        g[f"H(M{i})"] = [f"H(M{i})+", f"H(M{i})-"]
        g[f"H(B{i})"] = [f"H(B{i})"]
    for i in range(1, 4):
        for j in range(1, 4):
            if i == j:
                continue
            fine = [f"W(L{i}{s},M{j})/{o}" for s in "+-" for o in ("pos", "neg")]
            g[f"W(L{i},M{j})"] = fine
            for lab in fine:
                g[lab] = [lab]
    return g


def pants_theory(lengths) -> dict[str, float]:
    """Closed-form measures of the pants classes, keyed like ``pants_groups``."""
    inv = pants_invariants(lengths)
    th = {"W(P)": f_value(lengths)}
    for i in range(3):
        th[f"H(M{i + 1})"] = 8.0 * float(_l_m(inv, i))
        th[f"H(B{i + 1})"] = 8.0 * float(_l_p(inv, i))
    for i in range(3):
        for j in range(3):
            if i == j:
                continue
            la = float(_la(inv, i, j))
            th[f"W(L{i + 1},M{j + 1})"] = 8.0 * la
            for s in "+-":
                for o in ("pos", "neg"):
                    th[f"W(L{i + 1}{s},M{j + 1})/{o}"] = 2.0 * la
    return th


def run_mc(model: SurfaceModel, n_samples: int, seed: int = 0, workers: int = 1, block: int = DEFAULT_BLOCK,
           t_max: float | None = None, eps_vertex: float = DEFAULT_EPS_VERTEX, **kw) -> MCReport:
    """Spine-class Monte Carlo; dispatches on the model kind."""
    if model.kind == "OneHoledTorus":
        return run_mc_torus(model, n_samples, seed, workers, block=block, t_max=t_max, eps_vertex=eps_vertex, **kw)
    if model.kind == "GenusTwo":
        return run_mc_closed(model, n_samples, seed, workers, block=block, t_max=t_max, eps_vertex=eps_vertex)
    if model.kind != "Pants":
        raise DomainError(f"no Monte Carlo classifier for {model.kind}")
    geo, raws = simulate(model, n_samples, seed, workers, block, t_max, eps_vertex)
    counts: Counter = Counter()
    for r in raws:
        counts += pants_labels(model, r)
    disc = _discard_counts(raws)
    for bad in ("unmatched_loop", "unmatched_arc"):
        if bad in counts:
            disc[bad] = counts.pop(bad)
    return _report(model, n_samples, counts, disc, seed, workers, block, geo, eps_vertex,
                   {"lengths": list(model.params["lengths"])})


def compare_pants(report: MCReport, sigmas: float = 4.0) -> list[dict]:
    """Theory-vs-estimate rows for every pants class group."""
    th = pants_theory(tuple(report.extra["lengths"]))
    rows = []
    for name, labels in pants_groups().items():
        est, se = report.estimate(labels)
        z = (est - th[name]) / se if se > 0 else (0.0 if est == th[name] else math.inf)
        rows.append({"class": name, "theory": th[name], "estimate": est, "se": se, "z": z,
                     "pass": abs(z) <= sigmas})
    return rows


_BORDERED = {
    "HatF": ["W(P)", "H(B1)", "W(L2,M3)", "W(L3,M2)"],
    "BarF": ["W(P)", "H(B1)", "H(B2)", "H(M3)", "W(L2,M3)", "W(L3,M2)", "W(L1,M3)", "W(L3,M1)"],
}


def aggregate_bordered(report: MCReport, convention: str) -> tuple[float, float]:
    """Measure of spines of a bordered pants (boundary 1, or 1 and 2, on the outer border).

    Returns (estimate, standard error)."""
    if report.model_kind != "Pants":
        raise DomainError("bordered aggregation needs a pants report")
    if convention not in _BORDERED:
        raise DomainError(f"unknown convention {convention!r}")
    groups = pants_groups()
    labels = [lab for g in _BORDERED[convention] for lab in groups[g]]
    return report.estimate(labels)


def bordered_theory(lengths, convention: str) -> float:
    return (hat_f(lengths) if convention == "HatF" else bar_f(lengths)).value


# ------------------------------------------------------------------ one-holed torus


def torus_curve_lengths(G: np.ndarray, delta: np.ndarray) -> np.ndarray:
    """Vectorised ``spine.torus_arc_curve_length``."""
    tr = np.sqrt(np.maximum(min_coset_traces(G, delta) + 1.0, 0.0))
    return 2.0 * np.arccosh(np.maximum(tr / 2.0, 1.0))


def run_mc_torus(model: SurfaceModel, n_samples: int, seed: int = 0, workers: int = 1, l_max: float = 12.0,
                 block: int = DEFAULT_BLOCK, t_max: float | None = None,
                 eps_vertex: float = DEFAULT_EPS_VERTEX) -> MCReport:
    """Torus Monte Carlo with arcs and lassos binned by the disjoint curve A.

    Bins are the distinct lengths of curves with ``a <= l_max``; anything
    longer goes to the deep-tail bins."""
    from ..spectrum import TorusMarking, enumerate_torus_curves

    if model.kind != "OneHoledTorus":
        raise DomainError("run_mc_torus needs a one-holed torus model")
    marking = TorusMarking(*model.params["marking"])
    records = sorted(enumerate_torus_curves(marking, l_max), key=lambda r: r.a)
    lengths: list[float] = []
    mult: list[int] = []
    for r in records:
        if lengths and abs(r.a - lengths[-1]) <= LENGTH_TOL * r.a:
            mult[-1] += 1
        else:
            lengths.append(r.a)
            mult.append(1)
    L = np.array(lengths)
    geo, raws = simulate(model, n_samples, seed, workers, block, t_max, eps_vertex)
    delta = model.boundary[0].delta
    cc = ChordClassifier(model)
    counts: Counter = Counter()

    def bin_of(ai: float) -> str:
        q = int(np.searchsorted(L, ai))
        for r in (q - 1, q):
            if 0 <= r < len(L) and abs(L[r] - ai) <= LENGTH_TOL * max(ai, 1.0):
                return str(r)
        return "tail" if ai > l_max else "unmatched"

    for raw in raws:
        ok = np.flatnonzero(raw.status == K.ST_OK)
        has_chord = ok[raw.chord_bk[ok, 0] >= 0]
        a_chord = np.full(len(raw.status), np.nan)
        if has_chord.size:
            a_chord[has_chord] = torus_curve_lengths(raw.chord_mat[has_chord], delta)
        for i in ok:
            if raw.chord_bk[i, 0] >= 0:
                a = cc.torus(raw.chord_bk[i], raw.chord_cosh[i], raw.chord_mat[i], float(a_chord[i]))
                if a is not None:
                    counts[f"H_A[{bin_of(a)}]"] += 1
                    continue
            code = raw.code[i]
            if code == K.CODE_SPINE:
                counts["W(T)"] += 1
            elif code == K.CODE_ARC:
                counts["unmatched_arc"] += 1
            else:
                tr = math.sqrt(max(float(np.trace(raw.mat[i])) + 1.0, 0.0))
                counts[f"W_A[{bin_of(2.0 * math.acosh(max(tr / 2.0, 1.0)))}]"] += 1
    disc = _discard_counts(raws)
    if "unmatched_arc" in counts:
        disc["unmatched_arc"] = counts.pop("unmatched_arc")
    extra = {"l_max": l_max, "marking": [marking.x, marking.y, marking.z], "curve_lengths": lengths,
             "multiplicity": mult}
    return _report(model, n_samples, counts, disc, seed, workers, block, geo, eps_vertex, extra)


def torus_bin_theory(report: MCReport, index: int) -> dict[str, float]:
    """Closed-form H and W measures of the A-bin ``index`` (times its multiplicity)."""
    from ..dilog import lasso, rogers_l_pair
    from ..hyptrig import torus_cut_invariants

    a = report.extra["curve_lengths"][index]
    k = report.extra["multiplicity"][index]
    marking = report.extra["marking"]
    from ..spectrum import TorusMarking

    cut = torus_cut_invariants(TorusMarking(*marking).c, a)
    h = 8.0 * rogers_l_pair(cut.inv_cosh2_p_A, 1.0 - cut.inv_cosh2_p_A)
    w = 16.0 * float(lasso(a, cut.m_A))
    return {"H": k * h, "W": k * w}


# ------------------------------------------------------------------ closed surfaces


class CurveRegistry:
    """Identifies oriented closed geodesics by their sorted side crossings."""

    def __init__(self, tol: float = 1e-6):
        self.tol = tol
        self._by_struct: dict[tuple, list[tuple[np.ndarray, int]]] = {}
        self.lengths: list[float] = []

    def oriented(self, sides, pos, dirs, length: float) -> int:
        struct = (tuple(int(x) for x in sides), tuple(int(x) for x in dirs))
        pos = np.asarray(pos, dtype=float)
        bucket = self._by_struct.setdefault(struct, [])
        for p, cid in bucket:
            if np.max(np.abs(p - pos), initial=0.0) <= self.tol:
                return cid
        cid = len(self.lengths)
        self.lengths.append(length)
        bucket.append((pos.copy(), cid))
        return cid


def closed_signature(geo: KernelGeometry, M: np.ndarray, eps_vertex: float = DEFAULT_EPS_VERTEX):
    """(sides, positions, directions) of the closed geodesic of M, or None."""
    side = np.zeros(K.SIG_CAP, np.int64)
    pos = np.zeros(K.SIG_CAP)
    dirs = np.zeros(K.SIG_CAP, np.int64)
    a = geo.arrays
    n = K.signature(np.ascontiguousarray(M, dtype=float), *a[:9], geo.home[0], geo.centroid0, eps_vertex,
                    side, pos, dirs)
    if n < 0:
        return None
    return side[:n], pos[:n], dirs[:n]


def _face_length(M: np.ndarray) -> float:
    c = 0.5 * (float(np.trace(M)) - 1.0)
    return math.acosh(c) if c > 1.0 else 0.0


def run_mc_closed(model: SurfaceModel, n_samples: int, seed: int = 0, workers: int = 1,
                  block: int = DEFAULT_BLOCK, t_max: float | None = None,
                  eps_vertex: float = DEFAULT_EPS_VERTEX) -> MCReport:
    """Closed-surface Monte Carlo: every spine is binned by its simple subsurface.

    A regular neighbourhood of the spine has three boundary loops (pants
    type) or one (torus type); when two of the three loops are the same
    closed geodesic with opposite orientations the subsurface is a one-holed
    torus.  Pants are identified by their three oriented boundary geodesics,
    which tells apart the two pants sharing the same boundary curves.
    """
    if model.boundary:
        raise DomainError("run_mc_closed needs a closed surface model")
    geo, raws = simulate(model, n_samples, seed, workers, block, t_max, eps_vertex)
    reg = CurveRegistry()
    counts: Counter = Counter()
    disc = _discard_counts(raws)
    pants_bins: Counter = Counter()
    pants_lengths: dict[tuple, tuple] = {}
    torus_bins: Counter = Counter()
    for raw in raws:
        for i in np.flatnonzero(raw.status == K.ST_OK):
            nf = int(raw.nf[i])
            if nf not in (1, 3) or np.any(raw.sig_n[i, :nf] <= 0):
                disc["signature"] += 1
                continue
            if nf == 1:
                counts["TorusLike"] += 1
                torus_bins[round(_face_length(raw.faces[i, 0]), 6)] += 1
                continue
            lens = [_face_length(raw.faces[i, f]) for f in range(3)]
            ids = []
            for f in range(3):
                c = int(raw.sig_n[i, f])
                ids.append(reg.oriented(raw.sig_side[i, f, :c], raw.sig_pos[i, f, :c], raw.sig_dir[i, f, :c],
                                        lens[f]))
            twin = _reversed_pair(geo, raw.faces[i], ids, lens, reg, eps_vertex)
            if twin is None:
                disc["signature"] += 1
                continue
            if twin:
                counts["TorusLike"] += 1
                odd = [f for f in range(3) if f not in twin]
                torus_bins[round(lens[odd[0]], 6)] += 1
                continue
            counts["PantsLike"] += 1
            key = tuple(sorted(ids))
            pants_bins[key] += 1
            if key not in pants_lengths:
                pants_lengths[key] = tuple(sorted(lens))
    extra = {"pants_bins": _pants_bin_rows(pants_bins, pants_lengths, n_samples, model.total_measure),
             "length_bins": _length_bin_rows(pants_bins, pants_lengths, n_samples, model.total_measure),
             "torus_bins": _merge_lengths(torus_bins),
             "distinct_curves": len(reg.lengths)}
    return _report(model, n_samples, counts, disc, seed, workers, block, geo, eps_vertex, extra)


def _reversed_pair(geo, faces, ids, lens, reg: CurveRegistry, eps_vertex) -> tuple[int, int] | None | tuple:
    """Two faces bounding the same geodesic with opposite orientations, () if none, None on failure."""
    for f in range(3):
        for g in range(f + 1, 3):
            if abs(lens[f] - lens[g]) > 1e-7 * max(lens[f], 1.0):
                continue
            sig = closed_signature(geo, np.linalg.inv(faces[g]), eps_vertex)
            if sig is None:
                return None
            if reg.oriented(*sig, lens[g]) == ids[f]:
                return (f, g)
    return ()


def _merge_lengths(counter: Counter, tol: float = 1e-5) -> list[dict]:
    rows: list[dict] = []
    for length, cnt in sorted(counter.items()):
        if rows and length - rows[-1]["length"] <= tol:
            rows[-1]["count"] += cnt
        else:
            rows.append({"length": length, "count": cnt})
    return rows


def _binom(count: int, n: int, total: float) -> tuple[float, float]:
    p = count / n
    return p * total, total * math.sqrt(p * (1 - p) / n)


def _pants_bin_rows(bins: Counter, lengths: dict, n: int, total: float) -> list[dict]:
    rows = []
    for key, cnt in bins.most_common():
        est, se = _binom(cnt, n, total)
        ls = lengths[key]
        th = f_value(ls)
        rows.append({"identity": list(key), "lengths": list(ls), "count": cnt, "estimate": est, "se": se,
                     "f": th, "z": (est - th) / se if se > 0 else math.inf})
    return rows


def _length_bin_rows(bins: Counter, lengths: dict, n: int, total: float) -> list[dict]:
    """Pants bins merged by boundary-length triple (within the length tolerance)."""
    merged: list[dict] = []
    for key, cnt in bins.most_common():
        ls = lengths[key]
        for row in merged:
            if max(abs(a - b) for a, b in zip(row["lengths"], ls)) <= LENGTH_TOL:
                row["count"] += cnt
                row["distinct_pants"] += 1
                break
        else:
            merged.append({"lengths": list(ls), "count": cnt, "distinct_pants": 1})
    for row in merged:
        row["estimate"], row["se"] = _binom(row["count"], n, total)
        row["f"] = f_value(tuple(row["lengths"]))
        row["ratio_to_f"] = row["estimate"] / row["f"]
    merged.sort(key=lambda r: -r["count"])
    return merged
