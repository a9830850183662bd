import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from hypdilog.errors import DomainError
from hypdilog.fuchsian import build_four_holed, build_genus2_octagon, build_pants, build_torus
from hypdilog.fuchsian.lorentz import (
    axis_normal,
    geodesic_intersection,
    geodesic_point,
    lcross,
    lorentz_inverse,
    normalize_space,
    unit_tangent,
)
from hypdilog.fuchsian.trace import RayState, flow, locate
from hypdilog.geoflow import (
    UnitTangentSample,
    aggregate_bordered,
    classify,
    compare_pants,
    grow_spine,
    pants_theory,
    run_mc,
    sample_tangent,
)
from hypdilog.geoflow.mc import pants_groups
from hypdilog.geoflow.sampling import sample_tangents
from hypdilog.hyptrig import pants_invariants

from .brute_spine import brute_force_spine

LENGTHS = (1.0, 2.0, 3.0)
PANTS = build_pants(LENGTHS)
TORUS = build_torus((3, 3, 4))
FOUR_HOLED = build_four_holed([1.0, 1.5, 2.0, 2.5], 2.0, 0.3)
GENUS2 = build_genus2_octagon()
BORDERED = {"pants": PANTS, "torus": TORUS, "four_holed": FOUR_HOLED}


@pytest.fixture(scope="module")
def pants_report():
    return run_mc(PANTS, 100_000, seed=11, workers=2)


# ------------------------------------------------------------------ sampling


def test_sampling_is_deterministic():
    a = sample_tangents(GENUS2, np.random.default_rng(4), 500)
    b = sample_tangents(GENUS2, np.random.default_rng(4), 500)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


def test_samples_lie_on_the_unit_tangent_bundle():
    _, x, v, _ = sample_tangents(PANTS, np.random.default_rng(0), 200)
    q = lambda a, b: -a[:, 0] * b[:, 0] + a[:, 1] * b[:, 1] + a[:, 2] * b[:, 2]  # noqa: E731
    assert np.allclose(q(x, x), -1.0, atol=1e-12)
    assert np.allclose(q(v, v), 1.0, atol=1e-12)
    assert np.allclose(q(x, v), 0.0, atol=1e-12)


def test_octagon_area_sampling():
    # the octagon is centred at the origin and its inradius exceeds acosh 2,
    # so the disk cosh(r) < 2 holds exactly half the area (2 pi over 4 pi)
    n = 40_000
    _, x, _, angles = sample_tangents(GENUS2, np.random.default_rng(1), n)
    se = math.sqrt(0.25 / n)
    assert abs(np.mean(x[:, 1] > 0) - 0.5) < 4 * se
    assert abs(np.mean(x[:, 0] < 2.0) - 0.5) < 4 * se
    hist, _ = np.histogram(angles, bins=16, range=(0, 2 * math.pi))
    assert stats.chisquare(hist).pvalue > 0.01


def test_polygons_chosen_by_area():
    cx = FOUR_HOLED.polygon
    areas = np.array([cx.polygon_area(p) for p in range(cx.n_polygons)])
    polys, _, _, _ = sample_tangents(FOUR_HOLED, np.random.default_rng(2), 20_000)
    counts = np.bincount(polys, minlength=cx.n_polygons)
    assert stats.chisquare(counts, areas / areas.sum() * counts.sum()).pvalue > 0.01


# ------------------------------------------------------------------ spine growth


@pytest.mark.parametrize("name", list(BORDERED) + ["genus2"])
def test_spine_matches_brute_force(name):
    model = BORDERED.get(name, GENUS2)
    rng = np.random.default_rng(17)
    for _ in range(40):
        v = sample_tangent(model, rng)
        g = grow_spine(model, v)
        assert g.status == "ok"
        want = brute_force_spine(model, v)
        assert g.t1 == pytest.approx(want.t1, rel=1e-8, abs=1e-8)
        assert g.t2 == pytest.approx(want.t2, rel=1e-8, abs=1e-8)
        assert (g.first.kind, g.first.ray) == want.first
        assert (g.second.kind, g.second.ray) == want.second


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(list(BORDERED)))
def test_t1_at_most_t2(seed, name):
    model = BORDERED[name]
    g = grow_spine(model, sample_tangent(model, np.random.default_rng(seed)))
    assert g.t1 <= g.t2
    assert g.first.time == pytest.approx(g.t1, abs=1e-12)


@pytest.mark.parametrize("name", list(BORDERED))
def test_reversal_swaps_rays(name):
    model = BORDERED[name]
    rng = np.random.default_rng(23)
    for _ in range(25):
        v = sample_tangent(model, rng)
        a = grow_spine(model, v)
        b = grow_spine(model, v.reversed())
        assert (b.t1, b.t2) == pytest.approx((a.t1, a.t2), abs=1e-9)
        assert (b.first.kind, b.second.kind) == (a.first.kind, a.second.kind)
        assert b.first.ray == 1 - a.first.ray
        assert a.boundary_components_touched == b.boundary_components_touched


def test_arcs_cover_grown_rays():
    g = grow_spine(PANTS, sample_tangent(PANTS, np.random.default_rng(3)))
    for ray, arcs in ((0, g.plus_arcs), (1, g.minus_arcs)):
        assert math.fsum(a.length for a in arcs) == pytest.approx(g.ray_length(ray), abs=1e-12)
        assert arcs[0].t_start == 0.0


# ------------------------------------------------------------------ orthogeodesic rays


def _perpendicular_sample(model, a, b, frac):
    """Tangent vector on the common perpendicular of the axes of a and b, aimed at b."""
    na, nb = axis_normal(a), axis_normal(b)
    perp = normalize_space(lcross(na, nb))
    foot_a, foot_b = geodesic_intersection(na, perp), geodesic_intersection(nb, perp)
    d = math.acosh(-(-foot_a[0] * foot_b[0] + foot_a[1] * foot_b[1] + foot_a[2] * foot_b[2]))
    p = geodesic_point(foot_a, unit_tangent(foot_a, foot_b), frac * d)
    loc = locate(model, p)
    assert loc.inside
    w = lorentz_inverse(loc.copy) @ unit_tangent(p, foot_b)
    return UnitTangentSample(loc.polygon, loc.point, normalize_space(w), 0.0), d


def _arc_cases():
    x, y = PANTS.generators
    g3 = PANTS.extra["gamma3"]
    inv = pants_invariants(LENGTHS)
    conj = lambda c, e: c @ e @ lorentz_inverse(c)  # noqa: E731
    # the M2 and M3 seams are glued polygon sides, so rays along them graze vertices
    return [
        (y, g3, inv.m[0], "H(M1)"),
        (x, conj(y, x), inv.p[0], "H(B1)"),
        (y, conj(x, y), inv.p[1], "H(B2)"),
        (g3, conj(x, g3), inv.p[2], "H(B3)"),
    ]


@pytest.mark.parametrize("case", range(4))
@pytest.mark.parametrize("frac", [0.3, 0.55])
def test_ray_on_orthogeodesic(case, frac):
    a, b, length, group = _arc_cases()[case]
    v, d = _perpendicular_sample(PANTS, a, b, frac)
    assert d == pytest.approx(length, rel=1e-9)
    g = grow_spine(PANTS, v)
    assert g.first.kind == g.second.kind == "boundary"
    assert g.t1 == pytest.approx(min(frac, 1 - frac) * length, abs=1e-8)
    assert g.t2 == pytest.approx(max(frac, 1 - frac) * length, abs=1e-8)
    assert classify(PANTS, g).label in pants_groups()[group]


def test_seam_class_follows_endpoint_components():
    v, _ = _perpendicular_sample(PANTS, *_arc_cases()[0][:2], 0.4)
    c = classify(PANTS, grow_spine(PANTS, v))
    assert c.kind == "SimpleArc"
    # M1 joins boundaries 2 and 3 (indices 1 and 2)
    assert set(c.detail["ends"]) == {1, 2}


# ------------------------------------------------------------------ lassos


def _along(model, v, tau):
    d = v.direction if tau >= 0 else -v.direction
    _, end = flow(model, RayState(v.polygon, v.basepoint.copy(), d.copy()), abs(tau))
    return UnitTangentSample(end.polygon, end.x, end.v if tau >= 0 else -end.v, 0.0)


def _lasso_samples(n, seed):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        v = sample_tangent(PANTS, rng)
        g = grow_spine(PANTS, v)
        c = classify(PANTS, g)
        if c.kind == "Lasso":
            out.append((v, g, c))
    return out


def test_lasso_labels_are_consistent():
    for _, g, c in _lasso_samples(30, 5):
        loop, stem = c.detail["loop"], c.detail["stem"]
        assert loop != stem
        assert c.label.startswith(f"W(L{loop + 1}")
        assert f"M{3 - loop - stem + 1})" in c.label
        knot = g.first if g.first.kind == "knot" else g.second
        base = g.first if g.first.kind == "boundary" else g.second
        assert knot.kind == "knot" and base.kind == "boundary" and base.boundary == stem


@pytest.mark.parametrize("k", range(5))
def test_midpoint_criterion(k):
    v, g, c = _lasso_samples(5, 8)[k]
    base, knot = (g.first, g.second) if g.first.kind == "boundary" else (g.second, g.first)
    # arc-length along the lasso from its base point
    sign = 1 if base.ray == 1 else -1
    path = v if sign == 1 else v.reversed()
    t_base = base.time
    t_close = t_base + knot.time
    t_knot = t_base + (knot.partner_time if knot.partner_ray == knot.ray else -knot.partner_time)
    mid = 0.5 * (t_knot + t_close)
    below = _along(PANTS, path, mid - 1e-3 - t_base)
    below = below if sign == 1 else below.reversed()
    gb = grow_spine(PANTS, below)
    assert classify(PANTS, gb).label == c.label
    assert sorted((gb.t1, gb.t2)) == pytest.approx(sorted((t_close - mid + 1e-3, mid - 1e-3)), abs=1e-7)
    above = _along(PANTS, path, mid + 1e-3 - t_base)
    above = above if sign == 1 else above.reversed()
    assert classify(PANTS, grow_spine(PANTS, above)).label != c.label


# ------------------------------------------------------------------ Monte Carlo


def test_report_independent_of_workers():
    base = run_mc(PANTS, 9000, seed=3, workers=1, block=1000)
    for w in (4, 8):
        other = run_mc(PANTS, 9000, seed=3, workers=w, block=1000)
        assert other.counts == base.counts
        assert other.discarded == base.discarded


def test_seed_changes_sample():
    a = run_mc(PANTS, 5000, seed=1)
    b = run_mc(PANTS, 5000, seed=2)
    assert a.counts != b.counts


def test_closure_and_proration(pants_report):
    r = pants_report
    assert sum(r.counts.values()) + r.n_discarded == r.total_samples
    assert r.closure() == 0.0
    assert math.fsum(r.prorated().values()) == pytest.approx(r.total_measure, rel=1e-12)
    assert r.degenerate_fraction < 1e-3


def test_pants_classes_match_theory(pants_report):
    rows = compare_pants(pants_report)
    assert len(rows) == len(pants_groups())
    assert all(row["pass"] for row in rows), [row for row in rows if not row["pass"]]


def test_only_lemma_classes_occur(pants_report):
    allowed = {lab for labs in pants_groups().values() for lab in labs}
    assert set(pants_report.counts) <= allowed
    fine_lassos = [k for k in allowed if k.startswith("W(L")]
    assert len(fine_lassos) == 24
    arcs = [k for k in allowed if k.startswith("H(")]
    assert len(arcs) == 9


def test_orientation_and_reflection_symmetry(pants_report):
    r = pants_report
    for i in range(1, 4):
        for j in range(1, 4):
            if i == j:
                continue
            pos = [f"W(L{i}{s},M{j})/pos" for s in "+-"]
            neg = [f"W(L{i}{s},M{j})/neg" for s in "+-"]
            plus = [f"W(L{i}+,M{j})/{o}" for o in ("pos", "neg")]
            minus = [f"W(L{i}-,M{j})/{o}" for o in ("pos", "neg")]
            for a, b in ((pos, neg), (plus, minus)):
                ea, sa = r.estimate(a)
                eb, sb = r.estimate(b)
                assert abs(ea - eb) <= 4 * math.hypot(sa, sb)


def test_bordered_aggregation(pants_report):
    for conv in ("HatF", "BarF"):
        est, se = aggregate_bordered(pants_report, conv)
        from hypdilog.geoflow import bordered_theory

        assert abs(est - bordered_theory(LENGTHS, conv)) <= 4 * se
    th = pants_theory(LENGTHS)
    hat, _ = aggregate_bordered(pants_report, "HatF")
    bar, _ = aggregate_bordered(pants_report, "BarF")
    extra = ["H(B2)", "H(M3)", "W(L1,M3)", "W(L3,M1)"]
    groups = pants_groups()
    _, se = pants_report.estimate([lab for g in extra for lab in groups[g]])
    assert abs((bar - hat) - sum(th[g] for g in extra)) <= 4 * se


def test_aggregation_rejects_bad_input(pants_report):
    with pytest.raises(DomainError):
        aggregate_bordered(pants_report, "Other")
    torus = run_mc(TORUS, 500, seed=0)
    with pytest.raises(DomainError):
        aggregate_bordered(torus, "HatF")


def test_report_json_schema(pants_report):
    d = json.loads(pants_report.to_json())
    for key in ("schema_version", "library_version", "total_samples", "counts", "estimates", "standard_errors",
                "discarded", "seed", "workers", "caps", "degenerate_fraction"):
        assert key in d
    assert d["seed"] == 11
    assert d["caps"]["t_max"] > 0


def test_torus_tail_shrinks_with_cap():
    def tail(l_max):
        r = run_mc(TORUS, 20_000, seed=9, l_max=l_max)
        return r.count([k for k in r.counts if "tail" in k])

    counts = [tail(lm) for lm in (4.0, 8.0, 12.0)]
    assert counts[0] > counts[1] > counts[2]


def test_torus_closure():
    r = run_mc(TORUS, 20_000, seed=4)
    assert sum(r.counts.values()) + r.n_discarded == r.total_samples
    assert r.degenerate_fraction < 1e-3
    assert "W(T)" in r.counts


def test_genus2_closure_and_bins():
    r = run_mc(GENUS2, 5000, seed=6, workers=2)
    assert set(r.counts) <= {"PantsLike", "TorusLike"}
    assert sum(r.counts.values()) + r.n_discarded == r.total_samples
    assert r.degenerate_fraction < 5e-3
    bins = r.extra["pants_bins"]
    assert sum(b["count"] for b in bins) == r.counts["PantsLike"]
    assert all(len(b["lengths"]) == 3 and b["f"] > 0 for b in bins)


def test_run_mc_rejects_unsupported_model():
    with pytest.raises(DomainError):
        run_mc(FOUR_HOLED, 10)
    with pytest.raises(DomainError):
        run_mc(PANTS, 0)
