"""Compiled spine growth on a polygon complex.

Both geodesic rays from a unit tangent vector are developed through the
side pairings.  Phase one grows them at equal speed until the union first
meets the boundary or itself (time ``t1``); the ray that arrives at that
event stops there, and phase two continues the other ray until it meets
the boundary, itself, or the stopped ray (time ``t2``).

Rather than stepping with a fixed increment, each ray is extended one whole
polygon crossing at a time (the lagging ray first) and every new segment is
intersected in closed form with the stored segments in the same polygon.
This gives event times to rounding accuracy.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

ST_OK = 0
ST_TMAX = 1
ST_VERTEX = 2
ST_CAPACITY = 3
ST_NUMERIC = 4
ST_SIGNATURE = 5
STATUS_NAMES = ("ok", "t_max", "vertex", "capacity", "numeric", "signature")

EV_BOUNDARY = 0
EV_KNOT = 1

CODE_ARC = 0
CODE_LASSO = 1
CODE_SPINE = 2

SEG_CAP = 4096
VERTEX_PUSH = 1e-3
SIG_VERTEX_TOL = 1e-6
SIG_CAP = 96

# ev layout (int64): 0 status, 1 owner ray, 2 ev1 type, 3 ev1 own seg,
# 4 ev1 partner seg or boundary side, 5 ev2 type, 6 ev2 own seg, 7 ev2 partner/side
# evf layout: 0 t1, 1 t2, 2 ev1 own param, 3 ev1 partner param, 4 ev2 own param, 5 ev2 partner param


@njit(cache=True, inline="always")
def _md(a0, a1, a2, b0, b1, b2):
    return -a0 * b0 + a1 * b1 + a2 * b2


@njit(cache=True)
def _lcross(u, v, out):
    out[0] = -(u[1] * v[2] - u[2] * v[1])
    out[1] = u[2] * v[0] - u[0] * v[2]
    out[2] = u[0] * v[1] - u[1] * v[0]


@njit(cache=True)
def _matvec(g, x, out):
    for i in range(3):
        out[i] = g[i, 0] * x[0] + g[i, 1] * x[1] + g[i, 2] * x[2]


@njit(cache=True)
def _linv(g):
    # J g^T J
    h = g.T.copy()
    h[0, 1] = -h[0, 1]
    h[0, 2] = -h[0, 2]
    h[1, 0] = -h[1, 0]
    h[2, 0] = -h[2, 0]
    return h


@njit(cache=True)
def _renorm(x, v):
    q = -_md(x[0], x[1], x[2], x[0], x[1], x[2])
    s = math.sqrt(q)
    for i in range(3):
        x[i] /= s
    if x[0] < 0:
        for i in range(3):
            x[i] = -x[i]
    c = _md(v[0], v[1], v[2], x[0], x[1], x[2])
    for i in range(3):
        v[i] += c * x[i]
    s = math.sqrt(_md(v[0], v[1], v[2], v[0], v[1], v[2]))
    for i in range(3):
        v[i] /= s


@njit(cache=True)
def exit_side(pf, nrm, tan, slen, p, x, v, skip):
    # collinear neighbouring sides tie on distance; the exit point decides
    best = -1
    bt = np.inf
    for s in range(pf[p], pf[p + 1]):
        if s == skip:
            continue
        dv = _md(v[0], v[1], v[2], nrm[s, 0], nrm[s, 1], nrm[s, 2])
        if dv >= 0.0:
            continue
        q = -_md(x[0], x[1], x[2], nrm[s, 0], nrm[s, 1], nrm[s, 2]) / dv
        if q >= 1.0:
            continue
        t = math.atanh(q) if q > 0.0 else 0.0
        if best >= 0 and abs(t - bt) <= 1e-9 * (1.0 + t):
            if _side_offset(tan, slen, s, x, v, t) < _side_offset(tan, slen, best, x, v, bt):
                best = s
                bt = t
        elif t < bt:
            bt = t
            best = s
    return best, bt


@njit(cache=True, inline="always")
def _side_offset(tan, slen, s, x, v, t):
    """How far the point at time t lies outside side s (0 when on it)."""
    ch = math.cosh(t)
    sh = math.sinh(t)
    u = math.asinh(_md(ch * x[0] + sh * v[0], ch * x[1] + sh * v[1], ch * x[2] + sh * v[2],
                       tan[s, 0], tan[s, 1], tan[s, 2]))
    return max(-u, u - slen[s], 0.0)


@njit(cache=True)
def _extend(r, pf, spoly, nrm, tan, slen, kind, partner, smap,
            rp, rx, rv, rtip, rent, nseg, seg_ray, seg_poly, seg_x, seg_v, seg_n,
            seg_t0, seg_len, seg_exit, seg_pos, seg_k, ray_segs, ray_n, eps_vertex):
    """Add the segment from the tip of ray ``r`` to its polygon exit.

    Returns 0 after crossing a paired side, 1 at a boundary side, or a
    negative status code.
    """
    p = rp[r]
    x = rx[r]
    v = rv[r]
    s, t = exit_side(pf, nrm, tan, slen, p, x, v, rent[r])
    if s < 0:
        return -ST_NUMERIC
    ch = math.cosh(t)
    sh = math.sinh(t)
    y = np.empty(3)
    w = np.empty(3)
    for i in range(3):
        y[i] = ch * x[i] + sh * v[i]
        w[i] = sh * x[i] + ch * v[i]
    u = math.asinh(_md(y[0], y[1], y[2], tan[s, 0], tan[s, 1], tan[s, 2]))
    if u < eps_vertex or u > slen[s] - eps_vertex:
        return -ST_VERTEX
    k = nseg[0]
    if k >= seg_ray.shape[0]:
        return -ST_CAPACITY
    seg_ray[k] = r
    seg_poly[k] = p
    for i in range(3):
        seg_x[k, i] = x[i]
        seg_v[k, i] = v[i]
    _lcross(x, v, seg_n[k])
    seg_t0[k] = rtip[r]
    seg_len[k] = t
    seg_exit[k] = s
    seg_pos[k] = u
    seg_k[k] = ray_n[r]
    ray_segs[r, ray_n[r]] = k
    ray_n[r] += 1
    nseg[0] = k + 1
    rtip[r] += t
    if kind[s] >= 0:
        return 1
    g = smap[s]
    _matvec(g, y, x)
    _matvec(g, w, v)
    _renorm(x, v)
    q = partner[s]
    rp[r] = spoly[q]
    rent[r] = q
    return 0


@njit(cache=True)
def _intersect(a, b, seg_x, seg_v, seg_n, seg_len):
    na = seg_n[a]
    nb = seg_n[b]
    P = np.empty(3)
    _lcross(na, nb, P)
    q = _md(P[0], P[1], P[2], P[0], P[1], P[2])
    if q > -1e-26:
        return False, 0.0, 0.0
    sc = 1.0 / math.sqrt(-q)
    if P[0] < 0:
        sc = -sc
    for i in range(3):
        P[i] *= sc
    sa = math.asinh(_md(P[0], P[1], P[2], seg_v[a, 0], seg_v[a, 1], seg_v[a, 2]))
    if sa < 0.0 or sa > seg_len[a]:
        return False, 0.0, 0.0
    sb = math.asinh(_md(P[0], P[1], P[2], seg_v[b, 0], seg_v[b, 1], seg_v[b, 2]))
    if sb < 0.0 or sb > seg_len[b]:
        return False, 0.0, 0.0
    return True, sa, sb


@njit(cache=True)
def grow(pf, spoly, nrm, tan, slen, kind, partner, smap,
         p0, x0, v0, tmax, eps_vertex,
         seg_ray, seg_poly, seg_x, seg_v, seg_n, seg_t0, seg_len, seg_exit, seg_pos, seg_k,
         ray_segs, ev, evf):
    """Grow the spine of (p0, x0, v0); fills the segment buffers and ``ev``/``evf``."""
    for i in range(8):
        ev[i] = -1
        evf[i] = np.nan
    rp = np.empty(2, dtype=np.int64)
    rx = np.empty((2, 3))
    rv = np.empty((2, 3))
    rtip = np.zeros(2)
    rent = np.full(2, -1, dtype=np.int64)
    ray_n = np.zeros(2, dtype=np.int64)
    stopped = np.zeros(2, dtype=np.bool_)
    nseg = np.zeros(1, dtype=np.int64)
    for r in range(2):
        rp[r] = p0
        sg = 1.0 if r == 0 else -1.0
        for i in range(3):
            rx[r, i] = x0[i]
            rv[r, i] = sg * v0[i]

    # ---------------- phase one
    best = np.inf
    while True:
        r = -1
        for rr in range(2):
            if not stopped[rr] and rtip[rr] < best:
                if r < 0 or rtip[rr] < rtip[r]:
                    r = rr
        if r < 0:
            break
        if rtip[r] > tmax:
            ev[0] = ST_TMAX
            return nseg[0]
        code = _extend(r, pf, spoly, nrm, tan, slen, kind, partner, smap,
                       rp, rx, rv, rtip, rent, nseg, seg_ray, seg_poly, seg_x, seg_v, seg_n,
                       seg_t0, seg_len, seg_exit, seg_pos, seg_k, ray_segs, ray_n, eps_vertex)
        if code < 0:
            ev[0] = -code
            return nseg[0]
        k = nseg[0] - 1
        first_other = ray_segs[1 - r, 0] if ray_n[1 - r] > 0 else -1
        for j in range(k):
            if seg_poly[j] != seg_poly[k]:
                continue
            if seg_k[k] == 0 and j == first_other:
                continue
            hit, sk, sj = _intersect(k, j, seg_x, seg_v, seg_n, seg_len)
            if not hit:
                continue
            tk = seg_t0[k] + sk
            tj = seg_t0[j] + sj
            if tk >= tj:
                et, own, op, prt, pp = tk, k, sk, j, sj
            else:
                et, own, op, prt, pp = tj, j, sj, k, sk
            if et < best:
                best = et
                ev[1] = seg_ray[own]
                ev[2] = EV_KNOT
                ev[3] = own
                ev[4] = prt
                evf[2] = op
                evf[3] = pp
        if code == 1:
            stopped[r] = True
            if rtip[r] < best:
                best = rtip[r]
                ev[1] = r
                ev[2] = EV_BOUNDARY
                ev[3] = k
                ev[4] = seg_exit[k]
                evf[2] = seg_len[k]
                evf[3] = np.nan
    t1 = best
    evf[0] = t1
    o = ev[1]
    wr = 1 - o

    # ---------------- phase two
    best2 = np.inf
    if stopped[wr]:
        kk = ray_segs[wr, ray_n[wr] - 1]
        best2 = rtip[wr]
        ev[5] = EV_BOUNDARY
        ev[6] = kk
        ev[7] = seg_exit[kk]
        evf[4] = seg_len[kk]
    first_o = ray_segs[o, 0]
    first_w = ray_segs[wr, 0]
    n_existing = ray_n[wr]
    idx = 0
    while True:
        if idx < n_existing:
            k = ray_segs[wr, idx]
            idx += 1
            if seg_t0[k] + seg_len[k] <= t1:
                continue
            fresh = False
        else:
            if stopped[wr] or rtip[wr] >= best2:
                break
            if rtip[wr] > tmax:
                ev[0] = ST_TMAX
                return nseg[0]
            code = _extend(wr, pf, spoly, nrm, tan, slen, kind, partner, smap,
                           rp, rx, rv, rtip, rent, nseg, seg_ray, seg_poly, seg_x, seg_v, seg_n,
                           seg_t0, seg_len, seg_exit, seg_pos, seg_k, ray_segs, ray_n, eps_vertex)
            if code < 0:
                ev[0] = -code
                return nseg[0]
            k = nseg[0] - 1
            idx = ray_n[wr]
            n_existing = ray_n[wr]
            fresh = True
        for j in range(nseg[0]):
            if j == k or seg_poly[j] != seg_poly[k]:
                continue
            if (k == first_w and j == first_o) or (k == first_o and j == first_w):
                continue
            hit, sk, sj = _intersect(k, j, seg_x, seg_v, seg_n, seg_len)
            if not hit:
                continue
            tk = seg_t0[k] + sk
            if tk <= t1:
                continue
            tj = seg_t0[j] + sj
            if seg_ray[j] == o:
                if tj > t1:
                    continue
            elif tj >= tk:
                continue
            if tk < best2:
                best2 = tk
                ev[5] = EV_KNOT
                ev[6] = k
                ev[7] = j
                evf[4] = sk
                evf[5] = sj
        if fresh and code == 1:
            stopped[wr] = True
            if rtip[wr] < best2:
                best2 = rtip[wr]
                ev[5] = EV_BOUNDARY
                ev[6] = k
                ev[7] = seg_exit[k]
                evf[4] = seg_len[k]
                evf[5] = np.nan
    evf[1] = best2
    ev[0] = ST_OK
    return nseg[0]


# ------------------------------------------------------------------ transforms along the spine


@njit(cache=True)
def relative(i, j, smap, smap_inv, seg_ray, seg_exit, seg_k, ray_segs):
    """``R`` with ``C_j = C_i R`` for developing copy transforms of segments i, j."""
    R = np.eye(3)
    ri, rj = seg_ray[i], seg_ray[j]
    ki, kj = seg_k[i], seg_k[j]
    if ri == rj:
        if ki <= kj:
            for m in range(ki, kj):
                R = R @ smap_inv[seg_exit[ray_segs[ri, m]]]
        else:
            for m in range(ki - 1, kj - 1, -1):
                R = R @ smap[seg_exit[ray_segs[ri, m]]]
        return R
    for m in range(ki - 1, -1, -1):
        R = R @ smap[seg_exit[ray_segs[ri, m]]]
    for m in range(0, kj):
        R = R @ smap_inv[seg_exit[ray_segs[rj, m]]]
    return R


@njit(cache=True)
def skew_normal(W):
    """Unnormalised left normal of the axis of W (direction of translation)."""
    Wi = _linv(W)
    out = np.empty(3)
    # A = J (W - W^-1); n = (A21, A02, A10)
    out[0] = W[2, 1] - Wi[2, 1]
    out[1] = -(W[0, 2] - Wi[0, 2])
    out[2] = W[1, 0] - Wi[1, 0]
    return out


@njit(cache=True)
def _point_on(k, s, seg_x, seg_v, out):
    ch = math.cosh(s)
    sh = math.sinh(s)
    for i in range(3):
        out[i] = ch * seg_x[k, i] + sh * seg_v[k, i]


@njit(cache=True)
def _tangent_on(k, s, seg_x, seg_v, out):
    ch = math.cosh(s)
    sh = math.sinh(s)
    for i in range(3):
        out[i] = sh * seg_x[k, i] + ch * seg_v[k, i]


@njit(cache=True)
def axis_boundary(W, p, x, pf, spoly, nrm, tan, slen, kind, partner, smap, eps_vertex):
    """Boundary component whose lift is the axis of W (local frame of polygon p).

    Flows from ``x`` along the perpendicular to the axis; inside the convex
    universal cover the first boundary side met lies on that axis.  Returns
    (component, mismatch between the hit distance and the axis distance)."""
    n = skew_normal(W)
    nn = math.sqrt(_md(n[0], n[1], n[2], n[0], n[1], n[2]))
    c = _md(x[0], x[1], x[2], n[0], n[1], n[2]) / nn
    d = math.asinh(abs(c))
    y = x.copy()
    v = np.empty(3)
    sg = -1.0 if c > 0 else 1.0
    for i in range(3):
        v[i] = sg * n[i] / nn
    # v is the unit normal; make it tangent at x
    cv = _md(v[0], v[1], v[2], y[0], y[1], y[2])
    for i in range(3):
        v[i] += cv * y[i]
    _renorm(y, v)
    w = np.empty(3)
    z = np.empty(3)
    travelled = 0.0
    skip = -1
    for _ in range(100000):
        s, t = exit_side(pf, nrm, tan, slen, p, y, v, skip)
        if s < 0:
            return -1, np.inf
        ch = math.cosh(t)
        sh = math.sinh(t)
        for i in range(3):
            z[i] = ch * y[i] + sh * v[i]
            w[i] = sh * y[i] + ch * v[i]
        travelled += t
        if kind[s] >= 0:
            return kind[s], abs(travelled - d)
        _matvec(smap[s], z, y)
        _matvec(smap[s], w, v)
        _renorm(y, v)
        skip = partner[s]
        p = spoly[skip]
    return -1, np.inf


# ------------------------------------------------------------------ closed-geodesic signatures


@njit(cache=True)
def _flow_record(pf, spoly, nrm, tan, slen, kind, partner, smap, smap_inv,
                 p, x, v, length, C, eps_vertex, record, out_side, out_pos, out_dir):
    """Flow (p, x, v) for ``length``; updates x, v, C in place.

    Passing through a polygon vertex is allowed: the ray is pushed a short
    distance beyond the vertex and relocated into the corner copy that
    contains it.  A pass is recorded as the token (n_sides + nearest side
    of that corner, exit angle from that side).

    Returns (status, polygon, count of recorded crossings)."""
    remaining = length
    skip = -1
    cnt = 0
    y = np.empty(3)
    w = np.empty(3)
    for _ in range(100000):
        s, t = exit_side(pf, nrm, tan, slen, p, x, v, skip)
        if s < 0:
            return -ST_NUMERIC, p, cnt
        if t >= remaining:
            ch = math.cosh(remaining)
            sh = math.sinh(remaining)
            for i in range(3):
                y[i] = ch * x[i] + sh * v[i]
                w[i] = sh * x[i] + ch * v[i]
            for i in range(3):
                x[i] = y[i]
                v[i] = w[i]
            return 0, p, cnt
        ch = math.cosh(t)
        sh = math.sinh(t)
        for i in range(3):
            y[i] = ch * x[i] + sh * v[i]
            w[i] = sh * x[i] + ch * v[i]
        u = math.asinh(_md(y[0], y[1], y[2], tan[s, 0], tan[s, 1], tan[s, 2]))
        if u < eps_vertex or u > slen[s] - eps_vertex:
            tt = t + VERTEX_PUSH
            if tt >= remaining:
                return -ST_VERTEX, p, cnt
            ch = math.cosh(tt)
            sh = math.sinh(tt)
            for i in range(3):
                y[i] = ch * x[i] + sh * v[i]
                w[i] = sh * x[i] + ch * v[i]
            entered = -1
            settled = False
            for _it in range(64):
                worst = -1
                wv = 0.0
                for s2 in range(pf[p], pf[p + 1]):
                    if s2 == entered:
                        continue
                    val = _md(y[0], y[1], y[2], nrm[s2, 0], nrm[s2, 1], nrm[s2, 2])
                    if val < wv:
                        wv = val
                        worst = s2
                if worst < 0:
                    settled = True
                    break
                if kind[worst] >= 0:
                    return -ST_SIGNATURE, p, cnt
                _matvec(smap[worst], y, x)
                _matvec(smap[worst], w, v)
                for i in range(3):
                    y[i] = x[i]
                    w[i] = v[i]
                _renorm(y, w)
                C[:, :] = C @ smap_inv[worst]
                entered = partner[worst]
                p = spoly[entered]
            if not settled:
                return -ST_VERTEX, p, cnt
            if record:
                if cnt >= out_side.shape[0]:
                    return -ST_CAPACITY, p, cnt
                # the corner is spanned by the two sides nearest the pushed point
                n1 = -1
                n2 = -1
                v1 = np.inf
                v2 = np.inf
                for s2 in range(pf[p], pf[p + 1]):
                    val = _md(y[0], y[1], y[2], nrm[s2, 0], nrm[s2, 1], nrm[s2, 2])
                    if val < v1:
                        n2, v2 = n1, v1
                        n1, v1 = s2, val
                    elif val < v2:
                        n2, v2 = s2, val
                if n2 < n1:
                    n1, v1 = n2, v2
                out_side[cnt] = nrm.shape[0] + n1
                # cosine of the angle between the geodesic and that side's line
                gn = np.empty(3)
                _lcross(y, w, gn)
                out_pos[cnt] = _md(gn[0], gn[1], gn[2], nrm[n1, 0], nrm[n1, 1], nrm[n1, 2])
                out_dir[cnt] = 1
                cnt += 1
            for i in range(3):
                x[i] = y[i]
                v[i] = w[i]
            remaining -= tt
            skip = -1
            continue
        if kind[s] >= 0:
            return -ST_SIGNATURE, p, cnt
        if record:
            if cnt >= out_side.shape[0]:
                return -ST_CAPACITY, p, cnt
            q = partner[s]
            if q < s:
                out_side[cnt] = q
                out_pos[cnt] = slen[q] - u
                out_dir[cnt] = -1
            else:
                out_side[cnt] = s
                out_pos[cnt] = u
                out_dir[cnt] = 1
            cnt += 1
        remaining -= t
        g = smap[s]
        _matvec(g, y, x)
        _matvec(g, w, v)
        _renorm(x, v)
        C[:, :] = C @ smap_inv[s]
        skip = partner[s]
        p = spoly[skip]
    return -ST_CAPACITY, p, cnt


@njit(cache=True)
def signature(M, pf, spoly, nrm, tan, slen, kind, partner, smap, smap_inv, home0, centroid0,
              eps_vertex, out_side, out_pos, out_dir):
    """Oriented side crossings of the closed geodesic of the root-frame element M.

    Crossings are stored on the lower-numbered side of each pair with a
    direction flag and sorted by (side, position).  Returns the count or a
    negative status.
    """
    eps_vertex = max(eps_vertex, SIG_VERTEX_TOL)
    trc = M[0, 0] + M[1, 1] + M[2, 2]
    ch_len = 0.5 * (trc - 1.0)
    if ch_len <= 1.0 + 1e-12:
        return -ST_SIGNATURE
    length = math.acosh(ch_len)
    n = skew_normal(M)
    nn = math.sqrt(_md(n[0], n[1], n[2], n[0], n[1], n[2]))
    for i in range(3):
        n[i] /= nn
    o = np.empty(3)
    _matvec(home0, centroid0, o)
    c = _md(o[0], o[1], o[2], n[0], n[1], n[2])
    pt = np.empty(3)
    for i in range(3):
        pt[i] = o[i] - c * n[i]
    q = math.sqrt(-_md(pt[0], pt[1], pt[2], pt[0], pt[1], pt[2]))
    for i in range(3):
        pt[i] /= q
    # translation direction at pt
    Mp = np.empty(3)
    _matvec(M, pt, Mp)
    dd = _md(pt[0], pt[1], pt[2], Mp[0], Mp[1], Mp[2])
    u = np.empty(3)
    for i in range(3):
        u[i] = Mp[i] + dd * pt[i]
    un = math.sqrt(_md(u[0], u[1], u[2], u[0], u[1], u[2]))
    for i in range(3):
        u[i] /= un
    # walk from the centroid of polygon 0 to pt
    dist = math.acosh(max(-_md(o[0], o[1], o[2], pt[0], pt[1], pt[2]), 1.0))
    C = home0.copy()
    x = centroid0.copy()
    v = np.empty(3)
    if dist > 0.0:
        ddo = _md(o[0], o[1], o[2], pt[0], pt[1], pt[2])
        wroot = np.empty(3)
        for i in range(3):
            wroot[i] = pt[i] + ddo * o[i]
        wn = math.sqrt(_md(wroot[0], wroot[1], wroot[2], wroot[0], wroot[1], wroot[2]))
        for i in range(3):
            wroot[i] /= wn
        _matvec(_linv(home0), wroot, v)
    else:
        v[0] = 0.0
        v[1] = 1.0
        v[2] = 0.0
    dummy_i = np.empty(0, dtype=np.int64)
    dummy_f = np.empty(0)
    st, p, _ = _flow_record(pf, spoly, nrm, tan, slen, kind, partner, smap, smap_inv,
                            0, x, v, dist, C, eps_vertex, False, dummy_i, dummy_f, dummy_i)
    if st < 0:
        return st
    _matvec(_linv(C), u, v)
    _renorm(x, v)
    st, p, cnt = _flow_record(pf, spoly, nrm, tan, slen, kind, partner, smap, smap_inv,
                              p, x, v, length, C, eps_vertex, True, out_side, out_pos, out_dir)
    if st < 0:
        return st
    # insertion sort by (side, position)
    for a in range(1, cnt):
        ks, kp, kd = out_side[a], out_pos[a], out_dir[a]
        b = a - 1
        while b >= 0 and (out_side[b] > ks or (out_side[b] == ks and out_pos[b] > kp)):
            out_side[b + 1] = out_side[b]
            out_pos[b + 1] = out_pos[b]
            out_dir[b + 1] = out_dir[b]
            b -= 1
        out_side[b + 1] = ks
        out_pos[b + 1] = kp
        out_dir[b + 1] = kd
    return cnt


# ------------------------------------------------------------------ ribbon-graph faces


@njit(cache=True)
def _ray_coord(k, s, seg_ray, seg_t0):
    t = seg_t0[k] + s
    return t if seg_ray[k] == 0 else -t


@njit(cache=True)
def _alpha_dir(k, s, seg_ray, seg_x, seg_v, out):
    _tangent_on(k, s, seg_x, seg_v, out)
    if seg_ray[k] == 1:
        for i in range(3):
            out[i] = -out[i]


@njit(cache=True, inline="always")
def _push_prefix(word, n, partner, seg_exit, ray_segs, r, k, inverse):
    """Append the side word of ray r's first k crossings (or its inverse), freely reducing."""
    for q in range(k):
        if inverse:
            letter = partner[seg_exit[ray_segs[r, k - 1 - q]]]
        else:
            letter = seg_exit[ray_segs[r, q]]
        if n > 0 and word[n - 1] == partner[letter]:
            n -= 1
        else:
            word[n] = letter
            n += 1
    return n


@njit(cache=True)
def faces(ev, evf, home, seg_ray, seg_poly, seg_x, seg_v, seg_t0, seg_exit, seg_k, ray_segs,
          smap, smap_inv, partner, word, out_M):
    """Boundary loops of a regular neighbourhood of a two-knot spine.

    Fills ``out_M[f]`` with root-frame holonomies of the faces (oriented with
    the neighbourhood on the left) and returns the face count.  Each face is
    assembled as a word in side crossings and cyclically reduced before it
    is multiplied out; long rays would otherwise lose the axis to rounding.
    ``word`` is scratch space.
    """
    # ends: ray 0 end and ray 1 end
    end_seg = np.empty(2, dtype=np.int64)
    end_par = np.empty(2)
    prt_seg = np.empty(2, dtype=np.int64)
    prt_par = np.empty(2)
    o = ev[1]
    end_seg[o] = ev[3]
    end_par[o] = evf[2]
    prt_seg[o] = ev[4]
    prt_par[o] = evf[3]
    end_seg[1 - o] = ev[6]
    end_par[1 - o] = evf[4]
    prt_seg[1 - o] = ev[7]
    prt_par[1 - o] = evf[5]
    # half-edges: vertex 0 is the knot of the ray-1 end (alpha low end),
    # vertex 1 the knot of the ray-0 end (alpha high end)
    pos = np.empty(6)
    hdir = np.empty(6)
    hseg = np.empty(6, dtype=np.int64)
    hpar = np.empty(6)
    for vtx in range(2):
        r = 1 - vtx  # vertex 0 <-> ray 1 end
        u = _ray_coord(prt_seg[r], prt_par[r], seg_ray, seg_t0)
        e = _ray_coord(end_seg[r], end_par[r], seg_ray, seg_t0)
        b = 3 * vtx
        pos[b] = u
        hdir[b] = 1.0
        hseg[b] = prt_seg[r]
        hpar[b] = prt_par[r]
        pos[b + 1] = u
        hdir[b + 1] = -1.0
        hseg[b + 1] = prt_seg[r]
        hpar[b + 1] = prt_par[r]
        pos[b + 2] = e
        hdir[b + 2] = 1.0 if r == 1 else -1.0
        hseg[b + 2] = end_seg[r]
        hpar[b + 2] = end_par[r]
    p0 = seg_poly[ray_segs[0, 0]]
    # rotation system from local directions at each knot
    sigma = np.empty(6, dtype=np.int64)
    d = np.empty(3)
    e1 = np.empty(3)
    e2 = np.empty(3)
    P = np.empty(3)
    ang = np.empty(3)
    for vtx in range(2):
        b = 3 * vtx
        _point_on(hseg[b], hpar[b], seg_x, seg_v, P)
        _alpha_dir(hseg[b], hpar[b], seg_ray, seg_x, seg_v, e1)
        _lcross(P, e1, e2)
        for q in range(3):
            h = b + q
            _alpha_dir(hseg[h], hpar[h], seg_ray, seg_x, seg_v, d)
            for i in range(3):
                d[i] *= hdir[h]
            a = math.atan2(_md(d[0], d[1], d[2], e2[0], e2[1], e2[2]),
                           _md(d[0], d[1], d[2], e1[0], e1[1], e1[2]))
            if a < 0.0:
                a += 2.0 * math.pi
            ang[q] = a
        order = np.argsort(ang)
        for q in range(3):
            sigma[b + order[q]] = b + order[(q + 1) % 3]
    # arrival map: from half-edge h move along alpha to the next vertex position
    iota = np.empty(6, dtype=np.int64)
    for h in range(6):
        best = -1
        bd = np.inf
        for g in range(6):
            dist = (pos[g] - pos[h]) * hdir[h]
            if dist > 1e-12 and dist < bd and hdir[g] == -hdir[h]:
                bd = dist
                best = g
        if best < 0:
            return -1
        iota[h] = best
    seen = np.zeros(6, dtype=np.bool_)
    nf = 0
    for h0 in range(6):
        if seen[h0]:
            continue
        n = 0
        h = h0
        for _ in range(7):
            seen[h] = True
            hp = iota[h]
            g = sigma[hp]
            # T[hp] T[g]^-1 with T[h] = C_h C_rep(h)^-1 and C_h a prefix word
            rp = 3 * (hp // 3)
            rg = 3 * (g // 3)
            if n + seg_k[hseg[hp]] + seg_k[hseg[rp]] + seg_k[hseg[rg]] + seg_k[hseg[g]] > word.shape[0]:
                return -1
            n = _push_prefix(word, n, partner, seg_exit, ray_segs, seg_ray[hseg[hp]], seg_k[hseg[hp]], False)
            n = _push_prefix(word, n, partner, seg_exit, ray_segs, seg_ray[hseg[rp]], seg_k[hseg[rp]], True)
            n = _push_prefix(word, n, partner, seg_exit, ray_segs, seg_ray[hseg[rg]], seg_k[hseg[rg]], False)
            n = _push_prefix(word, n, partner, seg_exit, ray_segs, seg_ray[hseg[g]], seg_k[hseg[g]], True)
            h = g
            if h == h0:
                break
        a = 0
        while n - a >= 2 and word[n - 1] == partner[word[a]]:
            a += 1
            n -= 1
        M = np.eye(3)
        for q in range(a, n):
            M = M @ smap_inv[word[q]]
        if nf < out_M.shape[0]:
            out_M[nf] = home[p0] @ M @ _linv(home[p0])
        nf += 1
    return nf


# ------------------------------------------------------------------ batch driver


@njit(cache=True, nogil=True)
def chord(pf, spoly, nrm, tan, slen, kind, partner, smap, smap_inv, p0, x0, v0, tmax, eps_vertex,
          out_side, out_C):
    """Follow both rays of (p0, x0, v0) to the boundary, ignoring self-crossings.

    Stores each ray's boundary exit side and developing copy transform.
    Returns a status code."""
    x = np.empty(3)
    v = np.empty(3)
    y = np.empty(3)
    w = np.empty(3)
    for r in range(2):
        sg = 1.0 if r == 0 else -1.0
        for i in range(3):
            x[i] = x0[i]
            v[i] = sg * v0[i]
        p = p0
        ent = -1
        tip = 0.0
        C = np.eye(3)
        while True:
            s, t = exit_side(pf, nrm, tan, slen, p, x, v, ent)
            if s < 0:
                return ST_NUMERIC
            tip += t
            if tip > tmax:
                return ST_TMAX
            ch = math.cosh(t)
            sh = math.sinh(t)
            for i in range(3):
                y[i] = ch * x[i] + sh * v[i]
                w[i] = sh * x[i] + ch * v[i]
            u = math.asinh(_md(y[0], y[1], y[2], tan[s, 0], tan[s, 1], tan[s, 2]))
            if u < eps_vertex or u > slen[s] - eps_vertex:
                return ST_VERTEX
            if kind[s] >= 0:
                out_side[r] = s
                out_C[r] = C
                break
            _matvec(smap[s], y, x)
            _matvec(smap[s], w, v)
            _renorm(x, v)
            C = C @ smap_inv[s]
            ent = partner[s]
            p = spoly[ent]
    return ST_OK


@njit(cache=True, nogil=True)
def run_batch(pf, spoly, nrm, tan, slen, kind, partner, smap, smap_inv, home, Kmat, Kinv,
              polys, xs, vs, tmax, eps_vertex, closed, centroid0,
              out_status, out_code, out_bk, out_mat, out_sign, out_t, out_owner, out_loop,
              out_nf, out_faces, out_sig_n, out_sig_side, out_sig_pos, out_sig_dir,
              out_chord_bk, out_chord_cosh, out_chord_mat):
    n = polys.shape[0]
    csd = np.empty(2, dtype=np.int64)
    cC = np.empty((2, 3, 3))
    seg_ray = np.empty(SEG_CAP, dtype=np.int64)
    seg_poly = np.empty(SEG_CAP, dtype=np.int64)
    seg_x = np.empty((SEG_CAP, 3))
    seg_v = np.empty((SEG_CAP, 3))
    seg_n = np.empty((SEG_CAP, 3))
    seg_t0 = np.empty(SEG_CAP)
    seg_len = np.empty(SEG_CAP)
    seg_exit = np.empty(SEG_CAP, dtype=np.int64)
    seg_pos = np.empty(SEG_CAP)
    seg_k = np.empty(SEG_CAP, dtype=np.int64)
    ray_segs = np.empty((2, SEG_CAP), dtype=np.int64)
    ev = np.empty(8, dtype=np.int64)
    evf = np.empty(8)
    P = np.empty(3)
    fM = np.empty((3, 3, 3))
    word = np.empty(16 * SEG_CAP, dtype=np.int64)
    for i in range(n):
        grow(pf, spoly, nrm, tan, slen, kind, partner, smap, polys[i], xs[i], vs[i], tmax, eps_vertex,
             seg_ray, seg_poly, seg_x, seg_v, seg_n, seg_t0, seg_len, seg_exit, seg_pos, seg_k,
             ray_segs, ev, evf)
        out_status[i] = ev[0]
        out_owner[i] = ev[1]
        out_t[i, 0] = evf[0]
        out_t[i, 1] = evf[1]
        out_bk[i, 0] = -1
        out_bk[i, 1] = -1
        out_code[i] = -1
        out_sign[i] = 0
        out_loop[i] = -1
        out_nf[i] = 0
        out_chord_bk[i, 0] = -1
        out_chord_bk[i, 1] = -1
        out_chord_cosh[i] = np.nan
        if ev[0] != ST_OK:
            continue
        if not closed and chord(pf, spoly, nrm, tan, slen, kind, partner, smap, smap_inv, polys[i], xs[i],
                                vs[i], tmax, eps_vertex, csd, cC) == ST_OK:
            na = cC[0] @ nrm[csd[0]]
            nb = cC[1] @ nrm[csd[1]]
            out_chord_bk[i, 0] = kind[csd[0]]
            out_chord_bk[i, 1] = kind[csd[1]]
            out_chord_cosh[i] = abs(_md(na[0], na[1], na[2], nb[0], nb[1], nb[2]))
            out_chord_mat[i] = Kmat[csd[1]] @ _linv(cC[1]) @ cC[0] @ Kinv[csd[0]]
        o = ev[1]
        nb = 0
        if ev[2] == EV_BOUNDARY:
            out_bk[i, o] = kind[ev[4]]
            nb += 1
        if ev[5] == EV_BOUNDARY:
            out_bk[i, 1 - o] = kind[ev[7]]
            nb += 1
        if nb == 2:
            out_code[i] = CODE_ARC
            e0 = ev[3] if o == 0 else ev[6]
            e1 = ev[6] if o == 0 else ev[3]
            s0 = ev[4] if o == 0 else ev[7]
            s1 = ev[7] if o == 0 else ev[4]
            R = relative(e1, e0, smap, smap_inv, seg_ray, seg_exit, seg_k, ray_segs)
            out_mat[i] = Kmat[s1] @ R @ Kinv[s0]
        elif nb == 1:
            out_code[i] = CODE_LASSO
            if ev[2] == EV_KNOT:
                a, b, sb = ev[3], ev[4], evf[3]
            else:
                a, b, sb = ev[6], ev[7], evf[5]
            W = relative(b, a, smap, smap_inv, seg_ray, seg_exit, seg_k, ray_segs)
            out_mat[i] = W
            nW = skew_normal(W)
            _point_on(b, sb, seg_x, seg_v, P)
            out_sign[i] = 1 if _md(nW[0], nW[1], nW[2], P[0], P[1], P[2]) > 0.0 else -1
            lb, mis = axis_boundary(W, seg_poly[b], P, pf, spoly, nrm, tan, slen, kind, partner, smap,
                                    eps_vertex)
            # loops around interior curves (torus) have no boundary match
            out_loop[i] = lb if lb >= 0 and mis <= 1e-6 else -1
        else:
            out_code[i] = CODE_SPINE
            if closed:
                nf = faces(ev, evf, home, seg_ray, seg_poly, seg_x, seg_v, seg_t0, seg_exit, seg_k,
                           ray_segs, smap, smap_inv, partner, word, fM)
                if nf < 0 or nf > 3:
                    out_status[i] = ST_NUMERIC
                    out_code[i] = -1
                    continue
                out_nf[i] = nf
                for f in range(nf):
                    out_faces[i, f] = fM[f]
                    c = signature(fM[f], pf, spoly, nrm, tan, slen, kind, partner, smap, smap_inv,
                                  home[0], centroid0, eps_vertex,
                                  out_sig_side[i, f], out_sig_pos[i, f], out_sig_dir[i, f])
                    out_sig_n[i, f] = c
