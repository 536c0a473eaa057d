"""Panel-pair integrals of the covariance kernel over polyline pairs.

Every quantity here is an integral of ``K(|x - y|) dx dy_bar`` over a pair of
straight panels ``x = a1 + s u1`` (``0 <= s <= h1``) and ``y = a2 + t u2``
(``0 <= t <= h2``). The kernel is split as ``K(r) = -c0 log r + K_reg(r)``;
the inner ``t``-integral of the logarithm is done in closed form and the
bounded remainder by Gauss-Legendre.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

_G = {n: np.polynomial.legendre.leggauss(n) for n in (6, 8, 10, 12, 16)}


def gauss(n):
    x, w = _G[n] if n in _G else np.polynomial.legendre.leggauss(n)
    return (x + 1.0) / 2.0, w / 2.0  # nodes and weights on [0, 1]


class Panels:
    """Straight panels obtained by subdividing the edges of a polyline."""

    def __init__(self, starts, ends, max_length, min_per_edge=1):
        d = ends - starts
        h = np.abs(d)
        count = np.maximum(int(min_per_edge), np.ceil(h / max_length).astype(int))
        edge = np.repeat(np.arange(h.size), count)
        k = np.arange(edge.size) - np.repeat(np.cumsum(count) - count, count)
        frac0 = k / count[edge]
        frac1 = (k + 1) / count[edge]
        self.a = starts[edge] + frac0 * d[edge]
        b = starts[edge] + frac1 * d[edge]
        # close each edge exactly on its original end vertex
        last = k == count[edge] - 1
        b[last] = ends[edge[last]]
        self.b = b
        self.h = np.abs(self.b - self.a)
        self.u = (self.b - self.a) / self.h

    def __len__(self):
        return self.a.size


def _point_segment(p, a, u, h):
    """Distance from ``p`` to segment ``a + t u``, ``t in [0, h]``, and the parameter."""
    t = np.clip(((p - a) * u.conj()).real, 0.0, h)
    return np.abs(a + t * u - p), t


def segment_distance(a1, u1, h1, a2, u2, h2):
    """Distance between segments and a parameter on the first one realizing it."""
    b1 = a1 + h1 * u1
    b2 = a2 + h2 * u2
    d1, _ = _point_segment(a2, a1, u1, h1)
    d2, _ = _point_segment(b2, a1, u1, h1)
    d3, t3 = _point_segment(a1, a2, u2, h2)
    d4, t4 = _point_segment(b1, a2, u2, h2)
    _, s1 = _point_segment(a2, a1, u1, h1)
    _, s2 = _point_segment(b2, a1, u1, h1)
    dist = np.stack([d1, d2, d3, d4])
    spar = np.stack([s1, s2, np.zeros_like(h1), h1])
    j = np.argmin(dist, axis=0)
    col = np.arange(h1.size)
    best = dist[j, col]
    s_best = spar[j, col]
    # proper crossings
    cross = (u1.conj() * u2).imag
    w = a2 - a1
    with np.errstate(divide="ignore", invalid="ignore"):
        s_x = (w.conj() * u2).imag / cross
        t_x = ((a1 + s_x * u1 - a2) * u2.conj()).real
    hit = (cross != 0) & (s_x >= 0) & (s_x <= h1) & (t_x >= 0) & (t_x <= h2)
    best = np.where(hit, 0.0, best)
    s_best = np.where(hit, s_x, s_best)
    return best, s_best


def segment_max_distance(a1, b1, a2, b2):
    """Largest distance between points of two segments (attained at endpoints)."""
    return np.maximum(
        np.maximum(np.abs(a1 - a2), np.abs(a1 - b2)), np.maximum(np.abs(b1 - a2), np.abs(b1 - b2))
    )


def find_pairs(p1: Panels, p2: Panels, reach):
    """Index pairs of panels whose midpoints lie within ``reach + (h1 + h2) / 2``."""
    m1 = 0.5 * (p1.a + p1.b)
    m2 = 0.5 * (p2.a + p2.b)
    r = reach + 0.5 * (p1.h.max() + p2.h.max())
    t1 = cKDTree(np.column_stack([m1.real, m1.imag]))
    t2 = cKDTree(np.column_stack([m2.real, m2.imag]))
    lists = t1.query_ball_tree(t2, r)
    i = np.repeat(np.arange(len(lists)), [len(x) for x in lists])
    j = np.fromiter((q for x in lists for q in x), dtype=np.int64, count=i.size)
    return i, j


def log_primitive(z, v):
    """``F`` with ``F'(z) = log sqrt(z^2 + v^2)``; ``v >= 0``."""
    r2 = z * z + v * v
    with np.errstate(divide="ignore", invalid="ignore"):
        zl = np.where(z != 0, 0.5 * z * np.log(r2), 0.0)
    return zl - z + v * np.arctan2(z, v)


class PairGeometry:
    """Per-pair quantities ``u(s) = u0 + s cu`` and ``v(s) = v0 + s cv``.

    ``u`` is the coordinate of ``x(s)`` along panel 2, ``v`` its signed
    distance from the line of panel 2.
    """

    def __init__(self, a1, u1, h1, a2, u2, h2):
        self.a1, self.u1, self.h1 = a1, u1, h1
        self.a2, self.u2, self.h2 = a2, u2, h2
        c2 = u2.conj()
        w = (a1 - a2) * c2
        self.u0, self.v0 = w.real, w.imag
        z = u1 * c2
        self.cu, self.cv = z.real, z.imag
        self.weight = u1 * c2  # dx dy_bar = u1 conj(u2) ds dt

    def take(self, idx):
        g = object.__new__(PairGeometry)
        for name in ("a1", "u1", "h1", "a2", "u2", "h2", "u0", "v0", "cu", "cv", "weight"):
            setattr(g, name, getattr(self, name)[idx])
        return g


def inner_integral(ker, u, v, ta, tb, n_inner=8):
    """``int_ta^tb K(sqrt((t - u)^2 + v^2)) dt`` elementwise (``tb >= ta``)."""
    v = np.abs(v)
    out = np.zeros_like(u)
    if ker.c0:
        out = -ker.c0 * (log_primitive(tb - u, v) - log_primitive(ta - u, v))
    x, w = gauss(n_inner)
    length = tb - ta
    t = ta[..., None] + length[..., None] * x
    r = np.sqrt((t - u[..., None]) ** 2 + (v * v)[..., None])
    out = out + length * (ker.regular(r) @ w)
    return out


def far_pair_sum(ker, g: PairGeometry, n=8):
    """Tensor Gauss rule for well separated pairs, one value per pair."""
    x, w = gauss(n)
    s = g.h1[:, None] * x
    t = g.h2[:, None] * x
    xs = g.a1[:, None] + s * g.u1[:, None]
    yt = g.a2[:, None] + t * g.u2[:, None]
    r = np.abs(xs[:, :, None] - yt[:, None, :])
    k = ker(r)
    val = np.einsum("pij,i,j->p", k, w, w) * g.h1 * g.h2
    return val * g.weight


def _graded_points(h1, marks, sigma, levels):
    """Panel breakpoints on ``[0, h1]`` refined geometrically toward each mark."""
    pts = [np.zeros_like(h1), h1]
    for m in marks:
        m = np.clip(np.nan_to_num(m, nan=0.0, posinf=0.0, neginf=0.0), 0.0, h1)
        pts.append(m)
        for k in range(1, levels + 1):
            off = h1 * sigma**k
            pts.append(np.clip(m - off, 0.0, h1))
            pts.append(np.clip(m + off, 0.0, h1))
    return np.sort(np.stack(pts, axis=1), axis=1)


def near_pair_sum(ker, g: PairGeometry, s_star, sigma=0.15, levels=6, n_outer=6, n_inner=8):
    """Full ``int int K`` over close pairs with graded outer panels, one value per pair."""
    with np.errstate(divide="ignore", invalid="ignore"):
        s_v0 = -g.v0 / g.cv
        s_u0 = -g.u0 / g.cu
        s_uh = (g.h2 - g.u0) / g.cu
    pts = _graded_points(g.h1, [s_star, s_v0, s_u0, s_uh], sigma, levels)
    x, w = gauss(n_outer)
    lo, hi = pts[:, :-1], pts[:, 1:]
    s = lo[..., None] + (hi - lo)[..., None] * x  # pair, panel, node
    ws = (hi - lo)[..., None] * w
    u = g.u0[:, None, None] + s * g.cu[:, None, None]
    v = g.v0[:, None, None] + s * g.cv[:, None, None]
    ta = np.zeros_like(u)
    tb = np.broadcast_to(g.h2[:, None, None], u.shape)
    inner = inner_integral(ker, u, v, ta, tb, n_inner)
    val = np.sum(inner * ws, axis=(1, 2))
    return val * g.weight


def _quadratic_roots(qa, qb, qc):
    """Real roots of ``qa s^2 + 2 qb s + qc`` (NaN where absent)."""
    disc = qb * qb - qa * qc
    sq = np.sqrt(np.where(disc >= 0, disc, np.nan))
    q = -(qb + np.copysign(sq, qb))
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = q / qa
        r2 = qc / q
    return r1, r2


def exclusion_sum(ker, g: PairGeometry, eps, n_outer=8, n_inner=8):
    """``int int_{|x - y| < eps} K`` for each of the given pairs.

    The outer interval is cut where the inner clip interval changes form
    (``|v| = eps`` and the circles of radius ``eps`` about the panel-2
    endpoints) and each piece is integrated after the substitution
    ``s = lo + (hi - lo)(1 - cos theta)/2``, which absorbs the square-root
    behaviour at the cuts.
    """
    marks = []
    with np.errstate(divide="ignore", invalid="ignore"):
        marks.append((eps - g.v0) / g.cv)
        marks.append((-eps - g.v0) / g.cv)
    for p in (g.a2, g.a2 + g.h2 * g.u2):
        w = g.a1 - p
        qb = (w * g.u1.conj()).real
        qc = (w * w.conj()).real - eps * eps
        r1, r2 = _quadratic_roots(np.ones_like(qb), qb, qc)
        marks += [r1, r2]
    pts = [np.zeros_like(g.h1), g.h1]
    for m in marks:
        pts.append(np.clip(np.nan_to_num(m, nan=0.0, posinf=0.0, neginf=0.0), 0.0, g.h1))
    pts = np.sort(np.stack(pts, axis=1), axis=1)
    x, w = gauss(n_outer)
    # cosine map of [0, 1] onto itself and its Jacobian
    theta = np.pi * x
    y = 0.5 * (1.0 - np.cos(theta))
    wy = w * 0.5 * np.pi * np.sin(theta)
    lo, hi = pts[:, :-1], pts[:, 1:]
    s = lo[..., None] + (hi - lo)[..., None] * y
    ws = (hi - lo)[..., None] * wy
    u = g.u0[:, None, None] + s * g.cu[:, None, None]
    v = g.v0[:, None, None] + s * g.cv[:, None, None]
    half = np.sqrt(np.maximum(eps * eps - v * v, 0.0))
    h2 = g.h2[:, None, None]
    ta = np.clip(u - half, 0.0, h2)
    tb = np.clip(u + half, 0.0, h2)
    tb = np.maximum(tb, ta)
    inner = inner_integral(ker, u, v, ta, tb, n_inner)
    val = np.sum(inner * ws, axis=(1, 2))
    return val * g.weight
