"""Geometric functionals of polylines.

``nu_disk`` is the integral of ``dz`` over the part of a curve inside an open
disk. ``weak_ahlfors_estimate`` searches for disks maximizing
``|nu_disk| / (2 pi r)``. ``signed_length`` measures the orientation-weighted
overlap of two curves.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.spatial import cKDTree

from .curves import Curve, point_set_diameter
from .errors import ValidationError


def _clip_params(a, b, center, radius):
    """Parameter interval ``[t0, t1]`` of each segment ``a + t (b - a)`` inside the disk.

    Returns arrays ``t0, t1`` with ``t1 <= t0`` meaning empty.
    """
    d = b - a
    w = a - center
    qa = (d * d.conj()).real
    qb = (d.conj() * w).real  # half the linear coefficient
    qc = (w * w.conj()).real - radius * radius
    disc = qb * qb - qa * qc
    ok = disc > 0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    # numerically stable roots of qa t^2 + 2 qb t + qc
    q = -(qb + np.copysign(sq, qb))
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = q / qa
        r2 = np.where(q != 0, qc / q, 0.0)
    lo = np.minimum(r1, r2)
    hi = np.maximum(r1, r2)
    t0 = np.clip(lo, 0.0, 1.0)
    t1 = np.clip(hi, 0.0, 1.0)
    t1 = np.where(ok, t1, t0)
    return t0, t1


def nu_disk(curve: Curve, center: complex, radius: float) -> complex:
    """Exact ``int_{curve inside D(center, radius)} dz`` for the open disk."""
    if not radius > 0:
        raise ValidationError(f"radius must be positive, got {radius}")
    a, b = curve.edges()
    t0, t1 = _clip_params(a, b, complex(center), float(radius))
    span = np.maximum(t1 - t0, 0.0)
    return complex(np.sum(span * (b - a)))


@dataclass(frozen=True)
class AhlforsReport:
    sup_ratio: float
    witness_center: complex
    witness_radius: float
    centers_tested: int
    radii_tested: int

    def to_dict(self) -> dict:
        d = asdict(self)
        z = complex(self.witness_center)
        d["witness_center"] = [z.real, z.imag]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


class _EdgeTable:
    """Edge data in real arithmetic, reused across disk centers."""

    def __init__(self, a, b):
        self.a, self.b = a, b
        self.d = b - a
        self.ax, self.ay = a.real.copy(), a.imag.copy()
        self.bx, self.by = b.real.copy(), b.imag.copy()
        self.dx, self.dy = self.d.real.copy(), self.d.imag.copy()
        self.dd = self.dx * self.dx + self.dy * self.dy

    def distances(self, c):
        """Nearest and farthest distance from ``c`` to each edge."""
        px, py = self.ax - c.real, self.ay - c.imag
        qx, qy = self.bx - c.real, self.by - c.imag
        far = np.sqrt(np.maximum(px * px + py * py, qx * qx + qy * qy))
        t = np.clip(-(px * self.dx + py * self.dy) / self.dd, 0.0, 1.0)
        nx, ny = px + t * self.dx, py + t * self.dy
        near = np.sqrt(nx * nx + ny * ny)
        return near, far

    def ratios(self, c, radii):
        """``|nu(c, r)| / (2 pi r)`` for every radius in the sorted array."""
        n_r = radii.size
        e_min, e_max = self.distances(c)
        # an edge is inside for radii strictly above e_max and cut by the circle for radii in (e_min, e_max]
        full_from = np.searchsorted(radii, e_max, side="right")
        part_from = np.searchsorted(radii, e_min, side="right")
        nu = np.bincount(full_from, weights=self.dx, minlength=n_r + 1) + 1j * np.bincount(
            full_from, weights=self.dy, minlength=n_r + 1
        )
        nu = np.cumsum(nu)[:n_r]
        count = full_from - part_from
        idx = np.flatnonzero(count)
        if idx.size:
            reps = count[idx]
            edge = np.repeat(idx, reps)
            m = np.arange(edge.size) - np.repeat(np.cumsum(reps) - reps - part_from[idx], reps)
            t0, t1 = _clip_params(self.a[edge], self.b[edge], c, radii[m])
            contrib = np.maximum(t1 - t0, 0.0) * self.d[edge]
            nu += np.bincount(m, weights=contrib.real, minlength=n_r) + 1j * np.bincount(
                m, weights=contrib.imag, minlength=n_r
            )
        return np.abs(nu) / (2.0 * np.pi * radii)


def weak_ahlfors_estimate(curve: Curve, center_grid: int = 21, radii_per_center: int | None = None
                          ) -> AhlforsReport:
    """Lower bound for ``sup_D |nu(D)| / (2 pi r)`` by grid search.

    Centers: a ``center_grid`` x ``center_grid`` lattice over the bounding box
    padded by the diameter (rounded up to an odd count so the box center is on
    the lattice) plus every vertex. Radii: ``radii_per_center`` log-spaced
    values from a quarter of the shortest edge to twice the diameter (dyadic
    by default). For open curves each center also tries the two disks whose
    boundary passes through an endpoint of the curve, which is where spiralling
    concentrates.
    """
    if int(center_grid) != center_grid or center_grid < 1:
        raise ValidationError(f"center_grid must be an integer >= 1, got {center_grid}")
    a, b = curve.edges()
    diam = curve.diameter
    r_min = float(curve.edge_lengths().min()) / 4.0
    r_max = 2.0 * diam
    if radii_per_center is None:
        radii_per_center = int(math.ceil(math.log2(r_max / r_min))) + 1
    if int(radii_per_center) != radii_per_center or radii_per_center < 1:
        raise ValidationError(f"radii_per_center must be an integer >= 1, got {radii_per_center}")
    base_radii = np.geomspace(r_min, r_max, int(radii_per_center)) if radii_per_center > 1 else np.array([r_max])

    n = int(center_grid) + (1 - int(center_grid) % 2)
    v = curve.vertices
    x0, x1 = v.real.min() - diam, v.real.max() + diam
    y0, y1 = v.imag.min() - diam, v.imag.max() + diam
    if n == 1:
        gx = np.array([(x0 + x1) / 2])
        gy = np.array([(y0 + y1) / 2])
    else:
        gx = np.linspace(x0, x1, n)
        gy = np.linspace(y0, y1, n)
    grid = (gx[:, None] + 1j * gy[None, :]).ravel()
    centers = np.unique(np.concatenate([grid, v]))  # lexicographic (re, im) order
    ends = [] if curve.closed else [curve.start, curve.end]

    table = _EdgeTable(a, b)
    best = (-1.0, 0j, 0.0)
    total_radii = 0
    for c in centers:
        extra = [abs(c - e) for e in ends]
        radii = base_radii
        if extra:
            radii = np.unique(np.concatenate([base_radii, [r for r in extra if r > 0]]))
        total_radii += radii.size
        ratios = table.ratios(complex(c), radii)
        j = int(np.argmax(ratios))
        if ratios[j] > best[0]:
            best = (float(ratios[j]), complex(c), float(radii[j]))
    _, wc, wr = best
    ratio = abs(nu_disk(curve, wc, wr)) / (2.0 * np.pi * wr)
    return AhlforsReport(
        sup_ratio=ratio,
        witness_center=wc,
        witness_radius=wr,
        centers_tested=int(centers.size),
        radii_tested=int(total_radii),
    )


# ----------------------------------------------------------- signed length


def _cross(u, w):
    return (u.conj() * w).imag


def _pair_candidates(a1, b1, a2, b2, band):
    m1, m2 = 0.5 * (a1 + b1), 0.5 * (a2 + b2)
    h1, h2 = np.abs(b1 - a1), np.abs(b2 - a2)
    reach = 0.5 * (h1.max() + h2.max()) + band
    t1 = cKDTree(np.column_stack([m1.real, m1.imag]))
    t2 = cKDTree(np.column_stack([m2.real, m2.imag]))
    pairs = t1.query_ball_tree(t2, reach)
    i = np.repeat(np.arange(len(pairs)), [len(p) for p in pairs])
    j = np.fromiter((q for p in pairs for q in p), dtype=int, count=i.size)
    return i, j


def signed_length(curve1: Curve, curve2: Curve, band: float | None = None, refine: int = 1) -> float:
    """Overlap length of two curves weighted by the sign of ``t1 . t2``.

    Two edges contribute when they lie on a common line within ``band``; the
    shared length is measured along the mean direction of the pair. Transversal
    crossings contribute nothing. ``refine`` passes snap the four endpoints to
    the common line and re-estimate its direction before measuring.
    """
    if band is None:
        band = 1e-9 * point_set_diameter(np.concatenate([curve1.vertices, curve2.vertices]))
    if not band > 0:
        raise ValidationError(f"band must be positive, got {band}")
    if int(refine) != refine or refine < 0:
        raise ValidationError(f"refine must be a nonnegative integer, got {refine}")
    a1, b1 = curve1.edges()
    a2, b2 = curve2.edges()
    i, j = _pair_candidates(a1, b1, a2, b2, band)
    if i.size == 0:
        return 0.0
    p, q, r, s = a1[i], b1[i], a2[j], b2[j]
    h1, h2 = np.abs(q - p), np.abs(s - r)
    u1, u2 = (q - p) / h1, (s - r) / h2
    hmax = np.maximum(h1, h2)
    keep = np.abs(_cross(u1, u2)) * hmax < band
    keep &= np.abs(_cross(u1, r - p)) < band
    keep &= np.abs(_cross(u1, s - p)) < band
    keep &= np.abs(_cross(u2, p - r)) < band
    keep &= np.abs(_cross(u2, q - r)) < band
    if not np.any(keep):
        return 0.0
    p, q, r, s, u1, u2 = p[keep], q[keep], r[keep], s[keep], u1[keep], u2[keep]
    sign = np.where((u1.conj() * u2).real >= 0, 1.0, -1.0)
    u = u1 + sign * u2
    u = u / np.abs(u)
    # a + b == b + a exactly, so the origin is the same for either argument order
    o = 0.25 * ((p + q) + (r + s))
    for _ in range(int(refine)):
        pts = np.stack([p, q, r, s])
        along = ((pts - o) * u.conj()).real
        snapped = o + along * u
        # direction through the extreme snapped points, oriented like u
        lo = snapped[np.argmin(along, axis=0), np.arange(u.size)]
        hi = snapped[np.argmax(along, axis=0), np.arange(u.size)]
        w = hi - lo
        good = np.abs(w) > 0
        u = np.where(good, w / np.where(good, np.abs(w), 1.0), u)
    x1 = ((p - o) * u.conj()).real, ((q - o) * u.conj()).real
    x2 = ((r - o) * u.conj()).real, ((s - o) * u.conj()).real
    lo1, hi1 = np.minimum(*x1), np.maximum(*x1)
    lo2, hi2 = np.minimum(*x2), np.maximum(*x2)
    overlap = np.maximum(np.minimum(hi1, hi2) - np.maximum(lo1, lo2), 0.0)
    return math.fsum(overlap * sign)
