"""Oriented planar polylines and the test curves used in the experiments.

Points are complex numbers. A :class:`Curve` is a vertex chain traversed in
order; when ``closed`` is set, an extra edge joins the last vertex back to the
first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True, eq=False)
class Curve:
    vertices: np.ndarray
    closed: bool = False

    def __post_init__(self):
        v = np.array(self.vertices, dtype=complex).reshape(-1)
        if v.size < 2:
            raise ValidationError(f"a curve needs at least 2 vertices, got {v.size}")
        if not np.all(np.isfinite(v)):
            bad = int(np.flatnonzero(~np.isfinite(v))[0])
            raise ValidationError(f"vertex {bad} is not finite")
        same = np.flatnonzero(v[1:] == v[:-1])
        if same.size:
            i = int(same[0]) + 1
            raise ValidationError(f"vertex {i} repeats vertex {i - 1} (zero-length edge)")
        if self.closed and v[-1] == v[0]:
            raise ValidationError(
                f"vertex {v.size - 1} repeats vertex 0; closed curves are closed implicitly"
            )
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def starts(self) -> np.ndarray:
        """Start point of every edge."""
        return self.vertices if self.closed else self.vertices[:-1]

    @property
    def ends(self) -> np.ndarray:
        """End point of every edge."""
        if self.closed:
            return np.roll(self.vertices, -1)
        return self.vertices[1:]

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        return self.starts, self.ends

    @property
    def n_edges(self) -> int:
        return self.vertices.size if self.closed else self.vertices.size - 1

    def edge_lengths(self) -> np.ndarray:
        a, b = self.edges()
        return np.abs(b - a)

    @property
    def length(self) -> float:
        return math.fsum(self.edge_lengths())

    @property
    def diameter(self) -> float:
        """Largest distance between two vertices (exact for polylines)."""
        return point_set_diameter(self.vertices)

    @property
    def start(self) -> complex:
        return complex(self.vertices[0])

    @property
    def end(self) -> complex:
        return complex(self.vertices[0] if self.closed else self.vertices[-1])

    def __len__(self):
        return self.vertices.size

    def __eq__(self, other):
        if not isinstance(other, Curve):
            return NotImplemented
        return self.closed == other.closed and np.array_equal(self.vertices, other.vertices)

    def __hash__(self):
        return hash((self.closed, self.vertices.tobytes()))

    def __repr__(self):
        kind = "closed" if self.closed else "open"
        return f"Curve({len(self)} vertices, {kind}, length={self.length:.6g})"


def point_set_diameter(points) -> float:
    """Largest pairwise distance in a finite set of complex points."""
    v = np.unique(np.asarray(points, dtype=complex))
    if v.size > 500:
        from scipy.spatial import ConvexHull, QhullError

        try:
            v = v[ConvexHull(np.column_stack([v.real, v.imag])).vertices]
        except QhullError:  # collinear points: the extremes along x or y suffice
            v = v[[np.argmin(v.real), np.argmax(v.real), np.argmin(v.imag), np.argmax(v.imag)]]
    return float(np.abs(v[:, None] - v[None, :]).max())


def make_polyline(vertices: Sequence[complex], closed: bool = False) -> Curve:
    """Build a curve through ``vertices`` in order.

    Accepts complex numbers or ``(x, y)`` pairs. Raises :class:`ValidationError`
    naming the offending index for repeated consecutive vertices.
    """
    arr = np.asarray(vertices)
    if arr.ndim == 2 and arr.shape[1] == 2 and not np.iscomplexobj(arr):
        arr = arr[:, 0] + 1j * arr[:, 1]
    return Curve(arr, closed)


def circle_curve(center: complex = 0j, radius: float = 1.0, segments: int = 64) -> Curve:
    """Closed regular polygon inscribed in a circle, counterclockwise."""
    if not radius > 0:
        raise ValidationError(f"radius must be positive, got {radius}")
    if int(segments) != segments or segments < 3:
        raise ValidationError(f"segments must be an integer >= 3, got {segments}")
    theta = 2 * np.pi * np.arange(int(segments)) / int(segments)
    return Curve(complex(center) + radius * np.exp(1j * theta), closed=True)


def circle_segments(radius: float, dilation: float = 1.0) -> int:
    """Scale-aware default resolution for circles that will be dilated."""
    return max(64, math.ceil(64 * radius * dilation))


def map_curve(
    curve: Curve,
    scale: float = 1.0,
    rotation: float = 0.0,
    translation: complex = 0j,
    reverse: bool = False,
) -> Curve:
    """Apply ``z -> scale * exp(i*rotation) * z + translation``, optionally reversing."""
    if not scale > 0:
        raise ValidationError(f"scale must be positive, got {scale}")
    v = curve.vertices
    if rotation:
        v = v * complex(math.cos(rotation), math.sin(rotation))
    if scale != 1:
        v = v * scale
    if translation:
        v = v + translation
    if reverse:
        v = v[::-1]
    return Curve(v, curve.closed)


def reverse_curve(curve: Curve) -> Curve:
    return map_curve(curve, reverse=True)


def _check_eps(eps):
    if not 0 < eps < 1:
        raise ValidationError(f"eps must lie in (0, 1), got {eps}")


def nested_radii(eps: float, k_max: int) -> np.ndarray:
    """The radii ``k**(-1-eps)`` for ``k = 1 .. k_max + 1``."""
    _check_eps(eps)
    if int(k_max) != k_max or k_max < 1:
        raise ValidationError(f"k_max must be an integer >= 1, got {k_max}")
    k = np.arange(1, int(k_max) + 2, dtype=float)
    return k ** (-1.0 - eps)


def spiral_curve(eps: float, k_max: int, pts_per_turn: int = 16) -> Curve:
    """Open spiral whose k-th turn shrinks linearly from radius l_k to l_{k+1}.

    Starts at ``1j * l_1``, turns counterclockwise, and ends at ``1j * l_{k_max+1}``.
    """
    ell = nested_radii(eps, k_max)
    if int(pts_per_turn) != pts_per_turn or pts_per_turn < 8:
        raise ValidationError(f"pts_per_turn must be an integer >= 8, got {pts_per_turn}")
    n = int(pts_per_turn)
    t = np.arange(n) / n
    turns = (ell[:-1, None] * (1 - t) + ell[1:, None] * t) * np.exp(2j * np.pi * t)
    pts = np.concatenate([turns.reshape(-1), [ell[-1] + 0j]])
    return Curve(1j * pts, closed=False)


def nested_circles_curve(eps: float, k_max: int, segments: int = 64) -> Curve:
    """Segment from 0 up to ``1j*l_1``, then for each k a full counterclockwise
    loop of radius l_k based at ``1j*l_k`` followed by a drop to ``1j*l_{k+1}``."""
    ell = nested_radii(eps, k_max)
    if int(segments) != segments or segments < 3:
        raise ValidationError(f"segments must be an integer >= 3, got {segments}")
    n = int(segments)
    loop = 1j * np.exp(2j * np.pi * np.arange(n) / n)
    pieces = [np.array([0j])]
    for lk in ell[:-1]:
        pieces.append(lk * loop)
        pieces.append(np.array([1j * lk]))
    pieces.append(np.array([1j * ell[-1]]))
    return Curve(np.concatenate(pieces), closed=False)
