"""Monte Carlo statistics of sampled configurations.

The action along a curve is the integral of the truncated field
``V(z) = sum_{|l| < T} 1/(z - l) - pi c conj(z)`` against ``dz``; its real
part is the work and its imaginary part the flux. Both come from the same
per-edge closed forms.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .curves import Curve, map_curve
from .errors import NumericalError, ValidationError
from .sampler import PointConfig, derive_seed, sample_ginibre, sample_poisson

STATISTICS = ("count", "action", "work", "flux", "multi_count")
POLE_TOL = 1e-12


@dataclass(frozen=True)
class SamplerSpec:
    """Which process to sample: ``ginibre`` (intensity 1) or ``poisson``."""

    kind: str = "ginibre"
    intensity: float = 1.0

    def __post_init__(self):
        if self.kind not in ("ginibre", "poisson"):
            raise ValidationError(f"unknown sampler {self.kind!r}; expected 'ginibre' or 'poisson'")
        if not self.intensity > 0:
            raise ValidationError("intensity must be positive")
        if self.kind == "ginibre" and self.intensity != 1.0:
            raise ValidationError("the Ginibre sampler has intensity 1")

    @property
    def physical_intensity(self) -> float:
        return float(self.intensity)

    def sample(self, window_radius: float, seed: int) -> PointConfig:
        if self.kind == "ginibre":
            return sample_ginibre(window_radius, seed)
        return sample_poisson(self.intensity, window_radius, seed)


@dataclass(frozen=True)
class Estimate:
    mean: Union[float, complex]
    variance: float
    stderr_of_variance: float
    n_samples: int
    base_seed: int
    samples: np.ndarray = field(default=None, repr=False, compare=False)

    def z_score(self, reference: float) -> float:
        """``(variance - reference) / stderr``."""
        return (self.variance - reference) / self.stderr_of_variance


# ----------------------------------------------------------------- geometry


def shoelace_area(curve: Curve) -> float:
    """Winding-weighted enclosed area of a closed polyline."""
    if not curve.closed:
        raise ValidationError("area needs a closed curve")
    a, b = curve.edges()
    return 0.5 * math.fsum((a.conj() * b).imag)


def _closed(curve: Curve) -> Curve:
    """The curve itself if closed, else the curve followed by the chord back to its start."""
    if curve.closed:
        return curve
    v = curve.vertices
    if v[-1] == v[0]:
        v = v[:-1]
    return Curve(v, closed=True)


def winding_numbers(points, curve: Curve, chunk: int = 1 << 20) -> np.ndarray:
    """Winding number of a polyline around each point (crossing rule).

    An open curve is closed by the chord from its end back to its start.
    """
    curve = _closed(curve)
    pts = np.asarray(points, dtype=complex).reshape(-1)
    out = np.zeros(pts.size, dtype=np.int64)
    if pts.size == 0:
        return out
    v = curve.vertices
    inbox = (
        (pts.real >= v.real.min()) & (pts.real <= v.real.max())
        & (pts.imag >= v.imag.min()) & (pts.imag <= v.imag.max())
    )
    idx = np.flatnonzero(inbox)
    if idx.size == 0:
        return out
    a, b = curve.edges()
    ay, by = a.imag, b.imag
    step = max(1, chunk // a.size)
    for s in range(0, idx.size, step):
        sel = idx[s:s + step]
        p = pts[sel][:, None]
        left = ((b - a).conj() * (p - a)).imag  # > 0 when p is left of a->b
        up = (ay <= p.imag) & (by > p.imag) & (left > 0)
        down = (by <= p.imag) & (ay > p.imag) & (left < 0)
        out[sel] = up.sum(axis=1) - down.sum(axis=1)
    return out


def _check_inside(curve: Curve, radius: float, what: str):
    reach = float(np.abs(curve.vertices).max())
    if reach > radius:
        raise ValidationError(f"curve reaches |z| = {reach:.6g}, beyond the {what} {radius:.6g}")


def count_in_region(config: PointConfig, closed_curve: Curve) -> int:
    """Points counted with their winding number about the curve.

    An open curve is closed by its end-to-start chord; for
    :func:`~fluxlab.curves.nested_circles_curve` the chord retraces the
    connectors, so each point counts once per loop around it.
    """
    _check_inside(closed_curve, config.window_radius, "window radius")
    return int(winding_numbers(config.points, closed_curve).sum())


def _pole_sum(points, a, b):
    """``sum_l sum_edges Log((b - l)/(a - l))``; each edge subtends less than pi."""
    total = 0j
    step = max(1, (1 << 20) // a.size)
    for s in range(0, points.size, step):
        p = points[s:s + step, None]
        total += np.log((b - p) / (a - p)).sum()
    return total


def _near_edge(points, a, b, tol):
    d = b - a
    dd = (d * d.conj()).real
    hits = np.zeros(points.size, dtype=bool)
    step = max(1, (1 << 20) // a.size)
    for s in range(0, points.size, step):
        p = points[s:s + step, None]
        t = np.clip(((p - a) * d.conj()).real / dd, 0.0, 1.0)
        hits[s:s + step] = (np.abs(a + t * d - p) < tol).any(axis=1)
    return hits


def action_along(config: PointConfig, curve: Curve, physical_intensity: float, truncation_radius: float) -> complex:
    """Integral of the truncated field along the curve.

    A point within ``1e-12`` of the curve is nudged once by ``1e-9`` along
    the normal of the nearest edge; if it is still on the curve a
    :class:`NumericalError` is raised.
    """
    if not truncation_radius > 0:
        raise ValidationError("truncation_radius must be positive")
    if truncation_radius > config.window_radius * (1 + 1e-12):
        raise ValidationError(
            f"truncation radius {truncation_radius} exceeds the window radius {config.window_radius}"
        )
    _check_inside(curve, 0.5 * truncation_radius, "half truncation radius")
    a, b = curve.edges()
    pts = config.points[np.abs(config.points) < truncation_radius]
    close = _near_edge(pts, a, b, POLE_TOL)
    if close.any():
        pts = pts.copy()
        for k in np.flatnonzero(close):
            d = b - a
            dist = np.abs(a + np.clip(((pts[k] - a) * d.conj()).real / (d * d.conj()).real, 0, 1) * d - pts[k])
            e = int(np.argmin(dist))
            pts[k] += 1e-9 * 1j * d[e] / abs(d[e])
        if _near_edge(pts[close], a, b, POLE_TOL).any():
            raise NumericalError("a point lies on the curve; the action is undefined")
    poles = _pole_sum(pts, a, b)
    zbar_dz = np.sum((b - a) * (a + b).conj()) / 2.0
    return complex(poles - np.pi * physical_intensity * zbar_dz)


# --------------------------------------------------------------- estimation


def default_threads() -> int:
    env = os.environ.get("FLUXLAB_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValidationError(f"FLUXLAB_THREADS must be an integer, got {env!r}") from None
        if n >= 1:
            return n
    return 1


def batch_means_stderr(values: np.ndarray) -> float:
    """Standard error of the sample variance from ``floor(sqrt(n))`` batches."""
    n = values.size
    nb = max(2, int(math.isqrt(n)))
    size = n // nb
    if size < 2:
        raise ValidationError("too few samples for batch means")
    batches = values[: nb * size].reshape(nb, size)
    dev = batches - batches.mean(axis=1, keepdims=True)
    bv = (np.abs(dev) ** 2).sum(axis=1) / (size - 1)
    return float(bv.std(ddof=1) / math.sqrt(nb))


def _fsum_complex(x):
    x = np.asarray(x)
    if np.iscomplexobj(x):
        return complex(math.fsum(x.real), math.fsum(x.imag))
    return math.fsum(x)


def _statistic_fn(sampler, statistic, target, R):
    if statistic not in STATISTICS:
        raise ValidationError(f"unknown statistic {statistic!r}; expected one of {', '.join(STATISTICS)}")
    c = sampler.physical_intensity
    if statistic == "multi_count":
        if isinstance(target, Curve):
            target = [target]
        items = list(target)
        if not items:
            raise ValidationError("multi_count needs at least one radius or curve")
        if all(isinstance(t, Curve) for t in items):
            curves = [map_curve(t, scale=R) for t in items]
            window = max(float(np.abs(cv.vertices).max()) for cv in curves)

            def fn(cfg):
                return float(sum(count_in_region(cfg, cv) for cv in curves))

            return window, fn
        radii = np.sort(np.asarray(items, dtype=float)) * R
        if np.any(~(radii > 0)):
            raise ValidationError("multi_count radii must be positive")

        def fn(cfg):
            # each point counts once per radius exceeding its modulus
            below = np.searchsorted(radii, np.abs(cfg.points), side="right")
            return float(np.sum(radii.size - below))

        return float(radii.max()), fn
    if not isinstance(target, Curve):
        raise ValidationError(f"statistic {statistic!r} needs a single curve")
    curve = map_curve(target, scale=R)
    reach = float(np.abs(curve.vertices).max())
    if statistic == "count":
        return reach, lambda cfg: float(count_in_region(cfg, curve))
    trunc = 2.0 * reach
    part = {"action": lambda z: z, "work": lambda z: z.real, "flux": lambda z: z.imag}[statistic]
    return trunc, lambda cfg: part(action_along(cfg, curve, c, trunc))


def estimate_statistic(
    model_sampler: SamplerSpec,
    statistic: str,
    target,
    R: float,
    n: int,
    base_seed: int,
    threads: int | None = None,
) -> Estimate:
    """Mean and variance of a statistic over ``n`` independent configurations.

    Sample ``i`` uses seed ``base_seed XOR splitmix64(i)``; results are
    gathered in index order, so they do not depend on ``threads``. For
    ``action``/``work``/``flux`` the window and truncation radius are twice
    the largest modulus on the dilated curve; for counts the window just
    covers the dilated target. The variance of a complex statistic is
    ``E|X - EX|^2``.
    """
    if int(n) != n or n < 2:
        raise ValidationError(f"n must be an integer >= 2, got {n}")
    if not R > 0:
        raise ValidationError(f"R must be positive, got {R}")
    if isinstance(base_seed, bool) or int(base_seed) != base_seed or base_seed < 0:
        raise ValidationError("base_seed must be a nonnegative integer")
    window, fn = _statistic_fn(model_sampler, statistic, target, R)
    window *= 1 + 1e-12

    def one(i):
        return fn(model_sampler.sample(window, derive_seed(base_seed, i)))

    threads = threads or default_threads()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            vals = list(ex.map(one, range(int(n))))
    else:
        vals = [one(i) for i in range(int(n))]
    x = np.asarray(vals)
    mean = _fsum_complex(x) / x.size
    var = math.fsum(np.abs(x - mean) ** 2) / (x.size - 1)
    return Estimate(
        mean=mean,
        variance=var,
        stderr_of_variance=batch_means_stderr(x),
        n_samples=int(n),
        base_seed=int(base_seed),
        samples=x,
    )
