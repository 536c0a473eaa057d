"""Point configurations in a centered disk window.

The Ginibre sampler uses Kostlan's description of the moduli: the squared
moduli of the points (native intensity ``1/pi``) are independent
``Gamma(j, 1)`` variables, ``j = 1, 2, ...``. Radii are rescaled by
``1/sqrt(pi)`` to intensity 1. The angles are drawn independently and
uniformly, so the sampler reproduces every statistic that depends on the
moduli alone (counts in centered disks, for instance) but not the angular
correlations of the true process.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError
from .special import gammainc_lower, gammainc_upper

MASK64 = (1 << 64) - 1


def splitmix64(i: int) -> int:
    """One step of the splitmix64 output function applied to ``i``."""
    z = (i * 0x9E3779B97F4A7C15 + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed: int, index: int) -> int:
    """Seed of sample ``index`` in a batch: ``base_seed XOR splitmix64(index)``."""
    return (int(base_seed) & MASK64) ^ splitmix64(int(index))


def _check_seed(seed):
    if isinstance(seed, bool) or int(seed) != seed or seed < 0 or seed > MASK64:
        raise ValidationError(f"seed must be an integer in [0, 2**64), got {seed}")
    return int(seed)


@dataclass(frozen=True, eq=False)
class PointConfig:
    points: np.ndarray = field(repr=False)
    window_radius: float
    model_label: str
    seed: int
    physical_intensity: float

    def __post_init__(self):
        p = np.array(self.points, dtype=complex).reshape(-1)
        if p.size and np.abs(p).max() > self.window_radius * (1 + 1e-12):
            raise ValidationError("configuration has points outside its window")
        p.setflags(write=False)
        object.__setattr__(self, "points", p)

    def __len__(self):
        return self.points.size

    @property
    def header(self) -> dict:
        return {
            "model": self.model_label,
            "R": self.window_radius,
            "seed": self.seed,
            "intensity": self.physical_intensity,
            "count": len(self),
        }


def ginibre_index_cap(window_radius: float) -> int:
    """Safety cap on the Kostlan index: ``ceil(4 pi W^2) + 64``."""
    return int(math.ceil(4.0 * math.pi * window_radius**2)) + 64


def _ginibre_index_count(window_radius):
    x = math.pi * window_radius**2
    return min(int(math.ceil(x + 12.0 * math.sqrt(x) + 64)), ginibre_index_cap(window_radius))


def sample_ginibre(window_radius: float, seed: int) -> PointConfig:
    """Intensity-1 Ginibre moduli (exact) with independent uniform angles."""
    if not window_radius > 0:
        raise ValidationError(f"window_radius must be positive, got {window_radius}")
    seed = _check_seed(seed)
    rng = np.random.default_rng(seed)
    n = _ginibre_index_count(window_radius)
    g = rng.gamma(np.arange(1, n + 1, dtype=float))
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    x = math.pi * window_radius**2
    if g[-1] <= x:
        raise NumericalError(f"Kostlan index cap {n} reached inside the window")
    keep = g <= x
    r = np.sqrt(g[keep] / math.pi)
    pts = r * np.exp(1j * theta[keep])
    return PointConfig(pts, float(window_radius), "ginibre", seed, 1.0)


def sample_poisson(intensity: float, window_radius: float, seed: int) -> PointConfig:
    """Homogeneous Poisson process in the disk of radius ``window_radius``."""
    if not intensity > 0:
        raise ValidationError(f"intensity must be positive, got {intensity}")
    if not window_radius > 0:
        raise ValidationError(f"window_radius must be positive, got {window_radius}")
    seed = _check_seed(seed)
    rng = np.random.default_rng(seed)
    n = rng.poisson(intensity * math.pi * window_radius**2)
    r = window_radius * np.sqrt(rng.uniform(0.0, 1.0, n))
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    return PointConfig(r * np.exp(1j * theta), float(window_radius), "poisson", seed, float(intensity))


def _band(x, width=40.0, pad=60.0):
    s = math.sqrt(x)
    lo = max(1, int(math.floor(x - width * s - pad)))
    hi = int(math.ceil(x + width * s + pad))
    return lo, hi


def ginibre_disk_moments_exact(R: float) -> tuple[float, float]:
    """Mean and variance of the intensity-1 Ginibre count in the disk of radius ``R``.

    The count is a sum of independent Bernoulli variables with success
    probabilities ``P(j, pi R^2)``. Indices below the band ``x -+ 40 sqrt(x)``
    have ``P = 1`` to double precision; above it the terms decay faster than
    geometrically and the remainder is bounded explicitly.
    """
    if not R > 0:
        raise ValidationError(f"R must be positive, got {R}")
    x = math.pi * R * R
    lo, hi = _band(x)
    j = np.arange(lo, hi + 1, dtype=float)
    p = gammainc_lower(j, x)
    q = gammainc_upper(j, x)
    # terms below the band: 1 - P(lo - 1, x) is negligible
    below_defect = float(gammainc_upper(lo - 1, x)) if lo > 1 else 0.0
    ratio = x / (hi + 1.0)
    tail = float(p[-1]) * ratio / (1.0 - ratio)
    if below_defect * lo > 1e-14 or tail > 1e-14:
        raise NumericalError("disk moment summation band too narrow", achieved=max(below_defect * lo, tail))
    mean = (lo - 1) + math.fsum(p)
    variance = math.fsum(p * q)
    if abs(mean - x) > 1e-8 * x:
        raise NumericalError(f"Kostlan mean identity failed: {mean} vs {x}", achieved=abs(mean - x))
    return mean, variance
