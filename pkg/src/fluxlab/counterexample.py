"""Exact variance of the nested-disk charge sum for the Ginibre process.

With ``l_k = k^(-1-eps)`` and Kostlan's independent ``G_j ~ Gamma(j, 1)``
(native intensity ``1/pi``), the statistic ``sum_k n(R l_k D)`` equals
``sum_j m_j`` with ``m_j = #{k : G_j <= (R l_k)^2}``. The ``m_j`` are
independent and, because the radii decrease, ``m_j >= k`` exactly when
``G_j <= (R l_k)^2``. Hence ``E m_j = sum_k P(j, x_k)`` and
``E m_j^2 = sum_k (2k - 1) P(j, x_k)`` with ``x_k = (R l_k)^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln, zeta

from .errors import NumericalError, ValidationError
from .special import gammainc_lower, gammainc_upper

REL_TAIL = 1e-8
_BAND_WIDTH = 40.0
_BAND_PAD = 60.0
_TAIL_ORDERS = 3


@dataclass(frozen=True)
class NestedVariance:
    value: float
    k_explicit: int
    j_cap: int
    tail_bound: float
    lower_bound: float


@dataclass(frozen=True)
class GrowthFit:
    radii: tuple
    variances: tuple
    slope: float
    intercept: float
    max_residual: float

    def to_dict(self) -> dict:
        return {
            "radii": list(self.radii),
            "variances": list(self.variances),
            "slope": self.slope,
            "intercept": self.intercept,
            "max_residual": self.max_residual,
        }


def _check_eps(eps):
    if not 0 < eps < 1:
        raise ValidationError(f"eps must lie in (0, 1), got {eps}")


def _check_cap(name, cap):
    if cap is None:
        return None
    if isinstance(cap, bool) or int(cap) != cap or cap < 1:
        raise ValidationError(f"{name} must be a positive integer, got {cap}")
    return int(cap)


def _accumulate(eps, R, k_cap, j_cap, delta):
    """Moments ``E m_j`` and ``E m_j^2`` for ``j <= j_cap``.

    Circles with ``x_k >= delta`` are summed explicitly. For the rest
    ``P(j, x) = x^j / j! (1 + O(x))`` and the sums over ``k`` are Hurwitz
    zeta values; only ``j <= 3`` is kept. Returns the moments, the number
    of explicit circles and a bound on the neglected small-``x`` terms.
    """
    s = 2.0 + 2.0 * eps
    em = np.zeros(j_cap + 2)
    em2 = np.zeros(j_cap + 2)
    dm = np.zeros(j_cap + 2)
    dm2 = np.zeros(j_cap + 2)
    k_max = k_cap if k_cap is not None else math.inf
    k = 1
    while k <= k_max:
        x = (R * k ** (-1.0 - eps)) ** 2
        if x < delta:
            break
        w = _BAND_WIDTH * math.sqrt(x) + _BAND_PAD
        lo = max(1, int(x - w))
        hi = min(j_cap, int(x + w) + 1)
        if lo > 1:
            # P(j, x) = 1 to double precision below the band
            top = min(lo, j_cap + 1)
            dm[1] += 1.0
            dm[top] -= 1.0
            dm2[1] += 2 * k - 1
            dm2[top] -= 2 * k - 1
        if lo <= hi:
            j = np.arange(lo, hi + 1, dtype=float)
            p = gammainc_lower(j, x)
            em[lo:hi + 1] += p
            em2[lo:hi + 1] += (2 * k - 1) * p
        k += 1
    em += np.cumsum(dm)
    em2 += np.cumsum(dm2)
    k_explicit = k - 1
    neglected = 0.0
    if k <= k_max:
        # Hurwitz tails over k in [k, k_max]
        def hz(a):
            tail = zeta(a, k)
            if k_cap is not None:
                tail -= zeta(a, k_cap + 1)
            return float(tail)

        for jj in range(1, _TAIL_ORDERS + 1):
            if jj > j_cap:
                break
            c = math.exp(2 * jj * math.log(R) - gammaln(jj + 1))
            t1 = c * hz(s * jj)
            t2 = c * (2.0 * hz(s * jj - 1.0) - hz(s * jj))
            em[jj] += t1
            em2[jj] += t2
            # relative error of x^j/j! is at most x <= delta
            neglected += delta * (t2 + 2.0 * em[jj] * t1)
        jj = _TAIL_ORDERS + 1
        c = math.exp(2 * jj * math.log(R) - gammaln(jj + 1))
        # all orders above the last kept one, geometric in delta
        neglected += c * (2.0 * hz(s * jj - 1.0)) / (1.0 - delta) * (1.0 + 2.0 * em[1])
    return em[1:j_cap + 1], em2[1:j_cap + 1], k_explicit, neglected


def _j_tail_bound(x1, j_cap, k_total):
    """Bound on ``sum_{j > j_cap} E m_j^2`` (every circle lies inside the first)."""
    j = j_cap + 1
    if j <= x1 + 1:
        return math.inf
    ratio = x1 / (j + 1.0)
    return float(gammainc_lower(float(j), x1)) / (1.0 - ratio) * k_total**2


def nested_variance_report(eps: float, R: float, k_cap: int | None = None, j_cap: int | None = None) -> NestedVariance:
    """:func:`nested_variance_exact` with the caps used and the tail bound.

    ``k_cap=None`` means the full infinite family. ``j_cap`` defaults to
    ``x_1 + 40 sqrt(x_1) + 60``; a cap whose tail bound exceeds ``1e-8``
    of the value is widened, and :class:`NumericalError` is raised if the
    bound cannot be met.
    """
    _check_eps(eps)
    if not R > 0:
        raise ValidationError(f"R must be positive, got {R}")
    k_cap = _check_cap("k_cap", k_cap)
    j_cap = _check_cap("j_cap", j_cap)
    x1 = float(R) ** 2
    j_need = int(math.ceil(x1 + _BAND_WIDTH * math.sqrt(x1) + _BAND_PAD))
    j_use = j_need if j_cap is None else j_cap
    delta = 1e-6
    for _ in range(8):
        em, em2, k_explicit, neglected = _accumulate(eps, float(R), k_cap, j_use, delta)
        var = em2 - em * em
        value = math.fsum(var)
        k_total = k_cap if k_cap is not None else max(k_explicit, 1) * 10
        j_tail = _j_tail_bound(x1, j_use, k_total)
        bound = neglected + j_tail
        if value > 0 and bound <= REL_TAIL * value:
            lower = float(var[0])
            return NestedVariance(value, k_explicit, j_use, float(bound), lower)
        if j_tail > 0.5 * REL_TAIL * max(value, 0.0):
            j_use = max(j_use + 1, j_need, 2 * j_use)
        if neglected > 0.5 * REL_TAIL * max(value, 0.0):
            delta /= 100.0
    raise NumericalError(
        f"nested variance tail bound {bound:.3g} above {REL_TAIL:g} of the value {value:.6g}",
        achieved=bound / value if value > 0 else math.inf,
    )


def nested_variance_exact(eps: float, R: float, k_cap: int | None = None, j_cap: int | None = None) -> float:
    """``Var[sum_{k <= k_cap} n(R l_k D)]`` at native intensity ``1/pi``."""
    return nested_variance_report(eps, R, k_cap, j_cap).value


def nested_lower_bound(eps: float, R: float, k_cap: int | None = None) -> float:
    """``Var[sum_k 1{Z <= (R l_k)^2}]`` with ``Z ~ Exp(1)``, the ``j = 1`` term."""
    return nested_variance_report(eps, R, k_cap).lower_bound


def single_circle_variance(R: float) -> float:
    """``sum_j p_j (1 - p_j)`` with ``p_j = P(j, R^2)``: the disk count at native scale."""
    if not R > 0:
        raise ValidationError(f"R must be positive, got {R}")
    x = float(R) ** 2
    hi = int(math.ceil(x + _BAND_WIDTH * math.sqrt(x) + _BAND_PAD))
    j = np.arange(1, hi + 1, dtype=float)
    return math.fsum(gammainc_lower(j, x) * gammainc_upper(j, x))


def fit_loglog(radii: Sequence[float], variances: Sequence[float]) -> GrowthFit:
    """Least-squares line through ``(log R, log variance)``."""
    r = np.asarray(radii, dtype=float)
    v = np.asarray(variances, dtype=float)
    if r.size != v.size or r.size < 2:
        raise ValidationError("need matching radii and variances, at least two of each")
    if np.any(np.diff(r) <= 0) or r[0] <= 0:
        raise ValidationError("radii must be positive and strictly increasing")
    if np.any(~(v > 0)):
        raise ValidationError("variances must be positive")
    lx, ly = np.log(r), np.log(v)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return GrowthFit(tuple(r.tolist()), tuple(v.tolist()), float(slope), float(intercept), float(np.abs(resid).max()))


def growth_exponent(eps: float, R_list: Sequence[float], caps=None, require_decade: bool = True) -> GrowthFit:
    """Log-log slope of :func:`nested_variance_exact` over ``R_list``.

    ``caps`` is ``None``, a ``k_cap`` integer, or a ``(k_cap, j_cap)`` pair.
    At least four radii spanning a decade are required unless
    ``require_decade`` is false.
    """
    radii = [float(r) for r in R_list]
    if len(radii) < 4:
        raise ValidationError(f"need at least 4 radii, got {len(radii)}")
    if require_decade and radii[-1] < 10 * radii[0]:
        raise ValidationError("radii must span at least one decade")
    if caps is None:
        k_cap, j_cap = None, None
    elif isinstance(caps, (tuple, list)):
        k_cap, j_cap = caps
    else:
        k_cap, j_cap = caps, None
    variances = [nested_variance_exact(eps, r, k_cap, j_cap) for r in radii]
    return fit_loglog(radii, variances)
