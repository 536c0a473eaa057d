"""Variance predictions and direct evaluation of the covariance integrals.

``predict_*`` give the leading-order asymptotics. ``pv_action_cov_quadrature``
evaluates the principal-value double integral of the kernel ``K`` over a pair
of dilated polylines, and ``work_variance_radial`` / ``work_variance_2d``
evaluate the work variance between two points at distance ``a`` by two
independent routes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate

from . import _panels as P
from .curve_analysis import signed_length
from .curves import Curve, map_curve, point_set_diameter
from .errors import NumericalError, ValidationError
from .models import KernelEvaluator, TwoPointModel, c_lambda, d_lambda


class SignAnomalyWarning(UserWarning):
    """A variance formula produced a negative value."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Settings for the principal-value quadrature.

    ``epsilon_schedule`` lists exclusion radii in units of the dilated
    curve's diameter (``None`` means ``2**-k`` for ``k = 6..14``).
    ``panel_length`` caps the panel size in kernel units.
    """

    epsilon_schedule: Optional[Sequence[float]] = None
    panels_per_edge: int = 1
    richardson: bool = True
    abs_tol: float = 0.05
    panel_length: float = 0.5

    def __post_init__(self):
        if self.epsilon_schedule is not None:
            e = np.asarray(self.epsilon_schedule, dtype=float)
            if e.ndim != 1 or e.size < 1 or np.any(~(e > 0)) or np.any(np.diff(e) >= 0):
                raise ValidationError("epsilon_schedule must be positive and strictly decreasing")
            if self.richardson and e.size < 4:
                raise ValidationError("Richardson extrapolation needs at least 4 schedule levels")
            object.__setattr__(self, "epsilon_schedule", tuple(float(x) for x in e))
        if int(self.panels_per_edge) != self.panels_per_edge or self.panels_per_edge < 1:
            raise ValidationError("panels_per_edge must be an integer >= 1")
        if not self.abs_tol > 0:
            raise ValidationError("abs_tol must be positive")
        if not self.panel_length > 0:
            raise ValidationError("panel_length must be positive")

    def epsilons(self, diameter: float) -> np.ndarray:
        rel = self.epsilon_schedule
        if rel is None:
            rel = [2.0 ** -k for k in range(6, 15)]
        return diameter * np.asarray(rel, dtype=float)


@dataclass(frozen=True)
class PVResult:
    value: float
    error: float
    complex_value: complex
    epsilons: tuple = field(repr=False)
    level_values: tuple = field(repr=False)
    extrapolants: tuple = field(repr=False)

    def __float__(self):
        return self.value


# --------------------------------------------------------------- predictions


def predict_action_cov(model: TwoPointModel, curve1: Curve, curve2: Curve, R: float) -> float:
    """Leading term ``R * C * L(curve1, curve2)``."""
    if not R > 0:
        raise ValidationError(f"R must be positive, got {R}")
    return R * c_lambda(model) * signed_length(curve1, curve2)


def predict_count_variance(model: TwoPointModel, closed_curve: Curve, R: float) -> float:
    """Perimeter law ``R * C * length / 4`` for the domain bounded by the curve."""
    if not closed_curve.closed:
        raise ValidationError("count variance needs a closed curve")
    if not R > 0:
        raise ValidationError(f"R must be positive, got {R}")
    return 0.25 * R * c_lambda(model) * closed_curve.length


def predict_work_variance(model: TwoPointModel, R: float) -> float:
    """``D * log R``; warns when ``D < 0``."""
    if not R >= 1:
        raise ValidationError(f"R must be >= 1, got {R}")
    d = d_lambda(model)
    if d < 0:
        warnings.warn(
            f"work constant is negative ({d:.6g}) for model {model.name!r}; reported as computed",
            SignAnomalyWarning,
            stacklevel=2,
        )
    return d * math.log(R)


# ----------------------------------------------------- principal-value quadrature


def _richardson(eps, vals):
    """Fit ``I + A eps log eps + B eps`` through three levels; return ``I``."""
    e = np.asarray(eps, dtype=float)
    m = np.column_stack([np.ones(3), e * np.log(e), e])
    return complex(np.linalg.solve(m, np.asarray(vals, dtype=complex))[0])


def _chunks(n, size):
    for i in range(0, n, size):
        yield np.arange(i, min(i + size, n))


def pv_action_cov_quadrature(
    model: TwoPointModel,
    curve1: Curve,
    curve2: Curve,
    R: float,
    spec: Optional[QuadratureSpec] = None,
) -> PVResult:
    """``p.v. int int_{R curve1 x R curve2} K(|x - y|) dx dy_bar``.

    For each exclusion radius ``eps`` the integral over ``|x - y| > eps`` is
    formed as the full integral minus the integral over ``|x - y| < eps``;
    both are computed panel pair by panel pair with the logarithmic part of
    the kernel integrated in closed form. The level values are then
    extrapolated to ``eps = 0``. The returned ``error`` is the difference of
    the last two extrapolants (or of the last two levels without
    extrapolation); a :class:`NumericalError` is raised when it exceeds
    ``spec.abs_tol``.
    """
    if spec is None:
        spec = QuadratureSpec()
    if not R > 0:
        raise ValidationError(f"R must be positive, got {R}")
    c1 = map_curve(curve1, scale=R)
    c2 = map_curve(curve2, scale=R)
    both = np.concatenate([c1.vertices, c2.vertices])

    eps = spec.epsilons(point_set_diameter(both))
    ker = KernelEvaluator(model)
    if model.kind == "poisson" or ker.cutoff <= 0:
        zeros = tuple(0j for _ in eps)
        return PVResult(0.0, 0.0, 0j, tuple(eps), zeros, ())

    plen = min(spec.panel_length, ker.cutoff / 4.0)
    p1 = P.Panels(*c1.edges(), plen, spec.panels_per_edge)
    p2 = P.Panels(*c2.edges(), plen, spec.panels_per_edge)
    reach = max(ker.cutoff, float(eps[0]))
    i, j = P.find_pairs(p1, p2, reach)
    g_all = P.PairGeometry(p1.a[i], p1.u[i], p1.h[i], p2.a[j], p2.u[j], p2.h[j])
    dist, s_star = P.segment_distance(g_all.a1, g_all.u1, g_all.h1, g_all.a2, g_all.u2, g_all.h2)
    dmax = P.segment_max_distance(p1.a[i], p1.b[i], p2.a[j], p2.b[j])
    hmax = np.maximum(g_all.h1, g_all.h2)
    in_support = dist < ker.cutoff
    near = in_support & (dist < 2.0 * hmax)
    far = in_support & ~near

    # full integral of every pair; pairs beyond the kernel support stay 0
    pair_full = np.zeros(dist.size, dtype=complex)
    idx = np.flatnonzero(far)
    for c in _chunks(idx.size, 20000):
        pair_full[idx[c]] = P.far_pair_sum(ker, g_all.take(idx[c]))
    idx = np.flatnonzero(near)
    for c in _chunks(idx.size, 2000):
        pair_full[idx[c]] = P.near_pair_sum(ker, g_all.take(idx[c]), s_star[idx[c]])
    order = np.argsort(dmax, kind="stable")
    cum = np.concatenate([[0j], np.cumsum(pair_full[order])])
    full = cum[-1]

    levels = []
    for e in eps:
        # pairs entirely within distance eps are excluded whole; straddling pairs are clipped
        n_inside = int(np.searchsorted(dmax[order], e, side="left"))
        excl = cum[n_inside]
        straddle = np.flatnonzero((dist < e) & (dmax >= e))
        for c in _chunks(straddle.size, 4000):
            excl += np.sum(P.exclusion_sum(ker, g_all.take(straddle[c]), float(e)))
        levels.append(full - excl)

    if spec.richardson:
        ex = [_richardson(eps[k:k + 3], levels[k:k + 3]) for k in range(len(eps) - 2)]
        value = ex[-1]
        error = abs(ex[-1] - ex[-2])
    else:
        ex = []
        value = levels[-1]
        error = abs(levels[-1] - levels[-2]) if len(levels) > 1 else float("inf")
    if not error <= spec.abs_tol:
        diffs = ", ".join(f"{abs(b - a):.3g}" for a, b in zip(levels[:-1], levels[1:]))
        raise NumericalError(
            f"principal value did not settle: error {error:.3g} > {spec.abs_tol} (level differences {diffs})",
            achieved=error,
        )
    return PVResult(float(value.real), float(error), complex(value), tuple(eps), tuple(levels), tuple(ex))


# ------------------------------------------------------------- work variance


def work_variance_radial(model: TwoPointModel, a: float) -> float:
    """``-2 int_0^a K(r) log(a/r) r dr`` by adaptive quadrature."""
    a = abs(a)
    if not a > 0:
        raise ValidationError("a must be nonzero")
    T = model.tail_cutoff
    if model.kind == "poisson" or T <= 0:
        return 0.0
    top = min(a, T)
    ker = KernelEvaluator(model)
    la = math.log(a)

    def f(r):
        return float(ker(r)) * (la - math.log(r)) * r

    pts = [0.0] + [x for x in (1e-3, 0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0) if x < top] + [top]
    total = 0.0
    err = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for lo, hi in zip(pts[:-1], pts[1:]):
            v, e = integrate.quad(f, lo, hi, epsabs=1e-14, epsrel=1e-11, limit=200)
            total += v
            err += e
    if err > 1e-8 * abs(total) + 1e-13:
        raise NumericalError("radial work-variance quadrature did not converge", achieved=err)
    return -2.0 * total


def _phi_angular_mean_analytic(r, a):
    # mean over |s| = r of 2 log|s| - log|s - a| - log|s + a|
    return 2.0 * np.log(r) - 2.0 * np.log(np.maximum(r, abs(a)))


def _phi_angular_mean_numeric(r, a, n_theta):
    theta = 2.0 * np.pi * (np.arange(n_theta) + 0.5) / n_theta
    s = r[:, None] * np.exp(1j * theta)[None, :]
    phi = 2.0 * np.log(np.abs(s)) - np.log(np.abs(s - a)) - np.log(np.abs(s + a))
    return phi.mean(axis=1)


def work_variance_2d(model: TwoPointModel, a, spec=None, angular: str = "analytic",
                     n_theta: int = 512, n_radial: int = 24) -> float:
    """``(1/2 pi) int K(|s|) Phi(s) dm(s)`` with ``Phi = 2 log|s| - log|s-a| - log|s+a|``.

    Polar coordinates on composite Gauss-Legendre panels in ``log r``. The
    angular mean of ``Phi`` is exact in ``'analytic'`` mode and a midpoint
    rule over ``n_theta`` angles in ``'numeric'`` mode (``a`` may then be any
    nonzero complex number).
    """
    a = complex(a)
    if a == 0:
        raise ValidationError("a must be nonzero")
    if angular not in ("analytic", "numeric"):
        raise ValidationError(f"angular must be 'analytic' or 'numeric', got {angular!r}")
    T = model.tail_cutoff
    if model.kind == "poisson" or T <= 0:
        return 0.0
    ker = KernelEvaluator(model)
    aa = abs(a)
    r_lo = min(1e-12, aa * 1e-12)
    # panels uniform in log r, with a break at |a| so the kink is a panel edge
    cuts = [r_lo, T]
    if aa < T:
        cuts.insert(1, aa)
    edges = np.unique(np.concatenate([np.geomspace(lo, hi, n_radial + 1) for lo, hi in zip(cuts[:-1], cuts[1:])]))
    x, w = P.gauss(16)
    lo, hi = np.log(edges[:-1]), np.log(edges[1:])
    lr = (lo[:, None] + (hi - lo)[:, None] * x).ravel()
    wl = ((hi - lo)[:, None] * w).ravel()
    r = np.exp(lr)
    if angular == "analytic":
        mean_phi = _phi_angular_mean_analytic(r, aa)
    else:
        mean_phi = np.empty_like(r)
        for c in _chunks(r.size, 256):
            mean_phi[c] = _phi_angular_mean_numeric(r[c], a, int(n_theta))
    # dm = r dr dtheta = r^2 dlog r dtheta; the angular integral is 2 pi * mean
    integrand = ker(r) * mean_phi * r * r
    return float(np.sum(wl * integrand))
