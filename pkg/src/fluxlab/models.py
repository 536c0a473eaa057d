"""Radial two-point functions and the constants derived from them.

A :class:`TwoPointModel` stores the truncated two-point density ``k(t)`` of a
rotation and translation invariant point process together with an intensity.
From it we derive the moments, the perimeter-law constant ``C``, the work
constant ``D``, the log-singular covariance kernel ``K`` and the radial
spectral density ``h``.

Conventions: ``K(s) = -4 pi^2 int_s^inf log(r/s) k(r) r dr`` and
``h(tau) = c + 2 pi int k(r) J0(2 pi r tau) r dr``. The Ginibre model uses
``k(t) = -exp(-pi t^2) / pi^2`` with intensity ``1/pi^2``, which is the
intensity that makes ``h(0) = 0`` for that ``k``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, special as sps
from scipy.interpolate import PchipInterpolator

from .errors import NumericalError, ValidationError
from .special import EULER_GAMMA, dilog_exp, ein, j0_minus_one

KINDS = ("ginibre", "gef", "poisson", "tabulated")

GEF_SERIES = (-1.0, 1.0, 0.0, -2.0 / 9.0, 0.0, 2.0 / 45.0, 0.0, -4.0 / 525.0)
GEF_SERIES_SWITCH = 0.05


@dataclass(frozen=True, eq=False)
class TwoPointModel:
    name: str
    intensity: float
    k: Callable = field(repr=False)
    tail_cutoff: float
    small_t_series: Optional[tuple] = None
    kind: str = "tabulated"
    provisional: bool = False
    grid: Optional[np.ndarray] = field(default=None, repr=False)

    def __call__(self, t):
        return self.k(t)

    def describe(self) -> dict:
        d = {
            "name": self.name,
            "kind": self.kind,
            "intensity": self.intensity,
            "tail_cutoff": self.tail_cutoff,
            "provisional": self.provisional,
        }
        if self.grid is not None:
            d["grid_points"] = int(self.grid.size)
        return d


def _k_ginibre(t):
    t = np.asarray(t, dtype=float)
    return -np.exp(-np.pi * t * t) / np.pi**2


def _k_gef(t):
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    small = t < GEF_SERIES_SWITCH
    ts = t[small]
    out[small] = np.polynomial.polynomial.polyval(ts, GEF_SERIES)
    tl = t[~small]
    with np.errstate(over="ignore"):
        g = 2.0 / np.expm1(2.0 * tl)  # coth t - 1
    q = g * (2.0 + g)  # coth^2 t - 1
    out[~small] = g - 2.0 * tl * q + tl * tl * (1.0 + g) * q
    return out if out.ndim else float(out)


def gef_profile(t):
    """The GEF profile ``f(t) = t^2 (coth t - 1) / 2``, with ``k = f''``."""
    t = np.asarray(t, dtype=float)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        g = 2.0 / np.expm1(2.0 * t)
        f = 0.5 * t * t * g
    # t * g -> 1 as t -> 0
    small = t < 1e-8
    f = np.where(small, 0.5 * t, f)
    return f if f.ndim else float(f)


def _k_zero(t):
    t = np.asarray(t, dtype=float)
    z = np.zeros_like(t)
    return z if z.ndim else 0.0


def make_model(kind: str, **params) -> TwoPointModel:
    """Build a model.

    ``ginibre`` and ``gef`` take no parameters, ``poisson`` takes
    ``intensity`` (default 1), and ``tabulated`` takes ``t``, ``k``,
    ``intensity`` and optionally ``name``.
    """
    if kind == "ginibre":
        return TwoPointModel(
            name="ginibre",
            intensity=1.0 / np.pi**2,
            k=_k_ginibre,
            tail_cutoff=3.5,
            kind="ginibre",
        )
    if kind == "gef":
        # the closed-form k integrates to zero against t dt, so no intensity
        # satisfies the sum rule; see sum_rule_defect
        return TwoPointModel(
            name="gef",
            intensity=float(params.get("intensity", 1.0)),
            k=_k_gef,
            tail_cutoff=25.0,
            small_t_series=GEF_SERIES,
            kind="gef",
            provisional=True,
        )
    if kind == "poisson":
        c = float(params.get("intensity", 1.0))
        if not c > 0:
            raise ValidationError(f"intensity must be positive, got {c}")
        return TwoPointModel(name="poisson", intensity=c, k=_k_zero, tail_cutoff=0.0, kind="poisson")
    if kind == "tabulated":
        return _make_tabulated(**params)
    raise ValidationError(f"unknown model kind {kind!r}; expected one of {', '.join(KINDS)}")


def _make_tabulated(t: Sequence[float] = None, k: Sequence[float] = None, intensity=None,
                    name: str = "tabulated", cutoff=None) -> TwoPointModel:
    if t is None or k is None:
        raise ValidationError("tabulated model needs both t and k arrays")
    if intensity is None:
        raise ValidationError("tabulated model needs an intensity")
    intensity = float(intensity)
    if not intensity > 0:
        raise ValidationError(f"intensity must be positive, got {intensity}")
    t = np.asarray(t, dtype=float)
    kv = np.asarray(k, dtype=float)
    if t.ndim != 1 or t.shape != kv.shape or t.size < 2:
        raise ValidationError("t and k must be 1-D arrays of equal length >= 2")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(kv))):
        raise ValidationError("t and k must be finite")
    steps = np.flatnonzero(np.diff(t) <= 0)
    if steps.size:
        raise ValidationError(f"abscissa grid must be strictly increasing; fails at index {steps[0] + 1}")
    if t[0] < 0:
        raise ValidationError("abscissa grid must be nonnegative")
    interp = PchipInterpolator(t, kv, extrapolate=True)
    t_last = float(t[-1])
    if cutoff is not None and float(cutoff) < t_last:
        t_last = float(cutoff)

    def k_tab(x):
        x = np.asarray(x, dtype=float)
        y = np.where(x <= t_last, interp(np.clip(x, 0.0, t_last)), 0.0)
        return y if y.ndim else float(y)

    grid = t[t <= t_last]
    if grid[-1] != t_last:
        grid = np.append(grid, t_last)
    grid.setflags(write=False)
    return TwoPointModel(
        name=str(name), intensity=intensity, k=k_tab, tail_cutoff=t_last, kind="tabulated", grid=grid
    )


# ---------------------------------------------------------------- integration

_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


def _gauss_panels(f, edges):
    """Composite 12-point Gauss-Legendre over consecutive ``edges``."""
    a = edges[:-1, None]
    h = (edges[1:] - edges[:-1])[:, None]
    x = a + 0.5 * h * (_GL_X + 1.0)
    return (0.5 * h * _GL_W * f(x)).sum(axis=1)


def _breakpoints(model, lo, hi):
    if model.kind == "tabulated":
        g = model.grid
        inner = g[(g > lo) & (g < hi)]
        pts = np.concatenate([[lo], inner, [hi]])
        # split each grid cell in two: the log weights are not polynomial
        mids = 0.5 * (pts[:-1] + pts[1:])
        out = np.empty(pts.size + mids.size)
        out[0::2] = pts
        out[1::2] = mids
        return out
    if model.kind == "gef":
        base = np.array([0.0, GEF_SERIES_SWITCH, 0.5, 1, 2, 4, 8, 12, 16, 20, 25.0])
    else:
        base = np.linspace(0.0, model.tail_cutoff, 8)
    inner = base[(base > lo) & (base < hi)]
    return np.concatenate([[lo], inner, [hi]])


def _integrate(model, weight, lo, hi, rtol=1e-10, what="integral"):
    """Integrate ``k(r) * weight(r)`` over ``[lo, hi]``.

    Analytic models use adaptive quadrature per breakpoint interval; tabulated
    models use composite Gauss on the interpolation cells.
    """
    if hi <= lo or model.kind == "poisson":
        return 0.0
    pts = _breakpoints(model, lo, hi)
    if model.kind == "tabulated":
        return float(np.sum(_gauss_panels(lambda r: model.k(r) * weight(r), pts)))
    total = 0.0
    err = 0.0
    mag = 0.0
    f = lambda r: float(model.k(r)) * weight(r)
    for a, b in zip(pts[:-1], pts[1:]):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            v, e = integrate.quad(f, a, b, epsabs=1e-300, epsrel=rtol * 0.1, limit=200)
        total += v
        err += e
        mag += abs(v)
    # cancellation between intervals (an exactly vanishing moment) is judged
    # against the interval magnitudes
    if err > rtol * max(abs(total), mag) + 1e-300:
        raise NumericalError(f"{what} did not converge (error estimate {err:.3g})", achieved=err)
    return total


def radial_moment(model: TwoPointModel, p: int) -> float:
    """``int_0^T k(t) t^p dt`` for ``p`` in 0..4."""
    if int(p) != p or not 0 <= p <= 4:
        raise ValidationError(f"moment order must be an integer in 0..4, got {p}")
    p = int(p)
    return _integrate(model, lambda t: t**p, 0.0, model.tail_cutoff, what=f"moment {p}")


def c_lambda(model: TwoPointModel) -> float:
    """Perimeter-law constant ``-8 pi^2 int k t^2 dt``."""
    return -8.0 * np.pi**2 * radial_moment(model, 2)


def d_lambda(model: TwoPointModel) -> float:
    """Work-variance constant ``2 pi^2 int k t^3 dt`` (negative for Ginibre)."""
    return 2.0 * np.pi**2 * radial_moment(model, 3)


def log_coefficient(model: TwoPointModel) -> float:
    """Coefficient ``c0`` in ``K(s) = -c0 log s + O(1)`` as ``s -> 0``."""
    if model.kind == "ginibre":
        return 2.0 / np.pi
    if model.kind in ("gef", "poisson"):
        return 0.0
    return -4.0 * np.pi**2 * radial_moment(model, 1)


def sum_rule_defect(model: TwoPointModel) -> float:
    """``h(0) = c + 2 pi int k t dt``; zero for hyperuniform models."""
    return model.intensity + 2.0 * np.pi * radial_moment(model, 1)


# --------------------------------------------------------------- kernel K


def _kernel_quad(model, s):
    T = model.tail_cutoff
    if s >= T:
        return 0.0
    ls = math.log(s)
    val = _integrate(model, lambda r: (np.log(r) - ls) * r, s, T, rtol=1e-9, what="kernel K")
    return -4.0 * np.pi**2 * val


def _kernel_ginibre(s):
    s = np.asarray(s, dtype=float)
    with np.errstate(over="ignore"):
        v = sps.exp1(np.pi * s * s) / np.pi
    return np.where(s < 3.5, v, 0.0)


def _kernel_gef(s):
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_term = np.where(s > 0, 0.5 * s * np.log(-np.expm1(-2.0 * s)), 0.0)
    v = -4.0 * np.pi**2 * (gef_profile(s) - log_term + 0.25 * dilog_exp(s))
    return np.where(s < 25.0, v, 0.0)


def kernel_K(model: TwoPointModel, s, method: str = "auto"):
    """Covariance kernel ``K(s)``, vectorized over ``s > 0``.

    ``method='quad'`` forces adaptive quadrature of the defining log-weighted
    integral; ``'auto'`` uses closed forms for Ginibre and GEF.
    """
    arr = np.asarray(s, dtype=float)
    if np.any(~(arr > 0)):
        raise ValidationError("kernel_K needs s > 0")
    if method not in ("auto", "quad", "closed"):
        raise ValidationError(f"unknown method {method!r}")
    if model.kind == "poisson":
        out = np.zeros_like(arr)
    elif method != "quad" and model.kind == "ginibre":
        out = _kernel_ginibre(arr)
    elif method != "quad" and model.kind == "gef":
        out = _kernel_gef(arr)
    elif method == "closed":
        raise ValidationError(f"no closed form kernel for model {model.name!r}")
    else:
        out = np.vectorize(lambda x: _kernel_quad(model, x), otypes=[float])(arr)
    return out if out.ndim else float(out)


class KernelEvaluator:
    """Fast vectorized ``K`` and its regular part ``K(s) + c0 log s``.

    Closed forms are used where available; other models are tabulated once by
    cumulative Gauss integration and interpolated.
    """

    def __init__(self, model: TwoPointModel):
        self.model = model
        self.cutoff = float(model.tail_cutoff)
        self.c0 = log_coefficient(model)
        self._table = None
        if model.kind == "tabulated":
            self._build_table()

    def _build_table(self):
        m = self.model
        T = self.cutoff
        base = np.unique(np.concatenate([m.grid, np.linspace(0.0, T, 4001)]))
        base = base[base > 0]
        edges = np.concatenate([[0.0], base])
        # split the first cell geometrically to resolve r log r
        first = edges[1] * np.geomspace(1e-12, 1.0, 40)
        edges = np.concatenate([[0.0], first, edges[2:]])
        a = np.concatenate([[0.0], np.cumsum(_gauss_panels(lambda r: m.k(r) * r, edges))])
        b = np.concatenate(
            [[0.0], np.cumsum(_gauss_panels(lambda r: m.k(r) * r * np.log(np.maximum(r, 1e-300)), edges))]
        )
        s = edges[1:]
        a, b = a[1:], b[1:]
        kreg = -4.0 * np.pi**2 * ((b[-1] - b) + np.log(s) * a)
        s = np.concatenate([[0.0], s])
        kreg = np.concatenate([[-4.0 * np.pi**2 * b[-1]], kreg])
        self._table = PchipInterpolator(s, kreg, extrapolate=False)

    def regular(self, s):
        """``K(s) + c0 log s``, bounded near ``s = 0``; valid for ``s < cutoff``."""
        s = np.asarray(s, dtype=float)
        kind = self.model.kind
        if kind == "ginibre":
            x = np.pi * s * s
            return (ein(x) - EULER_GAMMA - math.log(np.pi)) / np.pi
        if kind == "gef":
            s_safe = np.maximum(s, 1e-300)
            return _kernel_gef(s_safe)
        if kind == "poisson":
            return np.zeros_like(s)
        return self._table(np.clip(s, 0.0, self.cutoff))

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        kind = self.model.kind
        if kind == "ginibre":
            return _kernel_ginibre(s)
        if kind == "gef":
            return _kernel_gef(s)
        if kind == "poisson":
            return np.zeros_like(s)
        with np.errstate(divide="ignore"):
            v = self.regular(s) - self.c0 * np.log(s)
        return np.where(s < self.cutoff, v, 0.0)


# ----------------------------------------------------------- spectral side

_GL6_X, _GL6_W = np.polynomial.legendre.leggauss(6)


def _radial_nodes(model, tau_max, level):
    """Quadrature nodes on ``[0, T]`` resolving ``J0(2 pi r tau)`` up to ``tau_max``."""
    T = model.tail_cutoff
    width = min(0.5, 0.25 / (tau_max + 1.0)) / 2**level
    if model.kind == "tabulated":
        cells = model.grid
        if cells[0] > 0:
            cells = np.concatenate([[0.0], cells])
        # subdivide cells wider than the oscillation scale
        parts = np.maximum(1, np.ceil(np.diff(cells) / width).astype(int))
        edges = np.concatenate(
            [np.linspace(a, b, m, endpoint=False) for a, b, m in zip(cells[:-1], cells[1:], parts)]
            + [[cells[-1]]]
        )
        gx, gw = _GL6_X, _GL6_W
    else:
        edges = np.linspace(0.0, T, int(math.ceil(T / width)) + 1)
        gx, gw = _GL_X, _GL_W
    h = np.diff(edges)[:, None]
    x = (edges[:-1, None] + 0.5 * h * (gx + 1.0)).ravel()
    w = (0.5 * h * gw).ravel()
    return x, w


def _hankel_part(model, taus, level):
    """``2 pi int k(r) r (J0(2 pi r tau) - 1) dr`` for each tau."""
    x, w = _radial_nodes(model, float(taus.max()), level)
    kr = model.k(x) * x * w
    out = np.empty(taus.size)
    step = max(1, int(2e7 // x.size))
    for i in range(0, taus.size, step):
        arg = 2.0 * np.pi * np.outer(taus[i:i + step], x)
        out[i:i + step] = 2.0 * np.pi * (j0_minus_one(arg) @ kr)
    return out


def _h_converged(model, taus, rtol):
    defect = sum_rule_defect(model)
    prev = _hankel_part(model, taus, 0)
    for level in range(1, 6):
        cur = _hankel_part(model, taus, level)
        scale = np.abs(defect + cur) + model.intensity * 1e-6
        if np.all(np.abs(cur - prev) <= rtol * scale + 1e-15):
            return defect + cur
        prev = cur
    raise NumericalError("spectral density did not converge", achieved=float(np.max(np.abs(cur - prev))))


def spectral_density(model: TwoPointModel, tau, rtol: float = 1e-8):
    """Radial spectral density ``h(tau)``, vectorized over ``tau >= 0``.

    The radial mesh is refined until two successive levels agree.
    """
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    if np.any(~(taus >= 0)):
        raise ValidationError("spectral_density needs tau >= 0")
    if model.kind == "poisson":
        out = np.full_like(taus, model.intensity)
    else:
        out = _h_converged(model, taus, rtol)
    return out if np.ndim(tau) else float(out[0])


def hk_identity_check(model: TwoPointModel, tau_max: float = 40.0, panels: int = 8):
    """Both sides of ``int k t^2 dt = -(1/4 pi^2) int h(tau) tau^-2 dtau``.

    Requires ``|h(0)| <= 1e-6`` (the tau-integral diverges otherwise). The
    tau-integral is split at 1; beyond ``tau_max`` only the constant part
    ``c / tau^2`` of the integrand is kept.
    """
    defect = sum_rule_defect(model)
    if model.provisional or abs(defect) > 1e-6:
        raise ValidationError(
            f"h-k identity needs h(0) = 0, but h(0) = {defect:.6g} for model {model.name!r}"
        )
    lhs = radial_moment(model, 2)
    c = model.intensity

    def tau_integral(n):
        low = np.linspace(0.0, 1.0, n // 4 + 1)
        high = np.geomspace(1.0, tau_max, n + 1)
        xl = (low[:-1, None] + 0.5 * np.diff(low)[:, None] * (_GL_X + 1.0)).ravel()
        wl = (0.5 * np.diff(low)[:, None] * _GL_W).ravel()
        xh = (high[:-1, None] + 0.5 * np.diff(high)[:, None] * (_GL_X + 1.0)).ravel()
        wh = (0.5 * np.diff(high)[:, None] * _GL_W).ravel()
        hl = spectral_density(model, xl, rtol=1e-10)
        hh = spectral_density(model, xh, rtol=1e-10)
        return np.sum(wl * hl / xl**2) + np.sum(wh * (hh - c) / xh**2) + c

    coarse = tau_integral(panels)
    fine = tau_integral(2 * panels)
    if abs(fine - coarse) > 1e-8 * abs(fine):
        raise NumericalError("h-k identity quadrature did not converge", achieved=abs(fine - coarse))
    rhs = -fine / (4.0 * np.pi**2)
    return lhs, rhs
