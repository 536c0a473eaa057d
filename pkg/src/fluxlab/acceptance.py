"""Acceptance checks shared by the test suite and ``fluxlab verify``.

Each ``check_N`` returns a :class:`CheckResult`; none of them raises on a
numerical miss, so a failing criterion is reported rather than hidden.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .counterexample import growth_exponent
from .curve_analysis import signed_length, weak_ahlfors_estimate
from .curves import circle_curve, circle_segments, make_polyline, map_curve, reverse_curve, spiral_curve
from .errors import FluxlabError
from .models import hk_identity_check, make_model, radial_moment
from .monte_carlo import SamplerSpec, action_along, count_in_region, estimate_statistic, shoelace_area
from .sampler import ginibre_disk_moments_exact, sample_ginibre
from .variance_predict import (
    SignAnomalyWarning,
    pv_action_cov_quadrature,
    predict_count_variance,
    work_variance_2d,
    work_variance_radial,
)


@dataclass(frozen=True)
class CheckResult:
    number: str
    title: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.number:>3} {self.title}: {self.detail} [{self.seconds:.1f} s]"


def _timed(number, title, fn: Callable[[], tuple]):
    t0 = time.perf_counter()
    try:
        passed, detail = fn()
    except FluxlabError as exc:
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    return CheckResult(str(number), title, bool(passed), detail, time.perf_counter() - t0)


def _unit_circle(R):
    return circle_curve(0j, 1.0, circle_segments(1.0, R))


def check_1(fast=False):
    def run():
        errs = []
        for R in (1, 5, 20):
            mean, _ = ginibre_disk_moments_exact(R)
            errs.append(abs(mean - math.pi * R * R) / (math.pi * R * R))
        return max(errs) <= 1e-8, f"max relative error {max(errs):.2e}"

    return _timed(1, "Kostlan mean identity", run)


def check_2(fast=False):
    def run():
        model = make_model("ginibre")
        parts, ok = [], True
        for R, tol in ((100, 0.05), (400, 0.02)):
            _, var = ginibre_disk_moments_exact(R)
            pred = predict_count_variance(model, _unit_circle(R), R)
            ok &= abs(var / R - 1) <= tol and abs(pred / R - 1) <= 1e-4
            parts.append(f"R={R}: var/R={var / R:.6f} pred/R={pred / R:.6f}")
        return ok, "; ".join(parts)

    return _timed(2, "perimeter law", run)


def _count_check(sampler, reference, R=10.0, n=4000, seed=1):
    est = estimate_statistic(sampler, "count", circle_curve(0j, 1.0, circle_segments(1.0, R)), R, n, seed)
    z = est.z_score(reference)
    return abs(z) <= 3.0, f"variance {est.variance:.4f} vs {reference:.4f} (z = {z:+.2f}, stderr {est.stderr_of_variance:.3f})"


def check_3(fast=False):
    return _timed(
        3, "sampler fidelity", lambda: _count_check(SamplerSpec("ginibre"), ginibre_disk_moments_exact(10)[1])
    )


def check_4(fast=False):
    def run():
        ok, detail = _count_check(SamplerSpec("poisson", 1.0), 100 * math.pi)
        pred = predict_count_variance(make_model("poisson"), _unit_circle(10), 10)
        return ok and pred == 0.0, f"{detail}; predicted {pred}"

    return _timed(4, "Poisson control", run)


def check_5(fast=False):
    def run():
        model = make_model("ginibre")
        ok, parts = True, []
        for R in (25, 50):
            c = _unit_circle(R)
            res = pv_action_cov_quadrature(model, c, c, R)
            ex = res.extrapolants
            spread = abs(ex[-1] - ex[-2]) / abs(ex[-1])
            ratio = res.value / R
            ok &= abs(ratio / 4.0 - 1) <= 0.05 and spread < 0.01
            parts.append(f"R={R}: value/R={ratio:.5f} extrapolant spread {spread:.1e}")
        return ok, "; ".join(parts)

    return _timed(5, "covariance quadrature", run)


def check_6(fast=False):
    def run():
        model = make_model("ginibre")
        a = -4 * math.pi**2 * radial_moment(model, 2)
        lhs, rhs = hk_identity_check(model)
        b = -4 * math.pi**2 * rhs
        target = 1 / math.pi
        ea, eb = abs(a / target - 1), abs(b / target - 1)
        return max(ea, eb) <= 1e-6, f"moment side {a:.12f}, spectral side {b:.12f} (1/pi = {target:.12f})"

    return _timed(6, "h-k identity", run)


def check_7(fast=False):
    def run():
        square = make_polyline([0, 1, 1 + 1j, 1j], closed=True)
        star = make_polyline(
            [(1 + 0.4 * math.cos(5 * t)) * np.exp(1j * t) for t in np.linspace(0, 2 * math.pi, 37)[:-1]],
            closed=True,
        )
        zigzag = make_polyline([0, 1, 1.5 + 1j, 3 + 1j, 3.2 - 2j], closed=False)
        errs = []
        for c in (square, star, zigzag):
            errs.append(abs(signed_length(c, c) / c.length - 1))
            errs.append(abs(signed_length(c, reverse_curve(c)) / c.length + 1))
            big = map_curve(c, scale=7.5)
            errs.append(abs(signed_length(big, big) / (7.5 * signed_length(c, c)) - 1))
        # one edge traversed twice: its contribution goes from 1 to 4
        twice = make_polyline([0, 1, 1 + 1j, 1j, 0, 1], closed=False)
        errs.append(abs(signed_length(twice, twice) - signed_length(square, square) - 3) / 7)
        worst = max(errs)
        return worst <= 1e-12, f"max relative error {worst:.1e} over {len(errs)} identities"

    return _timed(7, "signed length", run)


def check_8(fast=False):
    def run():
        circ = weak_ahlfors_estimate(circle_curve(0j, 1.0, 256)).sup_ratio
        seg = weak_ahlfors_estimate(make_polyline([0, 1], closed=False)).sup_ratio
        spir = [weak_ahlfors_estimate(spiral_curve(0.1, k)).sup_ratio for k in (10, 100, 1000)]
        ok = circ <= 1.02 and abs(seg * math.pi - 1) <= 0.05 and spir[0] < spir[1] < spir[2]
        return ok, f"circle {circ:.5f}; segment {seg:.5f} (1/pi = {1 / math.pi:.5f}); spiral " + ", ".join(
            f"{s:.3f}" for s in spir
        )

    return _timed(8, "weak Ahlfors", run)


def check_9(fast=False):
    def run():
        radii = [100, 200, 400, 800, 1600]
        main = growth_exponent(0.5, radii)
        ctrl = growth_exponent(0.5, radii, caps=1)
        ok = main.slope >= 1.4 and 0.9 <= ctrl.slope <= 1.1
        return ok, f"nested slope {main.slope:.4f} (need >= 1.4); single-circle slope {ctrl.slope:.4f}"

    return _timed(9, "counterexample growth", run)


def check_10a(fast=False):
    def run():
        worst = 0.0
        for kind in ("ginibre", "gef"):
            model = make_model(kind)
            for a in (2, 5, 20, 100):
                r = work_variance_radial(model, a)
                d = work_variance_2d(model, a)
                worst = max(worst, abs(r - d) / abs(r))
        return worst <= 0.01, f"max relative disagreement {worst:.1e}"

    return _timed("10a", "work variance, two routes", run)


def fit_affine_log(radii, variances, stderrs):
    """Weighted fit ``v = alpha + beta log R``; returns ``(alpha, beta, residuals / stderr)``."""
    x = np.log(np.asarray(radii, dtype=float))
    v = np.asarray(variances, dtype=float)
    s = np.asarray(stderrs, dtype=float)
    m = np.column_stack([np.ones_like(x), x]) / s[:, None]
    coef, *_ = np.linalg.lstsq(m, v / s, rcond=None)
    resid = (v - (coef[0] + coef[1] * x)) / s
    return float(coef[0]), float(coef[1]), resid


def check_10b(fast=False):
    def run():
        n = 500 if fast else 4000
        seg = make_polyline([1, 2], closed=False)
        radii = [8, 16, 32, 64]
        ests = [estimate_statistic(SamplerSpec("ginibre"), "work", seg, R, n, 2024) for R in radii]
        var = [e.variance for e in ests]
        err = [e.stderr_of_variance for e in ests]
        _, slope, resid = fit_affine_log(radii, var, err)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SignAnomalyWarning)
            d = 2 * math.pi**2 * radial_moment(make_model("ginibre"), 3)
        ok = min(var) >= 0 and bool(np.all(np.abs(resid) < 3))
        values = ", ".join(f"{v:.4g}" for v in var)
        return ok, (
            f"n={n}, variances {values}; max |residual| {np.abs(resid).max():.1f} sigma; "
            f"fitted slope {slope:.4g} vs |D| = {abs(d):.4g} (D = {d:.4g})"
        )

    return _timed("10b", "work variance, Monte Carlo", run)


def check_11(fast=False):
    def run():
        curves = [
            map_curve(circle_curve(0.3 + 0.2j, 1.0, 200), scale=4.0),
            map_curve(make_polyline([0, 1, 1 + 1j, 1j], closed=True), scale=5.0, translation=-2 - 1j),
        ]
        worst_id, worst_work = 0.0, 0.0
        for seed in range(100):
            cfg = sample_ginibre(20.0, seed)
            for c in curves:
                act = action_along(cfg, c, 1.0, 20.0)
                n, area = count_in_region(cfg, c), shoelace_area(c)
                ref = 2j * math.pi * (n - area)
                # relative to the size of the two terms, since they may cancel
                scale = 2 * math.pi * (abs(n) + abs(area))
                worst_id = max(worst_id, abs(act - ref) / scale)
                worst_work = max(worst_work, abs(act.real) / scale)
        ok = worst_id <= 1e-10 and worst_work <= 1e-10
        return ok, f"argument principle {worst_id:.1e}; closed-curve work {worst_work:.1e}"

    return _timed(11, "per-sample identities", run)


CHECKS = (check_1, check_2, check_3, check_4, check_5, check_6, check_7, check_8, check_9, check_10a, check_10b, check_11)


def run_all(fast=False, out=None):
    """Run every check, printing one line per criterion as it finishes."""
    results = []
    for check in CHECKS:
        r = check(fast=fast)
        results.append(r)
        if out is not None:
            print(r.line(), file=out, flush=True)
    return results
