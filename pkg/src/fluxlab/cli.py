"""Command line interface: ``fluxlab <subcommand> [flags]``.

Exit status is 0 on success, 2 on invalid input and 3 when a numerical
method fails to reach its tolerance. ``verify`` exits 1 if any acceptance
check fails.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .acceptance import run_all
from .counterexample import fit_loglog, nested_variance_report
from .curve_analysis import signed_length, weak_ahlfors_estimate
from .curves import (
    Curve,
    circle_curve,
    circle_segments,
    make_polyline,
    nested_circles_curve,
    spiral_curve,
)
from .errors import NumericalError, ValidationError
from .io import config_to_csv, load_curve, load_tabulated_model
from .models import (
    c_lambda,
    d_lambda,
    hk_identity_check,
    log_coefficient,
    make_model,
    sum_rule_defect,
)
from .monte_carlo import STATISTICS, SamplerSpec, default_threads, estimate_statistic
from .sampler import sample_ginibre, sample_poisson
from .svg import Series, plot
from .variance_predict import (
    QuadratureSpec,
    SignAnomalyWarning,
    predict_action_cov,
    predict_count_variance,
    predict_work_variance,
    pv_action_cov_quadrature,
    work_variance_2d,
    work_variance_radial,
)

# relative tolerance of the quadratures behind the model constants
CONSTANT_RTOL = 1e-10


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationError(f"{self.prog}: {message}")


# ------------------------------------------------------------------ parsing


def parse_radii(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"could not parse radii {text!r}") from None
    if not vals:
        raise ValidationError("empty radius list")
    if any(not v > 0 for v in vals):
        raise ValidationError("radii must be positive")
    return vals


def resolve_curve(spec: str, dilation: float = 1.0) -> Curve:
    """Builtin name (``circle``, ``square``, ``segment``, ``spiral:eps,k``,
    ``nested:eps,k``, optionally prefixed by ``builtin:``) or a file path."""
    name = spec[len("builtin:"):] if spec.startswith("builtin:") else spec
    head, _, arg = name.partition(":")
    if head == "circle" and not arg:
        return circle_curve(0j, 1.0, circle_segments(1.0, dilation))
    if head == "square" and not arg:
        return make_polyline([-0.5 - 0.5j, 0.5 - 0.5j, 0.5 + 0.5j, -0.5 + 0.5j], closed=True)
    if head == "segment" and not arg:
        return make_polyline([1, 2], closed=False)
    if head in ("spiral", "nested"):
        try:
            eps_s, k_s = arg.split(",")
            eps, k = float(eps_s), int(k_s)
        except ValueError:
            raise ValidationError(f"expected {head}:eps,k, got {spec!r}") from None
        return spiral_curve(eps, k) if head == "spiral" else nested_circles_curve(eps, k)
    if spec.startswith("builtin:"):
        raise ValidationError(f"unknown builtin curve {spec!r}")
    return load_curve(spec)


def resolve_model(args):
    if args.model == "tabulated":
        if not args.table:
            raise ValidationError("--model tabulated needs --table")
        return load_tabulated_model(args.table)
    if args.model == "poisson":
        return make_model("poisson", intensity=args.intensity)
    return make_model(args.model)


def _radius_list(args):
    if args.radii:
        return parse_radii(args.radii)
    if args.R is not None:
        if not args.R > 0:
            raise ValidationError("--R must be positive")
        return [float(args.R)]
    raise ValidationError("give --R or --radii")


# ------------------------------------------------------------------- output


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if isinstance(x, complex):
        return f"{format(x.real, '.17g')}{'+' if x.imag >= 0 else '-'}{format(abs(x.imag), '.17g')}j"
    return str(x)


def _config(args) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    return cfg


def _header(args, extra=()):
    lines = [f"# fluxlab {__version__} {args.command}", "# config " + json.dumps(_config(args), sort_keys=True)]
    lines += [f"# {x}" for x in extra]
    return lines


def emit(args, columns, rows, extra=(), svg=None, json_obj=None):
    """Write rows as CSV (or JSON), plus an SVG when ``--format svg+csv``."""
    fmt = getattr(args, "format", "csv")
    if fmt == "json":
        payload = {
            "version": __version__,
            "command": args.command,
            "config": _config(args),
            "notes": list(extra),
            "rows": [dict(zip(columns, [_jsonable(v) for v in r])) for r in rows],
        }
        if json_obj is not None:
            payload["result"] = json_obj
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        out = _header(args, extra) + [",".join(columns)]
        out += [",".join(_fmt(v) for v in r) for r in rows]
        text = "\n".join(out) + "\n"
    if fmt == "svg+csv":
        if not args.out:
            raise ValidationError("--format svg+csv needs --out")
        base = Path(args.out)
        base.with_suffix(".csv").write_text(text)
        if svg is not None:
            base.with_suffix(".svg").write_text(svg)
        return
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


# -------------------------------------------------------------- subcommands


def cmd_model_info(args):
    model = resolve_model(args)
    c = c_lambda(model)
    d = d_lambda(model)
    try:
        lhs, rhs = hk_identity_check(model)
        hk = abs(lhs - rhs)
        note = "h-k identity checked"
    except ValidationError as exc:
        hk = float("nan")
        note = f"h-k identity not applicable: {exc}"
    rows = [[model.name, model.intensity, c, d, log_coefficient(model), sum_rule_defect(model), hk,
             CONSTANT_RTOL, model.provisional]]
    cols = ["model", "intensity", "C", "D", "c0", "sum_rule_defect", "hk_residual", "rel_tol", "provisional"]
    emit(args, cols, rows, extra=[note, json.dumps(model.describe(), sort_keys=True)])


def cmd_sample(args):
    if args.model == "ginibre":
        cfg = sample_ginibre(args.R, args.seed)
    elif args.model == "poisson":
        cfg = sample_poisson(args.intensity, args.R, args.seed)
    else:
        raise ValidationError("sample supports --model ginibre or poisson")
    if args.format == "json":
        text = json.dumps({"header": cfg.header, "points": [[z.real, z.imag] for z in cfg.points]}) + "\n"
    else:
        text = "\n".join(_header(args)) + "\n" + config_to_csv(cfg)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_ahlfors(args):
    curve = resolve_curve(args.curve)
    rep = weak_ahlfors_estimate(curve, center_grid=args.grid)
    z = complex(rep.witness_center)
    human = (
        f"sup ratio {rep.sup_ratio:.6g} at center {z.real:.6g}{z.imag:+.6g}i radius {rep.witness_radius:.6g} "
        f"({rep.centers_tested} centers x {rep.radii_tested} radii; a lower bound)"
    )
    print(human, file=sys.stderr)
    cols = ["curve", "sup_ratio", "witness_re", "witness_im", "witness_radius", "centers", "radii"]
    rows = [[args.curve, rep.sup_ratio, z.real, z.imag, rep.witness_radius, rep.centers_tested, rep.radii_tested]]
    emit(args, cols, rows, extra=[human], json_obj=rep.to_dict())


def cmd_signed_length(args):
    c1 = resolve_curve(args.curve)
    c2 = resolve_curve(args.curve2) if args.curve2 else c1
    val = signed_length(c1, c2, band=args.band, refine=args.refine)
    human = f"signed length {val:.12g} (lengths {c1.length:.12g}, {c2.length:.12g})"
    print(human, file=sys.stderr)
    band = args.band if args.band is not None else 1e-9 * max(c1.diameter, c2.diameter)
    cols = ["curve1", "curve2", "length1", "length2", "signed_length", "band"]
    emit(args, cols, [[args.curve, args.curve2 or args.curve, c1.length, c2.length, val, band]], extra=[human])


def _curve_pair(args, R):
    c1 = resolve_curve(args.curve, R)
    c2 = resolve_curve(args.curve2, R) if args.curve2 else c1
    return c1, c2


def cmd_predict(args):
    model = resolve_model(args)
    rows = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", SignAnomalyWarning)
        for R in _radius_list(args):
            c1, c2 = _curve_pair(args, R)
            if args.statistic == "count":
                val = predict_count_variance(model, c1, R)
            elif args.statistic == "work":
                val = predict_work_variance(model, R)
            else:
                val = predict_action_cov(model, c1, c2, R)
            rows.append([model.name, args.statistic, args.curve, args.curve2 or args.curve, R, val,
                         abs(val) * CONSTANT_RTOL])
    notes = [f"warning: {w.message}" for w in caught]
    cols = ["model", "statistic", "curve1", "curve2", "R", "prediction", "error"]
    emit(args, cols, rows, extra=notes)


def cmd_pv(args):
    model = resolve_model(args)
    spec = QuadratureSpec(
        epsilon_schedule=parse_radii(args.eps_schedule) if args.eps_schedule else None,
        abs_tol=args.abs_tol,
    )
    rows = []
    for R in _radius_list(args):
        c1, c2 = _curve_pair(args, R)
        res = pv_action_cov_quadrature(model, c1, c2, R, spec)
        pred = predict_action_cov(model, c1, c2, R)
        rows.append([model.name, args.curve, args.curve2 or args.curve, R, pred, res.value, res.error])
    cols = ["model", "curve1", "curve2", "R", "prediction", "quadrature", "error"]
    emit(args, cols, rows)


def _mc_prediction(args, R, curve):
    if args.statistic == "count" and args.model == "ginibre":
        return predict_count_variance(make_model("ginibre"), curve, R)
    if args.statistic == "count" and args.model == "poisson":
        # area law of the Poisson process
        a, b = curve.edges()
        return args.intensity * R * R * abs(0.5 * float(np.sum((a.conj() * b).imag)))
    if args.statistic == "work" and args.model == "ginibre":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SignAnomalyWarning)
            return predict_work_variance(make_model("ginibre"), max(R, 1.0))
    return float("nan")


def cmd_mc(args):
    sampler = SamplerSpec(args.model, args.intensity if args.model == "poisson" else 1.0)
    radii = _radius_list(args)
    threads = args.threads or default_threads()
    rows = []
    for R in radii:
        curve = resolve_curve(args.curve, R)
        est = estimate_statistic(sampler, args.statistic, curve, R, args.n, args.seed, threads=threads)
        rows.append([R, est.mean, est.variance, est.stderr_of_variance, est.n_samples, est.base_seed,
                     _mc_prediction(args, R, curve)])
    cols = ["R", "mean", "variance", "stderr", "n", "seed", "prediction"]
    svg = None
    if args.format == "svg+csv":
        series = [Series([r[0] for r in rows], [r[2] for r in rows], "Monte Carlo variance",
                         yerr=[r[3] for r in rows])]
        if all(math.isfinite(r[6]) for r in rows):
            series.append(Series([r[0] for r in rows], [r[6] for r in rows], "prediction", line=True))
        svg = plot(series, title=f"{args.statistic} variance, {args.model}", xlabel="R", ylabel="variance",
                   logx=len(radii) > 1)
    emit(args, cols, rows, svg=svg)


def cmd_work(args):
    model = resolve_model(args)
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SignAnomalyWarning)
        d = d_lambda(model)
    for a in parse_radii(args.a):
        r = work_variance_radial(model, a)
        two = work_variance_2d(model, a, angular=args.angular)
        rows.append([model.name, a, r, two, abs(r - two), d * math.log(a)])
    cols = ["model", "a", "radial", "two_d", "difference", "D_log_a"]
    notes = [f"D = {d:.12g}" + (" (negative; reported as computed)" if d < 0 else "")]
    emit(args, cols, rows, extra=notes)


def cmd_counterexample(args):
    radii = parse_radii(args.radii)
    reports = [nested_variance_report(args.eps, R, args.k_cap, args.j_cap) for R in radii]
    rows = [[R, r.value, r.tail_bound, r.lower_bound, r.k_explicit, r.j_cap] for R, r in zip(radii, reports)]
    notes = []
    svg = None
    if len(radii) >= 2:
        fit = fit_loglog(radii, [r.value for r in reports])
        notes.append(f"fit slope={fit.slope:.12g} intercept={fit.intercept:.12g} max_residual={fit.max_residual:.3g}")
        if len(radii) < 4 or radii[-1] < 10 * radii[0]:
            notes.append("note: fewer than 4 radii or less than a decade; slope is indicative only")
        if args.format == "svg+csv":
            xs = [radii[0], radii[-1]]
            line = [math.exp(fit.intercept) * x**fit.slope for x in xs]
            svg = plot(
                [Series(radii, [r.value for r in reports], "exact variance"), Series(xs, line, "least-squares fit", line=True)],
                title=f"nested disks, eps = {args.eps}", xlabel="R", ylabel="variance", logx=True, logy=True,
                note=f"slope {fit.slope:.4f}",
            )
    cols = ["R", "variance", "tail_bound", "lower_bound", "k_explicit", "j_cap"]
    emit(args, cols, rows, extra=notes, svg=svg)


def cmd_verify(args):
    results = run_all(fast=args.fast, out=sys.stdout)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)} passed, {len(failed)} failed")
    return 1 if failed else 0


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fluxlab", description="Flux and action fluctuations of planar point processes.")
    p.add_argument("--version", action="version", version=f"fluxlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, model=True, seed=False):
        sp.add_argument("--out", default=None, help="output file (default stdout)")
        sp.add_argument("--format", choices=("csv", "json", "svg+csv"), default="csv")
        if model:
            sp.add_argument("--model", choices=("ginibre", "gef", "poisson", "tabulated"), default="ginibre")
            sp.add_argument("--table", default=None, help="t,k CSV for --model tabulated (JSON sidecar alongside)")
            sp.add_argument("--intensity", type=float, default=1.0, help="Poisson intensity")
        if seed:
            sp.add_argument("--seed", type=int, default=0)

    def radii(sp):
        sp.add_argument("--R", type=float, default=None)
        sp.add_argument("--radii", default=None, help="comma-separated list of dilations")

    sp = sub.add_parser("model-info", help="constants of a two-point model")
    common(sp)
    sp.set_defaults(func=cmd_model_info)

    sp = sub.add_parser("sample", help="sample one configuration")
    common(sp, seed=True)
    sp.add_argument("--R", type=float, required=True, help="window radius")
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("ahlfors", help="weak Ahlfors lower-bound estimate")
    common(sp, model=False)
    sp.add_argument("--curve", required=True)
    sp.add_argument("--grid", type=int, default=21)
    sp.set_defaults(func=cmd_ahlfors)

    sp = sub.add_parser("signed-length", help="signed length of two curves")
    common(sp, model=False)
    sp.add_argument("--curve", required=True)
    sp.add_argument("--curve2", default=None)
    sp.add_argument("--band", type=float, default=None)
    sp.add_argument("--refine", type=int, default=1)
    sp.set_defaults(func=cmd_signed_length)

    sp = sub.add_parser("predict", help="leading-order variance predictions")
    common(sp)
    radii(sp)
    sp.add_argument("--curve", default="circle")
    sp.add_argument("--curve2", default=None)
    sp.add_argument("--stat", dest="statistic", choices=("count", "action", "work"), default="count")
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("pv", help="principal-value covariance quadrature")
    common(sp)
    radii(sp)
    sp.add_argument("--curve", default="circle")
    sp.add_argument("--curve2", default=None)
    sp.add_argument("--eps-schedule", default=None, help="decreasing exclusion radii relative to the diameter")
    sp.add_argument("--abs-tol", type=float, default=0.05)
    sp.set_defaults(func=cmd_pv)

    sp = sub.add_parser("mc", help="Monte Carlo variance of a statistic")
    common(sp, seed=True)
    radii(sp)
    sp.add_argument("--curve", default="circle")
    sp.add_argument("--stat", dest="statistic", choices=STATISTICS, default="count")
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--threads", type=int, default=None, help="worker threads (default FLUXLAB_THREADS or 1)")
    sp.set_defaults(func=cmd_mc)

    sp = sub.add_parser("work", help="work variance between two points at distance a")
    common(sp)
    sp.add_argument("--a", required=True, help="comma-separated distances")
    sp.add_argument("--angular", choices=("analytic", "numeric"), default="analytic")
    sp.set_defaults(func=cmd_work)

    sp = sub.add_parser("counterexample", help="exact nested-disk variance and growth exponent")
    common(sp, model=False)
    sp.add_argument("--eps", type=float, default=0.5)
    sp.add_argument("--radii", default="100,200,400,800,1600")
    sp.add_argument("--k-cap", type=int, default=None)
    sp.add_argument("--j-cap", type=int, default=None)
    sp.set_defaults(func=cmd_counterexample)

    sp = sub.add_parser("verify", help="run the acceptance checks")
    sp.add_argument("--fast", action="store_true", help="smaller Monte Carlo sample for the work check")
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "model", None) == "gef" and args.command in ("mc", "sample"):
            raise ValidationError("no GEF sampler; use ginibre or poisson")
        status = args.func(args)
        return int(status or 0)
    except ValidationError as exc:
        print(f"fluxlab: error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"fluxlab: numerical failure: {exc}", file=sys.stderr)
        return 3
    except SystemExit as exc:
        # --help and --version
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
