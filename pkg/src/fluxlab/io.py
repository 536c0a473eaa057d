"""Reading and writing curves, point configurations and tabulated models."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .curves import Curve, make_polyline
from .errors import ValidationError
from .models import TwoPointModel, make_model
from .sampler import PointConfig


def curve_to_json(curve: Curve) -> str:
    v = curve.vertices
    return json.dumps({"vertices": [[float(z.real), float(z.imag)] for z in v], "closed": curve.closed})


def curve_from_json(text: str) -> Curve:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"curve JSON does not parse: {exc}") from None
    if isinstance(data, list):
        data = {"vertices": data, "closed": False}
    if not isinstance(data, dict) or "vertices" not in data:
        raise ValidationError("curve JSON needs a 'vertices' array")
    closed = data.get("closed", False)
    if not isinstance(closed, bool):
        raise ValidationError("'closed' must be a boolean")
    pts = []
    for i, p in enumerate(data["vertices"]):
        if not (isinstance(p, (list, tuple)) and len(p) == 2):
            raise ValidationError(f"vertex {i} is not a [re, im] pair")
        pts.append(complex(float(p[0]), float(p[1])))
    return make_polyline(pts, closed=closed)


def curve_from_csv(text: str, closed: bool = False) -> Curve:
    """Two columns ``re,im``; a non-numeric first row is taken as a header."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].lstrip().startswith("#")]
    pts = []
    for i, row in enumerate(rows):
        if len(row) != 2:
            raise ValidationError(f"CSV row {i} has {len(row)} columns, expected 2")
        try:
            pts.append(complex(float(row[0]), float(row[1])))
        except ValueError:
            if i == 0:
                continue
            raise ValidationError(f"CSV row {i} is not numeric: {row}") from None
    return make_polyline(pts, closed=closed)


def load_curve(path, closed: bool | None = None) -> Curve:
    """Curve from a ``.json`` or ``.csv`` file."""
    p = Path(path)
    if not p.exists():
        raise ValidationError(f"curve file {p} does not exist")
    text = p.read_text()
    if p.suffix.lower() == ".json":
        curve = curve_from_json(text)
        if closed is not None and closed != curve.closed:
            curve = make_polyline(curve.vertices, closed=closed)
        return curve
    return curve_from_csv(text, closed=bool(closed))


def config_to_csv(config: PointConfig) -> str:
    out = io.StringIO()
    out.write("# " + json.dumps(config.header, sort_keys=True) + "\n")
    out.write("re,im\n")
    for z in config.points:
        out.write(f"{float(z.real):.17g},{float(z.imag):.17g}\n")
    return out.getvalue()


def config_from_csv(text: str) -> PointConfig:
    """Inverse of :func:`config_to_csv`; other ``#`` lines before the header are skipped."""
    lines = text.splitlines()
    head = None
    k = 0
    while k < len(lines) and lines[k].startswith("#"):
        try:
            cand = json.loads(lines[k][1:])
        except json.JSONDecodeError:
            cand = None
        if isinstance(cand, dict) and {"model", "R", "seed", "intensity"} <= cand.keys():
            head = cand
        k += 1
    if head is None:
        raise ValidationError("configuration CSV needs a '# {json}' header with model, R, seed and intensity")
    body = [ln for ln in lines[k:] if ln.strip()]
    if body and body[0].strip() == "re,im":
        body = body[1:]
    try:
        pts = np.array([complex(*map(float, ln.split(","))) for ln in body], dtype=complex)
    except (TypeError, ValueError):
        raise ValidationError("configuration rows must be numeric re,im pairs") from None
    return PointConfig(pts, float(head["R"]), head["model"], int(head["seed"]), float(head["intensity"]))


def load_tabulated_model(csv_path, sidecar_path=None) -> TwoPointModel:
    """Tabulated model from a ``t,k`` CSV and a JSON sidecar (name, intensity, cutoff).

    The sidecar defaults to the CSV path with a ``.json`` suffix.
    """
    csv_path = Path(csv_path)
    sidecar = Path(sidecar_path) if sidecar_path else csv_path.with_suffix(".json")
    if not sidecar.exists():
        raise ValidationError(f"model sidecar {sidecar} does not exist")
    meta = json.loads(sidecar.read_text())
    if "intensity" not in meta:
        raise ValidationError("model sidecar must give 'intensity'")
    t, k = [], []
    for i, row in enumerate(csv.reader(io.StringIO(csv_path.read_text()))):
        if not row or row[0].lstrip().startswith("#"):
            continue
        try:
            tv, kv = float(row[0]), float(row[1])
        except (ValueError, IndexError):
            if i == 0:
                continue
            raise ValidationError(f"model CSV row {i} is not a numeric t,k pair") from None
        t.append(tv)
        k.append(kv)
    return make_model(
        "tabulated",
        t=np.array(t),
        k=np.array(k),
        intensity=float(meta["intensity"]),
        name=meta.get("name", csv_path.stem),
        cutoff=meta.get("cutoff"),
    )
