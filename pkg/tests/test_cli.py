import json

import pytest

from fluxlab import __version__
from fluxlab.cli import main


def run(capsys, *argv):
    status = main(list(argv))
    out = capsys.readouterr()
    return status, out.out, out.err


def body(text):
    return [ln for ln in text.splitlines() if not ln.startswith("#")]


def test_model_info(capsys):
    status, out, _ = run(capsys, "model-info", "--model", "ginibre")
    assert status == 0
    assert out.startswith(f"# fluxlab {__version__} model-info")
    row = dict(zip(*[ln.split(",") for ln in body(out)]))
    assert float(row["C"]) == pytest.approx(0.6366197723675813)
    assert float(row["hk_residual"]) < 1e-10


def test_model_info_gef_reports_provisional(capsys):
    status, out, _ = run(capsys, "model-info", "--model", "gef")
    assert status == 0
    assert "not applicable" in out and body(out)[1].endswith("true")


def test_config_header_is_json(capsys):
    _, out, _ = run(capsys, "predict", "--R", "100")
    cfg = json.loads(out.splitlines()[1][len("# config "):])
    assert cfg["R"] == 100 and cfg["model"] == "ginibre"
    rows = body(out)
    assert rows[0] == "model,statistic,curve1,curve2,R,prediction,error"
    assert float(rows[1].split(",")[5]) == pytest.approx(100, rel=1e-4)


def test_counterexample_example(capsys):
    status, out, _ = run(capsys, "counterexample", "--eps", "0.5", "--radii", "100,200,400,800")
    assert status == 0
    slope = float(next(ln for ln in out.splitlines() if "slope=" in ln).split("slope=")[1].split()[0])
    assert slope >= 1.4


def test_mc_poisson_example(capsys):
    status, out, _ = run(
        capsys, "mc", "--model", "poisson", "--stat", "count", "--curve", "circle", "--R", "10", "--n", "4000", "--seed", "1"
    )
    assert status == 0
    cols, row = body(out)
    rec = dict(zip(cols.split(","), row.split(",")))
    assert abs(float(rec["variance"]) - 314.16) <= 3 * float(rec["stderr"])


def test_identical_runs_identical_bodies(capsys):
    argv = ("mc", "--stat", "work", "--curve", "segment", "--radii", "2,3", "--n", "50", "--seed", "4")
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv, "--threads", "2")
    assert body(a) == body(b)


def test_exit_codes(capsys):
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "mc", "--bogus-flag")[0] == 2
    assert run(capsys, "predict")[0] == 2
    assert run(capsys, "mc", "--model", "gef", "--R", "2")[0] == 2
    status, _, err = run(capsys, "pv", "--R", "5", "--eps-schedule", "0.2,0.15,0.1,0.08", "--abs-tol", "1e-12")
    assert status == 3 and "numerical" in err


def test_svg_output(tmp_path, capsys):
    out = tmp_path / "growth"
    status, _, _ = run(
        capsys, "counterexample", "--radii", "10,20,40,80,160", "--format", "svg+csv", "--out", str(out)
    )
    assert status == 0
    assert (tmp_path / "growth.svg").read_text().startswith("<svg")
    assert "slope=" in (tmp_path / "growth.csv").read_text()


def test_json_format(capsys):
    status, out, _ = run(capsys, "ahlfors", "--curve", "segment", "--format", "json")
    assert status == 0
    data = json.loads(out)
    assert data["result"]["sup_ratio"] == pytest.approx(0.3183, abs=1e-3)


def test_signed_length_and_sample(capsys, tmp_path):
    status, out, _ = run(capsys, "signed-length", "--curve", "builtin:square")
    assert status == 0 and body(out)[1].split(",")[4] == "4"
    path = tmp_path / "pts.csv"
    assert run(capsys, "sample", "--R", "3", "--seed", "5", "--out", str(path))[0] == 0
    from fluxlab.io import config_from_csv

    assert config_from_csv(path.read_text()).seed == 5


def test_work_subcommand(capsys):
    status, out, _ = run(capsys, "work", "--a", "2,5")
    assert status == 0
    rows = [r.split(",") for r in body(out)[1:]]
    assert all(float(r[4]) < 1e-12 for r in rows)


def test_builtin_spiral_curve(capsys):
    status, out, _ = run(capsys, "ahlfors", "--curve", "builtin:spiral:0.1,10", "--grid", "11")
    assert status == 0
    assert run(capsys, "ahlfors", "--curve", "builtin:spiral:bad")[0] == 2
