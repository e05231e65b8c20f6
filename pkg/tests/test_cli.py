import csv
import io
import json

import numpy as np
import pytest

from logsob import cli
from logsob.families import exp_decay
from logsob.reports import CSV_HEADER


def run(args, capsys):
    code = cli.main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_1d_passes(capsys):
    code, out, _ = run(["verify-1d", "--p", "2", "--N", "3"], capsys)
    assert code == 0
    rec = json.loads(out)[0]
    assert rec["inequality_id"] == "lsi-1d" and rec["passed"]


def test_csv_output(capsys):
    code, out, _ = run(["verify-lsi", "--p", "2", "--N", "2.5", "--space", "angle-deficit-cone", "--avr", "0.5", "--function", "bump", "--format", "csv"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == CSV_HEADER
    assert rows[1][0] == "lsi" and rows[1][-1] == "true"


def test_output_file(tmp_path, capsys):
    path = tmp_path / "r.json"
    code, out, _ = run(["verify-isoperimetry", "--N", "3", "--radii", "geometric:0.1..10:5", "--output", str(path)], capsys)
    assert code == 0 and out == ""
    assert json.loads(path.read_text())[0]["passed"]


def test_missing_parameter_is_usage_error(capsys):
    code, _, err = run(["verify-1d", "--N", "3"], capsys)
    assert code == 2 and "--p" in err


@pytest.mark.parametrize(
    "args",
    [["nonsense"], ["verify-1d", "--p", "0.5", "--N", "3"], ["verify-1d", "--p", "2", "--N", "3", "--tol", "-1"],
     ["verify-1d", "--p", "2", "--N", "3", "--space", "torus"], ["verify-lsi", "--p", "2", "--N", "3", "--function", "sinc"]],
)
def test_usage_errors(args, capsys):
    assert run(args, capsys)[0] == 2


def test_negative_control_fails(capsys):
    code, _, err = run(["verify-1d", "--p", "2", "--N", "3", "--inject-lsc-factor", "0.5"], capsys)
    assert code == 1 and "failed" in err


def test_class_violation_exit_code(tmp_path, capsys):
    r = np.linspace(0, 10, 300)
    path = tmp_path / "u.csv"
    path.write_text("radius,value\n" + "".join(f"{a:.17g},{-a * a:.17g}\n" for a in r))
    code, _, err = run(["verify-hyper", "--p", "2", "--N", "2", "--alpha", "1", "--beta", "2", "--t", "0.25", "--t0", "0.5", "--function", str(path)], capsys)
    assert code == 3 and "numerical error" in err


def test_gaussian_sweep_exit_codes(capsys):
    base = ["sweep-gaussian-sharpness", "--N", "3", "--space", "angle-deficit-cone", "--avr", "0.5", "--lambdas", "geometric:0.1..0.0001:12"]
    assert run(base + ["--trial-constant", "2"], capsys)[0] == 0
    assert run(base + ["--trial-constant", "1.9"], capsys)[0] == 1


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# demo\np = 3\nN = 2.5  # dimension\nformat = csv\n")
    cfg_obj = cli.parse_config(["verify-1d", "--config", str(cfg), "--p", "2"])
    assert cfg_obj.p == 2.0 and cfg_obj.space.N == 2.5 and cfg_obj.format == "csv"
    code, out, _ = run(["verify-1d", "--config", str(cfg)], capsys)
    assert code == 0 and out.startswith(",".join(CSV_HEADER))


def test_config_file_errors(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert run(["verify-1d", "--config", str(bad)], capsys)[0] == 2
    bad.write_text("just words\n")
    assert run(["verify-1d", "--config", str(bad)], capsys)[0] == 2
    assert run(["verify-1d", "--config", str(tmp_path / "missing.cfg")], capsys)[0] == 2


def test_parse_schedule():
    np.testing.assert_allclose(cli.parse_schedule("geometric:1..0.01:3"), [1.0, 0.1, 0.01])
    np.testing.assert_allclose(cli.parse_schedule("0.5, 0.25"), [0.5, 0.25])
    with pytest.raises(cli.UsageError):
        cli.parse_schedule("geometric:0..1:3")
    with pytest.raises(cli.UsageError):
        cli.parse_schedule("a,b")


def test_worker_count(monkeypatch):
    monkeypatch.setenv("LOGSOB_THREADS", "1")
    assert cli.worker_count() == 1
    monkeypatch.setenv("LOGSOB_THREADS", "zero")
    with pytest.raises(cli.UsageError):
        cli.worker_count()
    monkeypatch.setenv("LOGSOB_THREADS", "0")
    with pytest.raises(cli.UsageError):
        cli.worker_count()


def test_resolve_function(tmp_path):
    assert cli.resolve_function("class:2", 2.0, 1.0, 0.5).family.startswith("power")
    with pytest.raises(cli.UsageError):
        cli.resolve_function("class:99", 2.0, 1.0, 0.5)
    path = tmp_path / "u.csv"
    exp_decay(1.0, n=300).to_csv(path)
    assert cli.resolve_function(str(path), 2.0).family == "u.csv"


def test_check_hopflax(capsys):
    code, out, _ = run(["check-hopflax", "--p", "2", "--t", "0.2", "--t0", "0.5", "--function", "class:5", "--points", "512"], capsys)
    assert code == 0
    ids = {r["inequality_id"] for r in json.loads(out)}
    assert {"hamilton-jacobi", "hamilton-jacobi-initial", "semigroup-monotonicity"} <= ids


def test_help(capsys):
    code, out, _ = run(["--help"], capsys)
    assert code == 0 and "verify-lsi" in out
