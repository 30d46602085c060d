import csv
import io
import json
import subprocess
import sys

import pytest

from curvedopt.cli import main


@pytest.fixture
def specs(tmp_path):
    paths = {}
    for name, spec in {
        "ball": {"kind": "ball", "dim": 2},
        "cube": {"kind": "cube", "dim": 2},
        "curved": {"kind": "curved", "base": {"kind": "cube", "dim": 2}, "t": 0.5},
    }.items():
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(spec))
        paths[name] = str(p)
    return paths


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_certify_pass_and_fail(specs, capsys):
    code, out, _ = run(["certify", specs["ball"], "--modulus", "0.125", "--samples", "3000"], capsys)
    assert code == 0 and json.loads(out)["verdict"] == "PASS"
    code, out, _ = run(["certify", specs["ball"], "--modulus", "0.13", "--samples", "3000"], capsys)
    assert code == 2 and json.loads(out)["verdict"] == "FAIL"


def test_certify_two_smooth_cube(specs, capsys):
    code, out, _ = run(
        ["certify", specs["cube"], "--notion", "two_smooth", "--modulus", "10", "--y-radius", "0.1"], capsys
    )
    assert code == 2


def test_usage_errors_exit_one(specs, capsys):
    with pytest.raises(SystemExit) as info:
        main(["certify", specs["ball"]])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main(["nonsense"])
    assert info.value.code == 1


def test_missing_file_exits_one(tmp_path, capsys):
    code, _, err = run(["certify", str(tmp_path / "none.json"), "--modulus", "0.1"], capsys)
    assert code == 1 and "none.json" in err


def test_bad_spec_exits_one(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"kind": "ball", "dim": -2}))
    code, _, err = run(["curve", str(p), "--t", "0.5"], capsys)
    assert code == 1 and "dim" in err


def test_curve_reports_guarantees(specs, capsys):
    code, out, _ = run(["curve", specs["cube"], "--eps", "0.1", "--points", "2000"], capsys)
    payload = json.loads(out)
    assert code == 0
    assert payload["t"] == pytest.approx(0.2**0.5)
    assert payload["strong_convexity_modulus"] == pytest.approx(0.2 / 8)
    assert payload["approximation_factor"] <= 1.1


def test_olo_csv_round_trip(specs, capsys, tmp_path):
    out_path = tmp_path / "trace.csv"
    code, _, err = run(
        ["olo", specs["ball"], "--adversary", "growth", "--T", "50", "--lam", "0.125", "--out", str(out_path)],
        capsys,
    )
    assert code == 0
    assert "PASS growth_log" in err
    with open(out_path) as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    assert header[:5] == ["round", "g0", "g1", "x0", "x1"]
    assert len(body) == 50
    # repr floats survive a text round trip bit for bit
    for row in body:
        for cell in row[1:]:
            if cell not in ("nan",):
                assert repr(float(cell)) == cell


def test_olo_alternating_trace(specs, capsys):
    code, out, err = run(["olo", specs["cube"], "--adversary", "alternating", "--T", "20"], capsys)
    assert code == 0  # linear regret, yet the stability-sum bound still holds
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[2][3:5] == ["1.0", "1.0"]
    assert rows[3][3:5] == ["1.0", "-1.0"]


def test_repeat_runs_are_identical(specs, capsys):
    argv = ["olo", specs["ball"], "--adversary", "nonneg", "--T", "40", "--lam", "0.125", "--seed", "7"]
    _, first, _ = run(argv, capsys)
    _, second, _ = run(argv, capsys)
    assert first == second
    _, third, _ = run(argv[:-1] + ["8"], capsys)
    assert third != first


def test_global_flags_either_side(specs, capsys):
    a = run(["--seed", "3", "certify", specs["ball"], "--modulus", "0.1", "--samples", "200"], capsys)
    b = run(["certify", specs["ball"], "--modulus", "0.1", "--samples", "200", "--seed", "3"], capsys)
    assert a == b
    assert json.loads(a[1])["seed"] == 3


def test_fw_csv(specs, capsys):
    code, out, _ = run(["fw", specs["curved"], "--target", "2,0.3", "--steps", "20"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["iter", "f", "gap"] and len(rows) == 22


def test_preset_writes_records(tmp_path, capsys):
    code, out, _ = run(["preset", "ftl-bad", "--out", str(tmp_path), "--set", "T=200"], capsys)
    assert code == 0
    assert "PASS" in out
    record = json.loads((tmp_path / "ftl-bad.json").read_text())
    assert record["params"]["T"] == 200 and len(record["config_hash"]) == 16


def test_module_entry_point(specs):
    proc = subprocess.run(
        [sys.executable, "-m", "curvedopt", "certify", specs["ball"], "--modulus", "0.13", "--samples", "2000"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 2
