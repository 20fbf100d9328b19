import json
import subprocess
import sys

import pytest

from hlsharp.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_exponents_main_m9(capsys):
    code, out, _ = run(capsys, "exponents", "--theorem", "main", "-m", "9", "-p", "10", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert [v if v == "inf" else f"{v['num']}/{v['den']}" for v in data["tuple"]["values"]] == [
        "10/1", "5/1", "10/3", "5/2", "2/1", "2/1", "2/1", "2/1", "2/1"
    ]
    assert data["k0"] == 5 and data["constant_bound"] == "4"


def test_exponents_pretty_lists_k0_and_constant(capsys):
    code, out, _ = run(capsys, "exponents", "--theorem", "main", "-m", "9", "-p", "10")
    assert code == 0 and "k0 = 5" in out and "constant <= 4" in out and "10/3" in out


def test_exponents_paulino_defaults_p(capsys):
    code, out, _ = run(capsys, "exponents", "--theorem", "paulino", "-m", "10", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[1] == "1,inf,inf" and lines[4] == "4,90/17,5.29"


def test_exponents_regime_error(capsys):
    code, _, err = run(capsys, "exponents", "--theorem", "main", "-m", "2", "-p", "8,8")
    assert code == 1 and "Subcritical" in err


def test_usage_errors_exit_1(capsys):
    assert run(capsys, "exponents", "--theorem", "nope", "-p", "4,4")[0] == 1
    assert run(capsys, "table", "-m", "3", "-p", "4,4")[0] == 1
    assert run(capsys, "table", "-p", "abc")[0] == 1
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_table_rows(capsys):
    _, out, _ = run(capsys, "table", "-m", "9", "-p", "10", "--format", "json")
    data = json.loads(out)
    assert [r["theorem"] for r in data["rows"]] == ["dimant", "ar", "main"]
    assert {s["theorem"] for s in data["skipped"]} >= {"mu", "aron", "critical"}
    _, out, _ = run(capsys, "table", "-m", "10", "-p", "10", "--format", "json")
    assert [r["theorem"] for r in json.loads(out)["rows"]] == ["paulino", "critical_iso"]
    _, out, _ = run(capsys, "table", "-m", "9", "-p", "10", "-r", "1", "-q", "2", "--format", "json")
    rows = json.loads(out)["rows"]
    assert [r["theorem"] for r in rows] == ["vector_isotropic", "vector"]
    assert rows[0]["truncated"] == ["10.00"] * 9
    assert rows[1]["truncated"] == ["10.00", "5.00", "3.33", "2.50"] + ["2.00"] * 5


def test_table_ar_decimals(capsys):
    _, out, _ = run(capsys, "table", "-m", "9", "-p", "10", "--format", "json")
    ar = next(r for r in json.loads(out)["rows"] if r["theorem"] == "ar")
    assert ar["truncated"] == ["10.00", "6.92", "5.29", "4.28", "3.60", "3.10", "2.72", "2.43", "2.19"]


def test_verify_littlewood(capsys):
    code, out, _ = run(capsys, "verify", "-m", "2", "-p", "inf", "-t", "4/3", "--n", "8", "--trials", "10", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["classification"] == "Admissible" and data["constant"] == "2^(1/2)"
    assert all(r["within_bound"] and r["exact"] for r in data["records"])


def test_verify_non_admissible_has_no_claim(capsys):
    _, out, _ = run(capsys, "verify", "-m", "2", "-p", "inf", "-t", "1,1", "--n", "8", "--trials", "10", "--format", "json")
    data = json.loads(out)
    assert data["constant"] is None
    assert max(r["ratio"] for r in data["records"]) > 2**0.5
    assert all("within_bound" not in r for r in data["records"])


def test_verify_round_trip(tmp_path, capsys):
    args = ["verify", "-m", "2", "-p", "inf", "-t", "4/3", "--n", "4", "--trials", "3", "--format", "json"]
    _, first, _ = run(capsys, *args, "--save-tensors", str(tmp_path))
    files = sorted(str(p) for p in tmp_path.glob("tensor_*.json"))
    assert len(files) == 3
    loaded = []
    for f in files:
        loaded += ["--tensor", f]
    _, second, _ = run(capsys, *args, *loaded)
    assert [r["ratio"] for r in json.loads(first)["records"]] == [r["ratio"] for r in json.loads(second)["records"]]


def test_sharpness_scan(tmp_path, capsys):
    out = tmp_path / "scan.json"
    code, text, _ = run(capsys, "sharpness", "--theorem", "main", "-m", "9", "-p", "10", "--eps", "0.1", "--coord", "6", "--out", str(out))
    assert code == 0 and "NonAdmissible" in text
    data = json.loads(out.read_text())
    assert data["rows"][0]["verdict"] == "NonAdmissible"
    assert out.with_suffix(".csv").exists()


def test_sharpness_growth_strict(tmp_path, capsys):
    base = ["sharpness", "-m", "2", "-p", "inf", "--trials", "3"]
    assert run(capsys, *base, "-t", "1", "--n-list", "4,8,16,32", "--strict")[0] == 0
    # two points from one n-list cannot give a verdict
    assert run(capsys, *base, "-t", "1", "--n-list", "4,8", "--strict")[0] == 2
    assert run(capsys, *base, "-t", "1", "--n-list", "4,8")[0] == 0


def test_region(tmp_path, capsys):
    out = tmp_path / "region.csv"
    code, _, _ = run(capsys, "region", "-m", "3", "-p", "4", "--out", str(out))
    assert code == 0
    rows = out.read_text().splitlines()
    assert "4,2,2,4.0,2.0,2.0,Admissible" in rows
    assert "4,3/2,2,4.0,1.5,2.0,NonAdmissible" in rows
    assert run(capsys, "region", "-m", "2", "-p", "4")[0] == 1


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("theorem = main\nm = 9\np = 10\nformat = csv\n")
    code, out, _ = run(capsys, "exponents", "--config", str(cfg))
    assert code == 0 and out.splitlines()[0] == "k,exact,decimal"
    # flags override the file
    _, out, _ = run(capsys, "exponents", "--config", str(cfg), "--format", "json")
    assert json.loads(out)["k0"] == 5
    cfg.write_text("theorem = main\nbogus = 1\n")
    assert run(capsys, "exponents", "--config", str(cfg), "-m", "9", "-p", "10")[0] == 1


def test_byte_identical_rerun(tmp_path):
    cmd = [sys.executable, "-m", "hlsharp", "sharpness", "-m", "2", "-p", "inf", "-t", "1",
           "--n-list", "4,8,16", "--trials", "3", "--seed", "5"]
    outputs = []
    for name in ("a", "b"):
        out = tmp_path / f"{name}.json"
        subprocess.run(cmd + ["--out", str(out)], check=True, capture_output=True)
        outputs.append((out.read_bytes(), out.with_suffix(".csv").read_bytes()))
    assert outputs[0] == outputs[1]
