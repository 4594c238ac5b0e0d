import json
import math
import subprocess
import sys

import numpy as np
import pytest

from pshgauss.cli import format_complex, main
from pshgauss.report import strip_timestamp


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval_examples(capsys):
    code, out, _ = run(capsys, "eval", "--expr", "z1*conj(z1)", "--at", "1+1i", "--dim", "1")
    assert code == 0 and out.strip() == "2+0i"
    code, out, _ = run(capsys, "eval", "--expr", "z1*conj(z1)", "--dzbar", "1")
    assert out.strip() == "z1"
    code, out, _ = run(capsys, "eval", "--expr", "abs2(z1)", "--op", "L")
    assert out.strip() == "1 - z1*conj(z1)"
    code, out, _ = run(capsys, "eval", "--expr", "exp(0.5*abs2(z1))", "--growth")
    assert out.splitlines()[0] == "subgaussian(0.5)"


def test_format_complex():
    assert format_complex(2) == "2+0i"
    assert format_complex(1 - 0.5j) == "1-0.5i"


def test_run_writes_schema_report(tmp_path, capsys):
    path = tmp_path / "out.json"
    code, out, _ = run(capsys, "run", "--suite", "all", "--dim", "1", "--method", "exact", "--seed", "42",
                       "--report", str(path))
    assert code == 0
    d = json.loads(path.read_text())
    assert {"version", "config", "checks", "summary", "timestamp"} == set(d)
    assert d["summary"]["failed"] == 0 and d["summary"]["total"] == len(d["checks"])
    assert d["config"]["seed"] == 42
    chk = d["checks"][0]
    assert set(chk) == {"suite", "identity", "f", "g", "dim", "method", "lhs", "rhs", "abs_err", "rel_err", "tol",
                        "stderr", "nodes", "samples", "seed", "pass"}
    assert "failed 0" in out


def test_failing_control_exits_one(tmp_path, capsys):
    # an entry with a false psh claim is caught and fails the run
    path = tmp_path / "bad.json"
    code, out, _ = run(capsys, "run", "--suite", "correlation", "--entry", "bad=-abs2(z1):psh", "--report", str(path))
    assert code == 1 and "FAIL" in out
    assert json.loads(path.read_text())["summary"]["failed"] >= 1


def test_usage_errors_exit_two(capsys, tmp_path):
    assert run(capsys, "run", "--dim", "5")[0] == 2
    assert run(capsys, "run", "--t-grid", "0:5:0")[0] == 2
    assert run(capsys, "run", "--suite", "nope")[0] == 2
    assert run(capsys, "eval", "--expr", "z1 +")[0] == 2
    assert run(capsys, "eval", "--expr", "z3", "--dim", "2")[0] == 2
    assert run(capsys, "run", "--report", str(tmp_path / "missing" / "x.json"))[0] == 2
    assert run(capsys, "run", "--entry", "noequals")[0] == 2
    assert run(capsys, "alpha", "--f", "re(z1)", "--g", "abs2(z1)")[0] == 2
    assert run(capsys, "run", "--entry", "big=exp(abs2(z1))")[0] == 2


def test_alpha_file(tmp_path, capsys):
    path = tmp_path / "alpha.dat"
    code, _, _ = run(capsys, "alpha", "--f", "abs2(z1)", "--g", "abs2(z1)", "--dim", "1", "--t-grid", "0:5:0.25",
                     "-o", str(path))
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "# t alpha alpha1_fd alpha2_fd alpha2_trace"
    data = np.loadtxt(path)
    assert data.shape == (22, 5)
    t = data[:, 0]
    assert np.all(np.diff(t) > 0) and t[-1] == 20
    assert np.max(np.abs(data[:, 1] - (1 + np.exp(-t)))) <= 1e-10
    assert data[0, 1] == pytest.approx(2, abs=1e-12)
    assert data[20, 1] == pytest.approx(1 + math.exp(-5), abs=1e-12)


def test_catalog_listing(capsys):
    code, out, _ = run(capsys, "catalog", "--dim", "2")
    assert code == 0 and "sum_powers" in out and "INVALID" not in out
    code, out, _ = run(capsys, "catalog", "--entry", "bad=re(z1):psh:circ")
    assert code == 1 and "INVALID" in out


def test_csv_format(tmp_path, capsys):
    path = tmp_path / "out.csv"
    code, _, _ = run(capsys, "run", "--suite", "correlation", "--format", "csv", "--report", str(path))
    assert code == 0
    rows = path.read_text().splitlines()
    assert rows[0].startswith("suite,identity,f,g,dim,method,lhs,rhs")
    assert any("-0.5+0.0i" in r for r in rows[1:])


def test_replay_is_byte_identical(tmp_path, capsys):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert run(capsys, "run", "--dim", "3", "--suite", "correlation", "--samples", "50000", "--seed", "9",
                   "--report", str(p))[0] == 0
    a, b = (p.read_text() for p in paths)
    assert a != b or "timestamp" in a
    assert strip_timestamp(a) == strip_timestamp(b)
    assert '"method": "mc"' in a


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "pshgauss", "eval", "--expr", "exp(z1)", "--at", "0"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "1+0i"
