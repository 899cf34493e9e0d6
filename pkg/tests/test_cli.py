import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from mptk import cli
from mptk.mmio import write_matrix
from mptk.pipeline import eig_verify, svd_verify

A2 = np.diag([0.0, 3.0])
DA2 = np.array([[0.0, 0.1], [0.1, 0.0]])


@pytest.fixture()
def files(tmp_path):
    def make(**mats):
        out = {}
        for name, M in mats.items():
            p = tmp_path / f"{name}.mtx"
            write_matrix(p, M)
            out[name] = str(p)
        return out
    return make


def run(argv, capsys):
    code = cli.main(argv)
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_eig_verify_matches_library(files, capsys):
    f = files(a=A2, da=DA2)
    code, out, _ = run(["eig-verify", "--a", f["a"], "--da", f["da"], "--partition", "1,1"],
                       capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == "mptk/1" and doc["summary"]["ok"]
    assert len(doc["inputs"]["a"]["sha256"]) == 64
    v = eig_verify(A2, DA2, (1, 1), 1025)
    assert len(doc["reports"]) == len(v.reports)
    for got, want in zip(doc["reports"], v.reports):
        assert got["bound_id"] == want.bound_id.value
        assert abs(got["slack"] - want.slack) <= 1e-12
        assert got["lhs"] == want.lhs and got["rhs"] == want.rhs


def test_eig_verify_zero_perturbation(files, capsys):
    f = files(a=A2, da=np.zeros((2, 2)))
    code, out, _ = run(["eig-verify", "--a", f["a"], "--da", f["da"], "--partition", "1,1",
                        "--grid", "17"], capsys)
    assert code == 0
    doc = json.loads(out)
    for r in doc["reports"]:
        if r["bound_id"] != "GapLower":
            assert r["lhs"] == 0.0


def test_bad_partition_exits_two(files, capsys):
    f = files(a=A2, da=DA2)
    code, out, err = run(["eig-verify", "--a", f["a"], "--da", f["da"], "--partition", "1,2"],
                         capsys)
    assert code == 2 and out == ""
    assert "CountMismatch" in err
    code, _, err = run(["eig-verify", "--a", f["a"], "--da", f["da"], "--partition", "1,x"],
                       capsys)
    assert code == 2


def test_parse_error_exits_two(tmp_path, capsys):
    bad = tmp_path / "bad.mtx"
    bad.write_text("%%MatrixMarket matrix array real general\n2 2\n1\n")
    code, _, err = run(["eig-verify", "--a", str(bad), "--da", str(bad), "--partition", "2"],
                       capsys)
    assert code == 2 and "ParseError" in err


def test_missing_file_exits_two(capsys):
    code, _, err = run(["eig-verify", "--a", "/nonexistent.mtx", "--da", "/nonexistent.mtx",
                        "--partition", "1"], capsys)
    assert code == 2 and err.startswith("mptk: error")


def test_target_block_and_out(files, tmp_path, capsys):
    f = files(a=A2, da=DA2)
    out = tmp_path / "r.json"
    code, stdout, _ = run(["eig-verify", "--a", f["a"], "--da", f["da"], "--partition", "1,1",
                           "--target-block", "2", "--grid", "65", "--out", str(out)], capsys)
    assert code == 0 and stdout == ""
    doc = json.loads(out.read_text())
    blocks = {r["block"] for r in doc["reports"] if r["bound_id"] == "CombinedSingle"}
    assert blocks == {1}
    code, _, _ = run(["eig-verify", "--a", f["a"], "--da", f["da"], "--partition", "1,1",
                      "--target-block", "3"], capsys)
    assert code == 2


def test_svd_verify_matches_library(files, capsys):
    rng = np.random.default_rng(0)
    B = np.vstack([np.diag([3.0, 1.0]), np.zeros((1, 2))])
    dB = 0.05 * rng.standard_normal((3, 2))
    f = files(b=B, db=dB)
    code, out, _ = run(["svd-verify", "--b", f["b"], "--db", f["db"], "--partition", "1,1",
                        "--grid", "129"], capsys)
    assert code == 0
    doc = json.loads(out)
    v = svd_verify(B, dB, (1, 1), 129)
    for got, want in zip(doc["reports"], v.reports):
        assert abs(got["slack"] - want.slack) <= 1e-12
    assert doc["gaps"]["square"] is False


def test_output_is_reproducible(files, capsys):
    f = files(a=A2, da=DA2)
    argv = ["eig-verify", "--a", f["a"], "--da", f["da"], "--partition", "1,1", "--grid", "65"]
    assert run(argv, capsys)[1] == run(argv, capsys)[1]


def test_infinite_values_serialize_as_null(files, capsys):
    f = files(a=A2, da=DA2)
    code, out, _ = run(["eig-verify", "--a", f["a"], "--da", f["da"], "--partition", "2",
                        "--grid", "33"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["gaps"]["delta"]["path_minima"] == [None]


def test_track_dump(files, tmp_path, capsys):
    f = files(a=A2, da=DA2)
    dump = tmp_path / "path.json"
    code, _, _ = run(["track", "--a", f["a"], "--da", f["da"], "--partition", "1,1",
                      "--grid", "9", "--dump-path", str(dump)], capsys)
    assert code == 0
    doc = json.loads(dump.read_text())
    assert doc["kind"] == "hermitian" and len(doc["t"]) == len(doc["eigenvalues"])
    assert np.array(doc["bases"]["real"]).shape == (len(doc["t"]), 2, 2)
    code, _, _ = run(["track", "--a", f["a"], "--partition", "1,1"], capsys)
    assert code == 2


def test_suite_command(tmp_path, capsys):
    cfg = tmp_path / "suite.json"
    cfg.write_text(json.dumps({"suites": [
        {"kind": "hermitian", "trials": 2, "grid_points": 33},
        {"kind": "general", "trials": 2, "grid_points": 33}]}))
    code, out, _ = run(["suite", "--config", str(cfg)], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["ok"] and [s["kind"] for s in doc["suites"]] == ["hermitian", "general"]
    cfg.write_text("{not json")
    assert run(["suite", "--config", str(cfg)], capsys)[0] == 2


def test_compare_csv(files, capsys):
    f = files(a=A2, da=DA2)
    code, out, _ = run(["compare", "--a", f["a"], "--da", f["da"], "--partition", "1,1",
                        "--scales", "1,0.5", "--grid", "33"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert {r["scale"] for r in rows} == {"1.0", "0.5"}
    names = {r["bound_id"] for r in rows}
    assert {"HW^2", "CombinedAll", "DK"} <= names


def test_module_entry_point(files):
    f = files(a=A2, da=DA2)
    proc = subprocess.run([sys.executable, "-m", "mptk", "eig-verify", "--a", f["a"],
                           "--da", f["da"], "--partition", "1,2"],
                          capture_output=True, text=True)
    assert proc.returncode == 2 and "CountMismatch" in proc.stderr
