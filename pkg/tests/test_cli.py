import json
import shutil
import subprocess

import pytest

from dhardy import __version__
from dhardy.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_energy(capsys):
    code, out, _ = run(capsys, "energy", "--freq", "int", "--set", "1..3", "--k", "2")
    doc = json.loads(out)
    assert code == 0
    assert doc["result"]["count"] == "19"
    assert doc["tool"] == "dhardy" and doc["version"] == __version__
    assert doc["config"]["seed"] == 0 and "budget" in doc["config"]
    assert "threads" not in doc["config"] and "out" not in doc["config"]


def test_norm_rs1(capsys):
    code, out, _ = run(capsys, "norm", "--poly", "rs:1", "--p", "inf")
    res = json.loads(out)["result"]
    assert code == 0 and res["value"] == pytest.approx(2.0, abs=1e-12)
    assert res["method"] and res["certainty"]


def test_norm_indicator_and_file(capsys, tmp_path):
    code, out, _ = run(capsys, "norm", "--freq", "logprimes", "--set", "1..4", "--p", "4")
    assert json.loads(out)["result"]["value"] == pytest.approx(28 ** 0.25, rel=1e-14)
    code, out, _ = run(capsys, "kernel", "--N", "3")
    path = tmp_path / "d3.json"
    path.write_text(json.dumps(json.loads(out)["result"]))
    code, out, _ = run(capsys, "norm", "--poly", str(path), "--p", "4")
    assert json.loads(out)["result"]["value"] == pytest.approx(19 ** 0.25, rel=1e-14)


def test_phi(capsys):
    code, out, _ = run(capsys, "phi", "--which", "u", "--p", "inf", "--N", "5",
                       "--freq", "int:12", "--pool", "1..12")
    res = json.loads(out)["result"]
    assert code == 0 and res[0]["value"] == 5 and res[0]["certainty"] == "exact"


def test_phi_range_csv(capsys):
    code, out, _ = run(capsys, "phi", "--which", "l", "--p", "2", "--N", "2:4",
                       "--freq", "int:6", "--pool", "1..6", "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0].startswith("which,p,N") and len(lines) == 4


def test_rs_and_kernel(capsys):
    code, out, _ = run(capsys, "rs", "--k", "1")
    assert json.loads(out)["result"]["coeffs"] == [[1, -1.0, 0.0], [2, 1.0, 0.0]]
    code, out, _ = run(capsys, "kernel", "--N", "2")
    assert json.loads(out)["result"]["coeffs"] == [[1, 1.0, 0.0], [2, 1.0, 0.0]]


def test_check_hy_csv(capsys):
    code, out, _ = run(capsys, "check", "hy", "--trials", "3", "--seed", "4")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0].split(",")[:3] == ["poly", "terms", "p"]
    assert all(l.endswith("True") for l in lines[1:])


def test_check_khinchin(capsys):
    code, out, _ = run(capsys, "check", "khinchin", "--freq", "logprimes", "--set", "1..6",
                       "--p", "4", "--trials", "2", "--format", "json")
    res = json.loads(out)["result"][0]
    assert res["min"] == pytest.approx(((2 * 36 - 6) / 36) ** 0.25, rel=1e-14)


def test_verify_and_out_file(capsys, tmp_path):
    path = tmp_path / "rep.json"
    code, out, _ = run(capsys, "verify", "--theorem", "ordinary", "--p", "2,4", "--N", "16:256:geom",
                       "--out", str(path))
    assert code == 0 and out == ""
    rep = json.loads(path.read_text())
    assert rep["result"]["summary"]["all_pass"]


def test_verify_thread_invariance(capsys):
    texts = []
    for t in ("1", "4"):
        code, out, _ = run(capsys, "verify", "--p", "4/3,inf", "--N", "16:256:geom", "--threads", t)
        texts.append(out)
    assert texts[0] == texts[1]


@pytest.mark.parametrize("argv", [
    ["energy", "--freq", "bogus", "--set", "1..3", "--k", "2"],
    ["energy", "--freq", "int", "--set", "x..y", "--k", "2"],
    ["norm", "--poly", "/nonexistent/file.json"],
    ["norm", "--poly", "rs:2", "--p", "1/2"],
    ["norm", "--poly", "rs:2", "--p", "3", "--method", "exact-even"],
    ["phi", "--which", "zz", "--freq", "int:4", "--pool", "1..4", "--N", "2"],
    ["phi", "--p", "4", "--freq", "int:40", "--pool", "1..40", "--N", "12", "--budget", "100"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("dhardy: error:")


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["energy", "--k", "2"])
    assert exc.value.code == 2


def test_bad_json_reports_location(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"freq": "int:3",\n "coeffs": [[1, 1.0],, ]}')
    code, _, err = run(capsys, "norm", "--poly", str(path))
    assert code == 2 and "line 2" in err


@pytest.mark.skipif(shutil.which("dhardy") is None, reason="console script not installed")
def test_console_script():
    r = subprocess.run(["dhardy", "energy", "--freq", "int", "--set", "1..3", "--k", "2"],
                       capture_output=True, text=True, check=True)
    assert json.loads(r.stdout)["result"]["count"] == "19"
