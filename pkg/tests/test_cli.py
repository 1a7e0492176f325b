import json
import subprocess
import sys

import numpy as np
import pytest

from spheredist import __version__
from spheredist.cli import main
from spheredist.lattice_sphere import enumerate_sphere
from spheredist.spectral import sigma_hat


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_enumerate(capsys):
    code, out, _ = run(["enumerate", "--dim", "5", "--lambda-max", "2"], capsys)
    assert code == 0 and out == "lambda,count\n0,1\n1,10\n2,40\n"
    code, out, _ = run(["enumerate", "--dim", "5", "--lambda-max", "0"], capsys)
    assert out == "lambda,count\n0,1\n"
    code, _, err = run(["enumerate", "--dim", "0", "--lambda-max", "2"], capsys)
    assert code == 2 and "dim" in err


def test_enumerate_json(capsys):
    code, out, _ = run(["enumerate", "--dim", "3", "--lambda-max", "3", "--format", "json", "--no-timestamp"], capsys)
    doc = json.loads(out)
    assert doc["version"] == __version__ and doc["result"]["rows"][3] == {"lambda": 3, "count": 8}


def test_expsum_deterministic(tmp_path, capsys):
    args = ["expsum", "--dim", "5", "--lambda", "50", "--q-cap", "4", "--samples", "700", "--seed", "4"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b), "--threads", "4"]) == 0
    da, db = json.loads(a.read_text()), json.loads(b.read_text())
    assert da.pop("timestamp") and db.pop("timestamp")
    assert da == db
    assert main(args + ["--out", str(a), "--no-timestamp"]) == 0
    assert main(args + ["--out", str(b), "--no-timestamp"]) == 0
    assert a.read_bytes() == b.read_bytes()
    res = da["result"]
    assert res["lambda"] == 50 and res["q_cap"] == 4 and res["seed"] == 4 and res["n_samples"] == 700


def test_expsum_lambda_one_recount(capsys):
    # At lam = 1 the arcs cover the torus, so sample inside them.
    code, out, _ = run(["expsum", "--dim", "5", "--lambda", "1", "--samples", "20", "--inside-arcs", "--no-timestamp"],
                       capsys)
    assert code == 0
    res = json.loads(out)["result"]
    xi = np.array(res["argmax_xi"])
    hand = sum(np.exp(-2j * np.pi * (xi @ np.array(p))) for p in enumerate_sphere(5, 1)) / 10
    assert abs(hand) == pytest.approx(res["max_abs"], abs=1e-12)


def test_expsum_inside_arcs(capsys):
    base = ["expsum", "--dim", "5", "--lambda", "100", "--q-cap", "4", "--samples", "400", "--no-timestamp"]
    code, out, _ = run(base + ["--inside-arcs"], capsys)
    inside = json.loads(out)["result"]
    code2, out, _ = run(base, capsys)
    outside = json.loads(out)["result"]
    assert code == code2 == 0 and inside["inside_arcs"] and not outside["inside_arcs"]
    assert inside["max_abs"] > 5 * outside["max_abs"]


def test_expsum_arcs_cover_torus(capsys):
    code, _, err = run(["expsum", "--dim", "5", "--lambda", "1", "--samples", "10"], capsys)
    assert code == 2 and "covers the torus" in err


def test_verify_modes(capsys):
    base = ["verify", "--set", "congruence:r=2", "--dim", "5", "--side", "8", "--no-timestamp"]
    code, out, _ = run(base + ["--mode", "unpinned", "--q", "2", "--lambda", "3"], capsys)
    res = json.loads(out)["result"]
    assert code == 0 and res["holds"] and res["best_ratio"] == 1.0
    code, out, _ = run(base + ["--mode", "identity", "--lambda", "2"], capsys)
    assert code == 0 and json.loads(out)["result"]["residual"] <= 1e-8
    code, out, _ = run(base + ["--mode", "pinned", "--q", "2", "--lambda0", "1", "--lambda1", "3"], capsys)
    assert json.loads(out)["result"]["pinned_x"] == [2] * 5
    code, out, _ = run(base + ["--mode", "dichotomy", "--lambda", "3", "--q", "3"], capsys)
    assert code == 0 and "branch_ii" in json.loads(out)["result"]
    code, out, _ = run(base + ["--mode", "dichotomy-pinned", "--lambda0", "2", "--lambda1", "3", "--q", "3"], capsys)
    assert code == 0 and json.loads(out)["result"]["kind"] == "pinned"
    code, _, err = run(base + ["--mode", "unpinned"], capsys)
    assert code == 2 and "--lambda" in err


def test_verify_file_and_parse_error(tmp_path, capsys):
    good = tmp_path / "a.txt"
    good.write_text("2 4 0 0 periodic\n1 1\n2 2\n3 3\n")
    code, out, _ = run(["verify", "--mode", "identity", "--in", str(good), "--lambda", "2"], capsys)
    assert code == 0 and json.loads(out)["result"]["ok"]
    bad = tmp_path / "b.txt"
    bad.write_text("2 4 0 0 periodic\n1 1\n1 1\n")
    code, _, err = run(["verify", "--mode", "identity", "--in", str(bad), "--lambda", "2"], capsys)
    assert code == 2 and "line 3" in err
    code, _, err = run(["verify", "--mode", "identity", "--lambda", "2"], capsys)
    assert code == 2


def test_increment(capsys):
    code, out, _ = run(["increment", "--set", "full", "--dim", "2", "--side", "12"], capsys)
    assert code == 0 and len(out.strip().splitlines()) == 2
    code, out, _ = run(["increment", "--set", "congruence:r=2", "--dim", "3", "--side", "12"], capsys)
    rows = out.strip().splitlines()
    assert len(rows) == 3 and rows[-1].split(",")[2] == "1.0" and rows[-1].endswith("uniform")
    code, out, _ = run(["increment", "--set", "congruence:r=2", "--dim", "3", "--side", "12", "--max-steps", "0"], capsys)
    assert out.strip().splitlines()[-1].endswith("budget exhausted")


def test_replay(tmp_path, capsys):
    rep = tmp_path / "r.json"
    assert main(["verify", "--mode", "unpinned", "--set", "bernoulli:p=0.3,seed=2", "--dim", "3", "--side", "6",
                 "--lambda", "2", "--out", str(rep)]) == 0
    capsys.readouterr()
    code, out, _ = run(["replay", str(rep)], capsys)
    assert code == 0 and out == "identical\n"
    doc = json.loads(rep.read_text())
    doc["result"]["best_ratio"] = 0.123
    rep.write_text(json.dumps(doc))
    code, out, _ = run(["replay", str(rep)], capsys)
    assert code == 1 and out == "differs\n"


def test_internal_error_exit_code(monkeypatch, capsys):
    import spheredist.cli as cli

    def boom(args):
        raise RuntimeError("boom")

    monkeypatch.setattr(cli, "cmd_enumerate", boom)
    parser = cli.build_parser()
    args = parser.parse_args(["enumerate", "--lambda-max", "1"])
    args.handler = boom
    monkeypatch.setattr(cli, "build_parser", lambda: type("P", (), {"parse_args": lambda self, a: args})())
    code, _, err = run([], capsys)
    assert code == 1 and "internal error" in err


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "spheredist", "enumerate", "--dim", "1", "--lambda-max", "4"],
                         capture_output=True, text=True, check=True).stdout
    assert out == "lambda,count\n0,1\n1,2\n2,0\n3,0\n4,2\n"
