import json
import subprocess
import sys

import numpy as np
import pytest

from smoothlab import cli, verify
from smoothlab.verify import CheckReport


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    lines = text.strip().splitlines()
    return lines[0].split(","), [ln for ln in lines[1:]]


class TestTranslate:
    def test_constant_column(self, capsys):
        code, out, _ = run(capsys, "translate", "--function", "const", "--delta", "0.7")
        header, body = rows(out)
        assert code == 0
        assert header[:7] == cli.HEADER
        vals = np.array([float(r.split(",")[6]) for r in body])
        assert len(vals) == 257 and np.allclose(vals, 1.0, atol=1e-10)

    def test_pi_fractions(self, capsys):
        _, out, _ = run(capsys, "translate", "--function", "identity", "--delta", "pi/4", "--format", "json")
        data = json.loads(out)
        s = data["series"][0]
        assert s["t"] == pytest.approx(np.pi / 4)
        assert np.allclose(s["value"], np.array(s["x"]) * np.cos(np.pi / 4) ** 3, atol=1e-8)


class TestConfig:
    def test_flags_override_file(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"function_id": "identity", "p": "inf", "alpha": 1, "beta": 1,
                                   "n_list": [1, 2, 3]}))
        _, out, _ = run(capsys, "bestapprox", "--config", str(cfg), "--n", "1,2")
        header, body = rows(out)
        assert len(body) == 2
        assert body[0].split(",")[:4] == ["identity", "inf", "1.0", "1.0"]

    def test_unknown_key(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text('{"colour": 1}')
        code, _, err = run(capsys, "modulus", "--config", str(cfg))
        assert code == 2 and "colour" in err

    def test_unknown_function(self, capsys):
        code, _, err = run(capsys, "translate", "--function", "nope")
        assert code == 2 and "unknown function" in err

    def test_invalid_params(self, capsys):
        code, _, err = run(capsys, "bestapprox", "--p", "0.5")
        assert code == 2


class TestOutputs:
    def test_deterministic_csv(self, tmp_path):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for p in paths:
            cli.main(["modulus", "--function", "abspow:a=0.3,s=1.5", "--r", "1", "--delta", "0.4,0.2,0.1",
                      "--out", str(p)])
        assert paths[0].read_bytes() == paths[1].read_bytes()
        assert (tmp_path / "a.summary.json").exists()
        header, body = rows(paths[0].read_text())
        assert header == cli.HEADER and len(body) == 3

    def test_bestapprox_rows(self, capsys):
        _, out, _ = run(capsys, "bestapprox", "--function", "abspow:a=0,s=1", "--n", "4,8,16")
        _, body = rows(out)
        ns = [int(r.split(",")[-2]) for r in body]
        vals = [float(r.split(",")[-1]) for r in body]
        assert ns == [4, 8, 16] and vals == sorted(vals, reverse=True)

    def test_workers_same_output(self, capsys):
        _, a, _ = run(capsys, "bestapprox", "--n", "2,4,8")
        _, b, _ = run(capsys, "bestapprox", "--n", "2,4,8", "--workers", "2")
        assert a == b


class TestJackson:
    def test_degree_report_matches_check(self, capsys):
        _, out, _ = run(capsys, "jackson", "--n", "8,16", "--q", "2", "--format", "json")
        data = json.loads(out)
        for item in data["approximants"]:
            rep = verify.check_degree_Q("abspow:a=0,s=1", 2, 2, item["m"]).to_dict()
            assert item["degree_check"] == rep
            assert item["degree"] == (2 + 2) * (item["m"] - 1)


class TestVerify:
    def test_subset_passes(self, capsys):
        code, out, _ = run(capsys, "verify", "--checks", "evenness,degree_Q", "--format", "json")
        data = json.loads(out)
        assert code == 0 and data["passed"] and [r["name"] for r in data["reports"]] == ["evenness", "degree_Q"]

    def test_failure_sets_exit_code(self, capsys, monkeypatch):
        monkeypatch.setitem(verify.CHECKS, "always_fails", lambda: CheckReport("always_fails", False, 1.0))
        code, out, _ = run(capsys, "verify", "--checks", "degree_Q,always_fails")
        assert code == 1
        assert "always_fails" in out and "false" in out

    def test_report_to_file(self, tmp_path, capsys):
        path = tmp_path / "r.json"
        code, out, _ = run(capsys, "verify", "--checks", "degree_Q", "--format", "json", "--out", str(path))
        assert code == 0 and out == ""
        assert json.loads(path.read_text())["reports"][0]["name"] == "degree_Q"


class TestEquivalence:
    def test_constant_degenerate(self, capsys):
        code, out, err = run(capsys, "equivalence", "--function", "const", "--n", "4,8,16",
                             "--delta", "0.5,0.25,0.125")
        summary = json.loads(err)
        assert code == 0 and summary["status"] == "degenerate: constant function"
        assert "lambda_E" not in summary
        _, body = rows(out)
        assert all(float(r.split(",")[6]) == 0.0 for r in body)

    def test_polynomial_degenerate(self, capsys):
        code, out, _ = run(capsys, "equivalence", "--function", "jacobi:n=3", "--n", "8,16,32",
                           "--delta", "0.5,0.25,0.125", "--format", "json")
        data = json.loads(out)
        assert code == 0 and data["status"] == "degenerate: polynomial input"
        assert all(e["value"] == 0.0 for e in data["E"])

    def test_inadmissible(self, capsys):
        code, _, err = run(capsys, "equivalence", "--p", "1", "--alpha", "3", "--beta", "1")
        assert code == 2 and "alpha <= 2" in err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "smoothlab", "translate", "--function", "const", "--delta",
                          "0.3"], capture_output=True, text=True, check=True)
    assert res.stdout.startswith("function_id,p,alpha,beta,r,scale,value")
