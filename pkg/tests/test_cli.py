import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from pvikit.cli import SCHEMA, main, run


def _write(tmp_path, doc):
    p = tmp_path / "job.json"
    p.write_text(json.dumps(doc))
    return p


THETA_GENERIC = {"theta0": [0.11, 0.0], "thetax": [0.17, 0.0],
                 "theta1": [0.23, 0.0], "thetainf": [1.31, 0.0]}


def _fullexp_traces():
    # cubic-consistent traces with p0x = 0 for the generic theta above
    from pvikit.monodromy import ThetaVector, TraceSet, solve_third_trace
    t = ThetaVector(0.11, 0.17, 0.23, 1.31)
    base = TraceSet.from_theta(t, 0.0, 0.4, 0.0)
    p01 = solve_third_trace(base)[0]
    s = TraceSet.from_theta(t, 0.0, 0.4, p01)
    return s.to_json()


class TestClassifyCommand:
    def test_fullexp_row(self, tmp_path):
        doc = {"schema": SCHEMA, "theta": THETA_GENERIC, "traces": _fullexp_traces()}
        out = run("classify", doc, tmp_path / "out")
        tags = {k["point"]: k["tag"] for k in out["kinds"]}
        assert tags["0"] == "FullExp"
        assert (tmp_path / "out" / "result.json").exists()

    def test_exit_codes(self, tmp_path):
        job = _write(tmp_path, {"schema": SCHEMA, "theta": THETA_GENERIC,
                                "traces": _fullexp_traces()})
        rc = main(["classify", "--input", str(job), "--output", str(tmp_path / "o1")])
        assert rc == 0
        bad = _write(tmp_path, {"schema": SCHEMA, "theta": THETA_GENERIC})
        assert main(["classify", "--input", str(bad), "--output", str(tmp_path / "o2")]) == 2
        tr = _fullexp_traces()
        tr["p01"] = [tr["p01"][0] + 0.3, tr["p01"][1]]
        off = _write(tmp_path, {"schema": SCHEMA, "theta": THETA_GENERIC, "traces": tr})
        assert main(["classify", "--input", str(off), "--output", str(tmp_path / "o3")]) == 3


class TestExpandCommand:
    def test_davidekan_beta_zero_all_zero(self, tmp_path):
        doc = {
            "schema": SCHEMA,
            "theta": {"theta0": [0.0, 0.0], "thetax": [0.41, 0.0],
                      "theta1": [0.3, 0.0], "thetainf": [1.6, 0.0]},
            "descriptor": {"kind": {"tag": "Davidekan", "point": "0", "k": 2},
                           "constants": {}},
        }
        out = run("expand", doc, tmp_path / "out", order=6)
        assert out["expansion"]["terms"] == []

    def test_fullexp_with_samples(self, tmp_path):
        doc = {
            "schema": SCHEMA, "theta": THETA_GENERIC,
            "descriptor": {"kind": {"tag": "FullExp", "point": "0"},
                           "constants": {"sigma": [0.4, 0.05], "a": [1.0, 0.2]}},
            "samples": [[0.01, 0.0], [0.02, 0.0]],
            "radius": 0.1,
        }
        out = run("expand", doc, tmp_path / "out", order=6)
        assert out["values_csv"] == "values.csv"
        lines = (tmp_path / "out" / "values.csv").read_text().splitlines()
        assert lines[0] == "x_re,x_im,y_re,y_im,dy_re,dy_im"
        assert len(lines) == 3


class TestConnectCommand:
    def test_descriptors_at_all_points(self, tmp_path):
        doc = {"schema": SCHEMA, "theta": THETA_GENERIC, "traces": _fullexp_traces()}
        out = run("connect", doc, tmp_path / "out")
        assert len(out["descriptors"]) == 3
        assert "fricke_residual" in out
        for d in out["descriptors"]:
            assert "error" not in d


class TestTransformCommand:
    def test_sym2(self, tmp_path):
        doc = {"schema": SCHEMA, "theta": THETA_GENERIC, "element": "Sym2",
               "traces": _fullexp_traces()}
        out = run("transform", doc, tmp_path / "out")
        assert abs(out["traces"]["p0x"][0] - (-_fullexp_traces()["p0x"][0])) < 1e-12
        res = out["fricke_residual"]
        assert math.hypot(*res) < 1e-8


class TestVerifyCommand:
    def test_sqrt_configuration(self, tmp_path):
        doc = {
            "schema": SCHEMA,
            "coefficients": {"alpha": [0.125, 0], "beta": [-0.125, 0],
                             "gamma": [0.125, 0], "delta": [0.375, 0]},
            "descriptor": {"kind": {"tag": "FullExp", "point": "0"},
                           "constants": {"sigma": [0.5, 0.0], "a": [-0.1875, 0.0]}},
            "point": "1",
            "x_seed": [0.01, 0.0],
            "x_end": [0.9, 0.0],
        }
        out = run("verify", doc, tmp_path / "out", tol=1e-4, order=12)
        assert out["pass"], out
        assert out["mismatch"] < 1e-4


class TestSampleCubic:
    def test_determinism(self, tmp_path):
        doc = {"schema": SCHEMA, "theta": THETA_GENERIC, "count": 5}
        out1 = run("sample-cubic", doc, tmp_path / "a", seed=42)
        out2 = run("sample-cubic", doc, tmp_path / "b", seed=42)
        assert (tmp_path / "a" / "result.json").read_text() == (
            tmp_path / "b" / "result.json").read_text()
        assert len(out1["samples"]) == 5
        for s in out1["samples"]:
            assert math.hypot(*s["fricke_residual"]) < 1e-8

    def test_seed_changes_output(self, tmp_path):
        doc = {"schema": SCHEMA, "theta": THETA_GENERIC, "count": 3}
        out1 = run("sample-cubic", doc, tmp_path / "a", seed=1)
        out2 = run("sample-cubic", doc, tmp_path / "b", seed=2)
        assert out1["samples"] != out2["samples"]


class TestConsoleEntry:
    def test_subprocess_invocation(self, tmp_path):
        job = _write(tmp_path, {"schema": SCHEMA, "theta": THETA_GENERIC,
                                "traces": _fullexp_traces()})
        proc = subprocess.run(
            [sys.executable, "-m", "pvikit.cli", "classify", "--input", str(job),
             "--output", str(tmp_path / "out"), "--point", "0"],
            capture_output=True, text=True)
        assert proc.returncode == 0
        data = json.loads((tmp_path / "out" / "result.json").read_text())
        assert data["kinds"][0]["tag"] == "FullExp"
