import csv
import io
import json

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from pathball.cli import main
from pathball.service.app import app

CLIENT = TestClient(app)

FAST_VERIFY = {"n_values": [4], "lipschitz_pairs": 100, "verify_paths": 10,
               "verify_triples": 2, "grid_points": 11, "seed": 7}
FAST_INVARIANCE = {"n_values": [8], "samples": 8, "witness_anchors": 2,
                   "seed": 7}
FAST_CONCENTRATION = {"n_values": [8], "samples": 32, "seed": 7}
FAST_JACOBIAN = {"jacobian_points": 2, "seed": 7}


class TestEndpoints:
    def test_health(self):
        resp = CLIENT.get("/health")
        assert resp.status_code == 200
        body = resp.json()
        assert body["status"] == "ok"
        assert body["version"].startswith("pathball-")

    def test_verify(self):
        resp = CLIENT.post("/experiments/verify", json=FAST_VERIFY)
        assert resp.status_code == 200
        body = resp.json()
        assert body["experiment"] == "verify"
        assert body["passed"] is True
        assert {c["name"] for c in body["checks"]} >= {
            "exp_lipschitz", "associativity", "inverse_law"}
        assert body["provenance"]["seed"] == 7

    def test_invariance(self):
        resp = CLIENT.post("/experiments/invariance", json=FAST_INVARIANCE)
        assert resp.status_code == 200
        rows = resp.json()["rows"]
        assert len(rows) == 1
        assert rows[0]["n"] == 8
        assert 0.0 <= rows[0]["mk_value"] <= 1.0

    def test_concentration(self):
        resp = CLIENT.post("/experiments/concentration", json=FAST_CONCENTRATION)
        assert resp.status_code == 200
        body = resp.json()
        assert "decay_rates" in body["summary"]
        assert "tail_0.15" in body["rows"][0]

    def test_jacobian(self):
        resp = CLIENT.post("/experiments/jacobian", json=FAST_JACOBIAN)
        assert resp.status_code == 200
        rows = resp.json()["rows"]
        assert len(rows) == 4
        assert all(r["deviation"] <= 1e-6 for r in rows)

    def test_defaults_accepted(self):
        resp = CLIENT.post("/experiments/jacobian",
                           json={"jacobian_points": 1})
        assert resp.status_code == 200

    def test_bad_config_422(self):
        resp = CLIENT.post("/experiments/invariance",
                           json={**FAST_INVARIANCE, "alpha": 0.4})
        assert resp.status_code == 422
        assert "alpha" in resp.json()["detail"]

    def test_bad_partition_422(self):
        resp = CLIENT.post("/experiments/invariance",
                           json={**FAST_INVARIANCE, "n_values": [12]})
        assert resp.status_code == 422

    def test_wrong_type_422(self):
        resp = CLIENT.post("/experiments/verify", json={"samples": "lots"})
        assert resp.status_code == 422

    def test_deterministic_across_calls(self):
        a = CLIENT.post("/experiments/concentration", json=FAST_CONCENTRATION)
        b = CLIENT.post("/experiments/concentration", json=FAST_CONCENTRATION)
        assert a.json() == b.json()


def write_config(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


class TestCli:
    def test_verify_pass_output(self, tmp_path):
        cfg = write_config(tmp_path, "v.cfg", (
            "n_values = 4\nlipschitz_pairs = 100\nverify_paths = 10\n"
            "verify_triples = 2\ngrid_points = 11\nseed = 7\n"))
        result = CliRunner().invoke(main, ["verify", "--config", cfg])
        assert result.exit_code == 0, result.output
        assert result.output.count("PASS") >= 9
        assert "overall: PASS" in result.output
        assert "FAIL" not in result.output

    def test_verify_json_format(self, tmp_path):
        cfg = write_config(tmp_path, "v.cfg", (
            "n_values = 4\nlipschitz_pairs = 100\nverify_paths = 10\n"
            "verify_triples = 2\ngrid_points = 11\n"))
        result = CliRunner().invoke(main, ["verify", "--config", cfg,
                                           "--format", "json"])
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body["passed"] is True

    def test_jacobian_csv(self, tmp_path):
        cfg = write_config(tmp_path, "j.cfg", "jacobian_points = 2\nseed = 7\n")
        result = CliRunner().invoke(main, ["jacobian", "--config", cfg])
        assert result.exit_code == 0, result.output
        rows = list(csv.DictReader(io.StringIO(result.output)))
        assert len(rows) == 4
        assert {r["map"] for r in rows} == {"inverse", "phi"}
        assert all(float(r["deviation"]) <= 1e-6 for r in rows)

    def test_invariance_json_lines(self, tmp_path):
        cfg = write_config(tmp_path, "i.cfg", (
            "n_values = 8\nsamples = 8\nwitness_anchors = 2\nseed = 7\n"))
        result = CliRunner().invoke(main, ["invariance", "--config", cfg,
                                           "--format", "json"])
        assert result.exit_code == 0, result.output
        rows = [json.loads(line) for line in result.output.splitlines()]
        assert rows[0]["n"] == 8

    def test_concentration_summary_line(self, tmp_path):
        cfg = write_config(tmp_path, "c.cfg",
                           "n_values = 8\nsamples = 32\nseed = 7\n")
        result = CliRunner().invoke(main, ["concentration", "--config", cfg,
                                           "--format", "json"])
        assert result.exit_code == 0, result.output
        lines = [json.loads(line) for line in result.output.splitlines()]
        assert "summary" in lines[-1]

    def test_out_file(self, tmp_path):
        cfg = write_config(tmp_path, "j.cfg", "jacobian_points = 1\n")
        out = tmp_path / "report.csv"
        result = CliRunner().invoke(main, ["jacobian", "--config", cfg,
                                           "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert out.exists() and "det" in out.read_text()

    def test_seed_override(self, tmp_path):
        cfg = write_config(tmp_path, "j.cfg", "jacobian_points = 1\nseed = 1\n")
        runner = CliRunner()
        a = runner.invoke(main, ["jacobian", "--config", cfg, "--seed", "2",
                                 "--format", "json"])
        b = runner.invoke(main, ["jacobian", "--config", cfg, "--format", "json"])
        assert json.loads(a.output.splitlines()[0])["seed"] == 2
        assert json.loads(b.output.splitlines()[0])["seed"] == 1

    def test_config_error_message_and_exit(self, tmp_path):
        cfg = write_config(tmp_path, "bad.cfg", "n_values =\n")
        result = CliRunner().invoke(main, ["invariance", "--config", cfg])
        assert result.exit_code == 1
        assert "config error: n_values must not be empty" in result.output

    def test_missing_config_file(self):
        result = CliRunner().invoke(main, ["verify", "--config", "/no/such"])
        assert result.exit_code == 2

    def test_help_lists_commands(self):
        result = CliRunner().invoke(main, ["--help"])
        assert result.exit_code == 0
        for cmd in ("verify", "invariance", "concentration", "jacobian",
                    "serve"):
            assert cmd in result.output
