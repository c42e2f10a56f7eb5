import json

import numpy as np
import pytest

from gaussequiv import cli
from gaussequiv.mle import ConsistencyReport


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload, indent=2))
    return path


def run(argv):
    return cli.main([str(a) for a in argv])


JDIV_BROWNIAN = {
    "kernel1": {"variant": "brownian", "sigma": 1.0},
    "kernel2": {"variant": "brownian", "sigma": 2.0},
    "designs": {"type": "dyadic_interval", "max_n": 64, "domain": [0, 1]},
}


class TestJdiv:
    def test_brownian_scaling_orthogonal(self, tmp_path):
        cfg = write_config(tmp_path, "cfg.json", JDIV_BROWNIAN)
        out = tmp_path / "out"
        assert run(["jdiv", "--config", cfg, "--out", out]) == 0
        verdict = json.loads((out / "verdict.json").read_text())
        assert verdict["verdict"]["label"] == "OrthogonalityIndicated"
        assert verdict["verdict"]["statistic"] == pytest.approx(1.125, rel=1e-9)
        lines = (out / "trace.csv").read_text().splitlines()
        assert lines[0] == "n,J,slope_estimate"
        assert len(lines) == 7  # sizes 2..64

    def test_identical_kernels_equivalent(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "cfg.json",
            {
                "kernel1": {"variant": "exponential", "sigma": 1.0, "beta": 1.0},
                "kernel2": {"variant": "exponential", "sigma": 1.0, "beta": 1.0},
                "designs": {"type": "dyadic_interval", "max_n": 16},
            },
        )
        out = tmp_path / "out"
        assert run(["jdiv", "--config", cfg, "--out", out]) == 0
        verdict = json.loads((out / "verdict.json").read_text())
        assert verdict["verdict"]["label"] == "EquivalenceIndicated"
        assert all(v == 0.0 for v in verdict["values"])

    def test_striebel_pair_equivalent(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "cfg.json",
            {
                "kernel1": {"variant": "exponential", "sigma": 1.0, "beta": 2.0},
                "kernel2": {"variant": "exponential", "sigma": 2.0**0.5, "beta": 1.0},
                "designs": {"type": "dyadic_interval", "max_n": 256},
            },
        )
        out = tmp_path / "out"
        assert run(["jdiv", "--config", cfg, "--out", out]) == 0
        verdict = json.loads((out / "verdict.json").read_text())
        assert verdict["verdict"]["label"] == "EquivalenceIndicated"

    def test_singular_gram_exit_code(self, tmp_path):
        # rank-4 spherical kernel meets a 5-point design
        cfg = write_config(
            tmp_path,
            "cfg.json",
            {
                "kernel1": {"variant": "schoenberg", "d": 3, "coeffs": [1.0, 1.0]},
                "kernel2": {"variant": "schoenberg", "d": 3, "coeffs": [2.0, 1.0]},
                "designs": {"type": "fibonacci_sphere", "sizes": [2, 3, 4, 5]},
            },
        )
        assert run(["jdiv", "--config", cfg, "--out", tmp_path / "out"]) == 3


class TestSphere:
    def test_ratio_model_run(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "cfg.json",
            {"sphere_dim": 3, "K": 100, "ratio_model": {"type": "power", "c": 1.0, "s": 2.0}},
        )
        out = tmp_path / "out"
        assert run(["sphere", "--config", cfg, "--out", out]) == 0
        verdict = json.loads((out / "verdict.json").read_text())
        assert verdict["verdict"] == "Finite"
        assert verdict["tail_bound"] > 0
        lines = (out / "criterion.csv").read_text().splitlines()
        assert lines[0] == "k,term,partial_sum"
        assert len(lines) == 102

    def test_explicit_spectra(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "cfg.json",
            {"sphere_dim": 3, "K": 2, "spectrum1": [1.0, 2.0, 1.0], "spectrum2": [1.0, 1.0, 1.0]},
        )
        out = tmp_path / "out"
        assert run(["sphere", "--config", cfg, "--out", out]) == 0
        verdict = json.loads((out / "verdict.json").read_text())
        assert verdict["verdict"] == "Finite"
        assert verdict["final"] == pytest.approx(3.0)  # h(1) (1 - 2)^2

    def test_support_mismatch_exit_code(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "cfg.json",
            {"sphere_dim": 3, "K": 2, "spectrum1": [1.0, 1.0, 1.0], "spectrum2": [1.0, 1.0, 0.0]},
        )
        assert run(["sphere", "--config", cfg, "--out", tmp_path / "out"]) == 4


class TestChow:
    def _measures(self, tmp_path):
        m1 = {
            "atoms": [
                {"label": "a1", "mass": 2.0, "dim": 1},
                {"label": "a2", "mass": 1.5, "dim": 3},
            ]
        }
        m2 = {
            "atoms": [
                {"label": "a1", "mass": 1.0, "dim": 1},
                {"label": "a2", "mass": 1.0, "dim": 3},
            ]
        }
        (tmp_path / "m1.json").write_text(json.dumps(m1))
        (tmp_path / "m2.json").write_text(json.dumps(m2))

    def test_run(self, tmp_path):
        self._measures(tmp_path)
        cfg = write_config(
            tmp_path, "cfg.json", {"measure1": "m1.json", "measure2": "m2.json", "N": 2}
        )
        out = tmp_path / "out"
        assert run(["chow", "--config", cfg, "--out", out]) == 0
        verdict = json.loads((out / "verdict.json").read_text())
        assert verdict["final"] == pytest.approx(1.0 + 3 * 0.25)
        lines = (out / "criterion.csv").read_text().splitlines()
        assert lines[0] == "n,term,partial_sum"

    def test_label_mismatch_exit_code(self, tmp_path):
        self._measures(tmp_path)
        bad = {"atoms": [{"label": "zz", "mass": 1.0, "dim": 1}]}
        (tmp_path / "m2.json").write_text(json.dumps(bad))
        cfg = write_config(
            tmp_path, "cfg.json", {"measure1": "m1.json", "measure2": "m2.json", "N": 1}
        )
        assert run(["chow", "--config", cfg, "--out", tmp_path / "out"]) == 4


class TestSample:
    CONFIG = {
        "kernel": {"variant": "exponential", "sigma": 1.0, "beta": 1.0},
        "design": {"type": "equispaced_interval", "n": 6, "domain": [0, 1]},
        "replicates": 5,
        "seed": 42,
    }

    def test_outputs(self, tmp_path):
        cfg = write_config(tmp_path, "cfg.json", self.CONFIG)
        out = tmp_path / "out"
        assert run(["sample", "--config", cfg, "--out", out]) == 0
        rows = (out / "samples.csv").read_text().splitlines()
        assert len(rows) == 5
        assert len(rows[0].split(",")) == 6
        meta = json.loads((out / "sample_meta.json").read_text())
        assert meta["seed"] == 42
        assert meta["kernel"]["variant"] == "exponential"
        assert len(meta["design"]["points"]) == 6

    def test_seed_override_changes_samples(self, tmp_path):
        cfg = write_config(tmp_path, "cfg.json", self.CONFIG)
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert run(["sample", "--config", cfg, "--out", out1]) == 0
        assert run(["sample", "--config", cfg, "--out", out2, "--seed", "43"]) == 0
        assert (out1 / "samples.csv").read_bytes() != (out2 / "samples.csv").read_bytes()
        assert json.loads((out2 / "sample_meta.json").read_text())["seed"] == 43
        assert json.loads((out2 / "manifest.json").read_text())["seed"] == 43


class TestMle:
    CONFIG = {
        "n_grid": [6, 10],
        "replicates": 20,
        "seed": 5,
        "optimizer": {"starts": 2, "max_evals": 120},
    }

    def test_run(self, tmp_path):
        cfg = write_config(tmp_path, "cfg.json", self.CONFIG)
        out = tmp_path / "out"
        assert run(["mle", "--config", cfg, "--out", out]) == 0
        lines = (out / "consistency.csv").read_text().splitlines()
        assert lines[0] == "n,rmse_sigma2,rmse_beta,rmse_microergodic,failed_replicates"
        assert len(lines) == 3

    def test_failure_rate_exit_code(self, tmp_path, monkeypatch):
        report = ConsistencyReport(
            n_grid=(6, 10),
            rmse_sigma2=np.array([1.0, 1.0]),
            rmse_beta=np.array([1.0, 1.0]),
            rmse_microergodic=np.array([1.0, 1.0]),
            failed=(10, 5),
            replicates=20,
            seed=5,
        )
        monkeypatch.setattr(cli, "microergodic_experiment", lambda config: report)
        cfg = write_config(tmp_path, "cfg.json", self.CONFIG)
        assert run(["mle", "--config", cfg, "--out", tmp_path / "out"]) == 5


class TestCommonBehavior:
    def test_malformed_json_exit_code(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run(["jdiv", "--config", bad, "--out", tmp_path]) == 2

    def test_missing_key_exit_code(self, tmp_path):
        cfg = write_config(tmp_path, "cfg.json", {"kernel1": {"variant": "brownian", "sigma": 1}})
        assert run(["jdiv", "--config", cfg, "--out", tmp_path / "out"]) == 2

    def test_missing_config_file(self, tmp_path):
        assert run(["jdiv", "--config", tmp_path / "nope.json", "--out", tmp_path]) == 2

    def test_manifest_written(self, tmp_path):
        cfg = write_config(tmp_path, "cfg.json", JDIV_BROWNIAN)
        out = tmp_path / "out"
        assert run(["jdiv", "--config", cfg, "--out", out]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["subcommand"] == "jdiv"
        assert len(manifest["config_digest"]) == 64
        assert manifest["tool_version"]
        assert manifest["timestamp"]

    def test_manifest_digest_stable(self, tmp_path):
        cfg = write_config(tmp_path, "cfg.json", JDIV_BROWNIAN)
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        run(["jdiv", "--config", cfg, "--out", out1])
        run(["jdiv", "--config", cfg, "--out", out2])
        d1 = json.loads((out1 / "manifest.json").read_text())["config_digest"]
        d2 = json.loads((out2 / "manifest.json").read_text())["config_digest"]
        assert d1 == d2

    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_config(tmp_path, "cfg.json", JDIV_BROWNIAN)
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert run(["jdiv", "--config", cfg, "--out", out1]) == 0
        assert run(["jdiv", "--config", cfg, "--out", out2]) == 0
        assert (out1 / "trace.csv").read_bytes() == (out2 / "trace.csv").read_bytes()

    def test_help_mentions_config_keys(self, capsys):
        for sub in ("jdiv", "sphere", "chow", "sample", "mle"):
            with pytest.raises(SystemExit) as exc:
                run([sub, "--help"])
            assert exc.value.code == 0
            out = capsys.readouterr().out
            assert "config keys:" in out
