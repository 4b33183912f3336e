import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from nbp.cli import main

FAST_FLAGS = ["--iters", "1500", "--burnin", "700", "--em-block", "50"]


@pytest.fixture()
def dataset_csv(tmp_path):
    gen = np.random.default_rng(0)
    n, p = 40, 6
    X = gen.standard_normal((n, p))
    y = X @ np.array([2.0, -1.5, 0.0, 0.0, 1.0, 0.0]) + 0.5 * gen.standard_normal(n)
    path = tmp_path / "data.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{j}" for j in range(p)] + ["outcome"])
        for i in range(n):
            writer.writerow(list(X[i]) + [y[i]])
    return str(path)


class TestFit:
    def test_fit_json_schema(self, dataset_csv, tmp_path, capsys):
        out = tmp_path / "fit.json"
        rc = main(
            ["fit", "--data", dataset_csv, "--response", "outcome", "--seed", "3", "--out", str(out)]
            + FAST_FLAGS
        )
        assert rc == 0
        report = json.loads(out.read_text())
        for key in (
            "schema_version",
            "a_hat",
            "b_hat",
            "beta_median",
            "beta_mean",
            "ci_lower",
            "ci_upper",
            "support",
            "em_trace",
            "elapsed_seconds",
        ):
            assert key in report
        assert len(report["beta_median"]) == 6
        assert report["a_hat"] > 0
        assert 0 in report["support"]  # strongest coefficient

    def test_fit_varem_engine(self, dataset_csv, tmp_path):
        out = tmp_path / "v.json"
        rc = main(
            ["fit", "--data", dataset_csv, "--response", "outcome", "--engine", "varem", "--out", str(out)]
        )
        assert rc == 0
        report = json.loads(out.read_text())
        assert len(report["beta_mean"]) == 6

    def test_missing_file_exits_4(self, capsys):
        rc = main(["fit", "--data", "/no/such/file.csv", "--response", "y"])
        assert rc == 4

    def test_bad_response_exits_4(self, dataset_csv):
        rc = main(["fit", "--data", dataset_csv, "--response", "nope"])
        assert rc == 4


class TestSimulate:
    def test_small_simulation_writes_json_and_csv(self, tmp_path):
        base = tmp_path / "exp"
        rc = main(
            [
                "simulate",
                "--n", "30", "--p", "12", "--n-active", "3",
                "--replications", "2", "--seed", "5",
                "--out", str(base),
            ]
            + FAST_FLAGS
        )
        assert rc == 0
        report = json.loads((tmp_path / "exp.json").read_text())
        assert set(report) >= {"mse", "fdr", "fnr", "mp", "se", "spec", "n_failed"}
        rows = list(csv.DictReader(open(tmp_path / "exp.csv")))
        assert len(rows) == 2
        assert {"replication", "mse", "a_hat"} <= set(rows[0])

    def test_invalid_spec_exits_2(self):
        rc = main(["simulate", "--n", "10", "--p", "5", "--n-active", "9"])
        assert rc == 2


class TestMspe:
    def test_mspe_runs(self, dataset_csv, tmp_path):
        out = tmp_path / "m.json"
        rc = main(
            ["mspe", "--data", dataset_csv, "--response", "outcome", "--folds", "5", "--out", str(out)]
            + FAST_FLAGS
        )
        assert rc == 0
        report = json.loads(out.read_text())
        assert report["folds"] == 5
        assert report["mspe"] > 0


class TestProbeAndDensity:
    def test_probe_csv(self, tmp_path):
        out = tmp_path / "probe.csv"
        rc = main(["probe", "--cases", "20", "--out", str(out)])
        assert rc == 0
        rows = list(csv.DictReader(open(out)))
        assert all(r["ok"] == "True" for r in rows)
        kinds = {r["check"] for r in rows}
        assert {"lemma_ratio", "dominance", "tail_bound"} <= kinds

    def test_density_csv_symmetric(self, tmp_path):
        out = tmp_path / "dens.csv"
        rc = main(
            ["density", "--a", "0.5", "--b", "1.0", "--lo", "-2", "--hi", "2", "--points", "41", "--out", str(out)]
        )
        assert rc == 0
        rows = list(csv.DictReader(open(out)))
        vals = {float(r["beta"]): float(r["density"]) for r in rows}
        assert vals[1.0] == pytest.approx(vals[-1.0], rel=1e-9)


class TestDeterminism:
    def test_repeat_invocation_identical_modulo_elapsed(self, dataset_csv, tmp_path):
        # run in subprocesses: byte-identical JSON except elapsed_seconds
        outs = []
        for tag in ("a", "b"):
            out = tmp_path / f"det_{tag}.json"
            cmd = [
                sys.executable, "-m", "nbp.cli",
                "fit", "--data", dataset_csv, "--response", "outcome",
                "--seed", "11", "--out", str(out),
            ] + FAST_FLAGS
            res = subprocess.run(cmd, capture_output=True, text=True)
            assert res.returncode == 0, res.stderr
            outs.append(out.read_text())
        payloads = []
        for text in outs:
            obj = json.loads(text)
            obj.pop("elapsed_seconds")
            payloads.append(json.dumps(obj, indent=2, sort_keys=False))
        assert payloads[0] == payloads[1]
