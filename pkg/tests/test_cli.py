"""End-to-end CLI behaviour: artifact layout, provenance, determinism,
config handling and failure cleanup."""

import json
import os

import numpy as np
import pytest

from adaptaug import cli
from adaptaug.data import load_ucr_tsv, znormalize_per_sample

FIXTURE = os.path.join(os.path.dirname(__file__), "fixtures", "tiny_ucr.tsv")


def run_cli(*argv):
    return cli.main(list(argv))


def read_nonempty(path):
    assert os.path.exists(path), f"missing artifact {path}"
    with open(path, "rb") as fh:
        data = fh.read()
    assert data, f"empty artifact {path}"
    return data


class TestAugment:
    def test_row_count_and_identity_passthrough(self, tmp_path):
        out = tmp_path / "aug.csv"
        code = run_cli(
            "augment",
            "--input", FIXTURE,
            "--out", str(out),
            "--transforms", "identity,jitter,scaling",
            "--magnitude", "5",
            "--seed", "7",
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("# config_hash=")
        assert lines[1].split(",")[:2] == ["sample_id", "transform_id"]
        body = lines[2:]
        assert len(body) == 12 * 3

        dataset = load_ucr_tsv(FIXTURE)
        identity_rows = [l for l in body if l.split(",")[1] == "identity"]
        first = np.array([float(v) for v in identity_rows[0].split(",")[2:]])
        expected = znormalize_per_sample(dataset.samples[0]).values
        np.testing.assert_array_equal(first, expected)

    def test_same_seed_identical_bytes(self, tmp_path):
        args = [
            "augment",
            "--input", FIXTURE,
            "--transforms", "identity,jitter",
            "--magnitude", "10",
            "--seed", "3",
        ]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run_cli(*args, "--out", str(a)) == 0
        assert run_cli(*args, "--out", str(b)) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_bad_input_format_fails_nonzero(self, tmp_path, capsys):
        bad = tmp_path / "bad.tsv"
        bad.write_text("1\t2\t3\n1\t2\n")
        code = run_cli("augment", "--input", str(bad), "--out", str(tmp_path / "x.csv"),
                       "--magnitude", "5")
        assert code == 1
        assert "error" in capsys.readouterr().err


class TestConfigHandling:
    def test_missing_required_key_names_it(self, capsys):
        code = run_cli("augment", "--magnitude", "5")
        assert code == 2
        err = capsys.readouterr().err
        assert "input" in err or "out" in err

    def test_config_file_with_cli_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "input = {}\nout = {}\ntransforms = identity\nmagnitude = 5\nseed = 1\n".format(
                FIXTURE, tmp_path / "from_config.csv"
            )
        )
        override = tmp_path / "override.csv"
        code = run_cli("augment", "--config", str(cfg), "--out", str(override))
        assert code == 0
        assert override.exists()
        assert not (tmp_path / "from_config.csv").exists()

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("inpt = x\n")
        code = run_cli("augment", "--config", str(cfg))
        assert code == 2
        assert "inpt" in capsys.readouterr().err

    def test_malformed_config_line_reports_location(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("just some text\n")
        code = run_cli("augment", "--config", str(cfg))
        assert code == 2
        assert ":1" in capsys.readouterr().err


class TestTrain:
    def test_artifacts_and_provenance(self, tmp_path):
        out = tmp_path / "run"
        code = run_cli(
            "train",
            "--data", FIXTURE,
            "--out", str(out),
            "--policy", "weighted",
            "--transforms", "identity,jitter,scaling",
            "--magnitude", "5",
            "--epochs", "3",
            "--batch-size", "4",
            "--seed", "2",
        )
        assert code == 0
        report = json.loads(read_nonempty(out / "report.json"))
        assert report["_provenance"]["seed"] == 2
        assert len(report["report"]["epochs"]) <= 3
        ckpt_header = json.loads(read_nonempty(out / "params.ckpt").split(b"\n", 1)[0])
        assert ckpt_header["provenance"]["seed"] == 2
        trace = read_nonempty(out / "weight_trace.csv").decode()
        assert trace.splitlines()[1] == "iteration,w_0,w_1,w_2"

    def test_trimmed_policy_emits_histogram(self, tmp_path):
        out = tmp_path / "run"
        code = run_cli(
            "train",
            "--data", FIXTURE,
            "--out", str(out),
            "--policy", "trimmed",
            "--transforms", "identity,jitter,scaling",
            "--magnitude", "5",
            "--alpha", "1",
            "--epochs", "2",
            "--batch-size", "4",
        )
        assert code == 0
        hist = read_nonempty(out / "selection_histogram.csv").decode().splitlines()
        assert hist[1] == "epoch,transform_id,count"
        assert any(line.startswith("0,identity,") for line in hist)

    def test_partial_outputs_removed_on_failure(self, tmp_path, monkeypatch):
        out = tmp_path / "run"

        def broken_save(path, params, provenance=None):
            raise OSError("disk full")

        monkeypatch.setattr(cli.M, "save_params", broken_save)
        code = run_cli(
            "train",
            "--data", FIXTURE,
            "--out", str(out),
            "--policy", "none",
            "--epochs", "1",
        )
        assert code == 1
        assert not (out / "report.json").exists()
        assert not (out / "params.ckpt").exists()


class TestSearchCommand:
    def test_grid_emits_summary_table(self, tmp_path):
        out = tmp_path / "search"
        code = run_cli(
            "search",
            "--data", FIXTURE,
            "--out", str(out),
            "--policies", "weighted,random",
            "--magnitudes", "1,5",
            "--splits", "2",
            "--transforms", "identity,jitter,scaling",
            "--epochs", "2",
            "--batch-size", "4",
            "--seed", "4",
        )
        assert code == 0
        summary = read_nonempty(out / "summary.csv").decode().splitlines()
        assert summary[1] == "policy,accuracy,magnitude"
        assert len(summary) == 2 + 2  # two policies
        payload = json.loads(read_nonempty(out / "search.json"))
        assert payload["run_count"] == 2 * 2 * 2

    def test_subset_mode_emits_curve(self, tmp_path):
        out = tmp_path / "sweep"
        code = run_cli(
            "search",
            "--data", FIXTURE,
            "--out", str(out),
            "--mode", "subset",
            "--policies", "random",
            "--magnitudes", "5",
            "--splits", "1",
            "--subset-sizes", "0,1",
            "--subset-reps", "2",
            "--transforms", "identity,jitter,scaling",
            "--epochs", "2",
            "--batch-size", "4",
        )
        assert code == 0
        curve = read_nonempty(out / "sweep_curve.csv").decode().splitlines()
        assert curve[1] == "policy,size,mean_accuracy,std_accuracy"


class TestBacktestCommand:
    def _write_inputs(self, tmp_path):
        preds = tmp_path / "preds.csv"
        preds.write_text(
            "date,ticker,prob\n"
            "2020-01-01,A,0.9\n2020-01-01,B,0.1\n"
            "2020-01-02,A,0.2\n2020-01-02,B,0.8\n"
        )
        rets = tmp_path / "returns.csv"
        rets.write_text(
            "date,ticker,return\n"
            "2020-01-01,A,0.0\n2020-01-01,B,0.0\n"
            "2020-01-02,A,0.01\n2020-01-02,B,-0.01\n"
            "2020-01-03,A,-0.02\n2020-01-03,B,0.03\n"
        )
        return preds, rets

    def test_worked_example_matches_oracle(self, tmp_path):
        preds, rets = self._write_inputs(tmp_path)
        out = tmp_path / "bt"
        code = run_cli(
            "backtest",
            "--preds", str(preds),
            "--returns", str(rets),
            "--k", "1",
            "--cost-bps", "0",
            "--out", str(out),
        )
        assert code == 0
        payload = json.loads(read_nonempty(out / "backtest.json"))
        # Day 1: long A short B over 01-02 -> 0.5*0.01 - 0.5*(-0.01) = 1%.
        # Day 2: long B short A over 01-03 -> 0.5*0.03 - 0.5*(-0.02) = 2.5%.
        np.testing.assert_allclose(payload["daily_returns"], [0.01, 0.025], atol=1e-12)
        daily = read_nonempty(out / "daily_returns.csv").decode().splitlines()
        assert daily[1] == "date,net_return"
        assert daily[2].startswith("2020-01-01,")

    def test_prediction_for_unknown_date_fails(self, tmp_path, capsys):
        preds, rets = self._write_inputs(tmp_path)
        preds.write_text("date,ticker,prob\n2021-06-06,A,0.5\n2021-06-06,B,0.5\n")
        code = run_cli(
            "backtest", "--preds", str(preds), "--returns", str(rets),
            "--k", "1", "--out", str(tmp_path / "bt"),
        )
        assert code == 1
        assert "not present" in capsys.readouterr().err


class TestSynthAndReport:
    def test_synth_roundtrips_through_loader(self, tmp_path):
        out = tmp_path / "returns.csv"
        code = run_cli("synth", "--out", str(out), "--stocks", "3", "--days", "12",
                       "--seed", "5")
        assert code == 0
        from adaptaug.data import load_returns_csv

        panel = load_returns_csv(out)
        assert panel.n_days == 12
        assert len(panel.tickers) == 3

    def test_report_summarizes_backtest_artifact(self, tmp_path, capsys):
        artifact = tmp_path / "backtest.json"
        artifact.write_text(json.dumps({
            "ann_ret_pct": 12.5, "avg_ret_pct": 0.05, "ann_vol_pct": 10.0,
            "ir": 1.25, "downside_risk_pct": 7.0, "dir": 1.79,
            "_provenance": {"config_hash": "abc", "seed": 1, "version": "0.1.0"},
        }))
        assert run_cli("report", "--artifact", str(artifact)) == 0
        out = capsys.readouterr().out
        assert "backtest report" in out
        assert "config_hash=abc" in out

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run_cli("--version")
        assert exc.value.code == 0
