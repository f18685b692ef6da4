"""CLI surface: subcommands, config file, env seed, exit codes."""

import math

import pytest

from clocksync.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_kv(out: str) -> dict:
    pairs = {}
    for line in out.splitlines():
        if "=" in line:
            key, value = line.split("=", 1)
            pairs[key] = value
    return pairs


class TestSimulateEstimate:
    def test_roundtrip(self, tmp_path, capsys):
        path = tmp_path / "series.csv"
        code, out, _ = run_cli(
            capsys, "simulate", "--dist", "gaussian", "--n", "30",
            "--seed", "5", "--out", str(path),
        )
        assert code == 0
        assert path.exists()
        code, out, _ = run_cli(capsys, "estimate", str(path), "--dist", "gaussian")
        assert code == 0
        values = parse_kv(out)
        assert abs(float(values["ml_theta_hat"]) - 0.2) < 0.1

    def test_simulate_deterministic(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_cli(capsys, "simulate", "--seed", "11", "--out", str(a))
        run_cli(capsys, "simulate", "--seed", "11", "--out", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_symmetric_series_gives_zero_offset(self, tmp_path, capsys):
        path = tmp_path / "sym.csv"
        path.write_text("u,v\n1.0,1.0\n1.5,1.5\n0.9,0.9\n")
        code, out, _ = run_cli(capsys, "estimate", str(path), "--dist", "exponential", "--lambda-xi", "10")
        assert code == 0
        assert float(parse_kv(out)["ml_theta_hat"]) == 0.0

    def test_both_estimators(self, tmp_path, capsys):
        path = tmp_path / "s.csv"
        run_cli(capsys, "simulate", "--dist", "exponential", "--n", "10", "--out", str(path))
        code, out, _ = run_cli(
            capsys, "estimate", str(path), "--dist", "exponential",
            "--estimator", "both", "--sigma-gm", "1e-4",
        )
        assert code == 0
        values = parse_kv(out)
        assert "ml_theta_hat" in values and "fge_theta_hat" in values

    def test_fge_requires_sigma(self, tmp_path, capsys):
        path = tmp_path / "s.csv"
        path.write_text("u,v\n1.0,1.0\n")
        code, _, err = run_cli(capsys, "estimate", str(path), "--estimator", "fge")
        assert code == 2
        assert "sigma-gm" in err

    def test_missing_series_file(self, capsys):
        code, _, err = run_cli(capsys, "estimate", "/nonexistent/series.csv")
        assert code == 1

    def test_malformed_series_file(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("x,y\n1,2\n")
        code, _, err = run_cli(capsys, "estimate", str(path))
        assert code == 2
        assert "columns" in err


class TestBounds:
    def test_exponential_chrb_line(self, capsys):
        code, out, _ = run_cli(
            capsys, "bounds", "--dist", "exponential", "--lambda-xi", "10",
            "--lambda-psi", "10", "--n", "25",
        )
        assert code == 0
        values = parse_kv(out)
        assert float(values["chrb_xi"]) == pytest.approx(1.036e-5, rel=1e-3)
        assert "crb_xi" not in values  # regularity fails for the constrained law

    def test_gaussian_with_bayesian_bounds(self, capsys):
        code, out, _ = run_cli(
            capsys, "bounds", "--dist", "gaussian", "--sigma-xi", "0.1",
            "--sigma-psi", "0.1", "--n", "25", "--sigma-gm", "1e-4",
        )
        assert code == 0
        values = parse_kv(out)
        assert float(values["crb_theta_bound"]) == pytest.approx(2e-4, rel=1e-6)
        assert float(values["bcrb_xi"]) == pytest.approx(4e-4, rel=1e-2)
        assert "bchrb_xi" in values

    def test_exponential_bayesian_bcrb_is_infinite(self, capsys):
        code, out, _ = run_cli(
            capsys, "bounds", "--dist", "exponential", "--lambda-xi", "5",
            "--lambda-psi", "5", "--n", "10", "--sigma-gm", "1e-3",
        )
        assert code == 0
        values = parse_kv(out)
        assert math.isinf(float(values["bcrb_xi"]))
        assert float(values["bchrb_xi"]) > 0


class TestExperiment:
    def test_deterministic_csv(self, tmp_path, capsys):
        args = [
            "experiment", "fge-vs-sigma", "--trials", "40", "--seed", "7",
            "--n", "10", "--sigma-gm", "1e-5,1e-3", "--no-plot",
        ]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        code, _, _ = run_cli(capsys, *args, "--out", str(a))
        assert code == 0
        run_cli(capsys, *args, "--out", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_plot_written_by_default(self, tmp_path, capsys):
        out = tmp_path / "mm.csv"
        code, stdout, _ = run_cli(
            capsys, "experiment", "ml-mismatch-lognormal", "--trials", "30",
            "--n", "5,10", "--out", str(out),
        )
        assert code == 0
        assert out.exists()
        assert (tmp_path / "mm.png").exists()
        assert "wrote figure" in stdout

    def test_unknown_preset_is_usage_error(self, capsys):
        code, _, _ = run_cli(capsys, "experiment", "not-a-preset")
        assert code == 2

    def test_unknown_flag_is_usage_error(self, capsys):
        code, _, _ = run_cli(capsys, "simulate", "--frobnicate")
        assert code == 2

    def test_config_file_and_flag_precedence(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# comment line\n"
            "distribution = exponential\n"
            "lambda_xi = 5\n"
            "lambda_psi = 5\n"
            "trials = 25\n"
            "n = 6\n"
            "seed = 3\n"
        )
        out = tmp_path / "c.csv"
        code, _, _ = run_cli(
            capsys, "--config", str(cfg), "experiment", "custom",
            "--trials", "30", "--out", str(out),
        )
        assert code == 0
        lines = out.read_text().splitlines()
        row = lines[1].split(",")
        assert row[2].startswith("exponential(5.0")
        assert row[6] == "30"  # flag overrides the config trials
        assert row[4] == "6"  # config n applies

    def test_bad_config_line(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("just words\n")
        code, _, err = run_cli(capsys, "--config", str(cfg), "experiment", "custom")
        assert code == 2
        assert "key=value" in err

    def test_env_seed_overrides_flag(self, tmp_path, capsys, monkeypatch):
        out1, out2, out3 = (tmp_path / f"{i}.csv" for i in (1, 2, 3))
        args = ["experiment", "custom", "--trials", "25", "--n", "5", "--no-plot"]
        monkeypatch.setenv("CLOCKSYNC_SEED", "777")
        run_cli(capsys, *args, "--seed", "1", "--out", str(out1))
        run_cli(capsys, *args, "--seed", "2", "--out", str(out2))
        monkeypatch.delenv("CLOCKSYNC_SEED")
        run_cli(capsys, *args, "--seed", "777", "--out", str(out3))
        assert out1.read_bytes() == out2.read_bytes() == out3.read_bytes()
