import json

import numpy as np
import pytest

from dsmbayes import cli
from dsmbayes.errors import ConfigError, DomainError, StageError
from dsmbayes.geometry import Disc
from dsmbayes.pipeline import (ExperimentConfig, config_from_mapping, error_metrics,
                               gamma_sweep, parse_wavenumbers, read_config_file, run_pipeline)
from dsmbayes.sources import custom_source

FAST = dict(steps=4000, burn_in=1000, h_data=0.04, h_operator=0.04, h_eval=0.04,
            bayes_wavenumbers=(1.0, 2.0, 3.0, 4.0, 5.0))


def manifest(out):
    return json.loads((out / "report.json").read_text())["manifest"]


class TestErrorMetrics:
    def test_identity_and_double(self, rng):
        f = rng.normal(size=50)
        w = rng.uniform(0.1, 1, size=50)
        assert error_metrics(f, f, w) == (0.0, 0.0)
        ae, re = error_metrics(f, 2 * f, w)
        assert re == pytest.approx(1.0)
        assert ae == pytest.approx(np.sqrt(np.sum(w * f**2)))

    def test_consistency(self, rng):
        f, g, w = rng.normal(size=(3, 30))
        w = np.abs(w)
        ae, re = error_metrics(f, g, w)
        assert re * np.sqrt(np.sum(w * f**2)) == pytest.approx(ae, rel=1e-12)

    def test_errors(self):
        with pytest.raises(DomainError):
            error_metrics(np.zeros(3), np.ones(3), np.ones(3))
        with pytest.raises(DomainError):
            error_metrics(np.ones(3), np.ones(4), np.ones(3))


class TestPipeline:
    def test_artifacts_and_determinism(self, tmp_path):
        runs = []
        for name, threads in (("a", 1), ("b", 3)):
            cfg = ExperimentConfig(example=2, aperture="G2", threads=threads,
                                   output_dir=tmp_path / name, **FAST)
            report = run_pipeline(cfg)
            runs.append(manifest(tmp_path / name))
        assert runs[0] == runs[1]
        assert [m["file"] for m in runs[0]] == ["farfield.txt", "indicator.csv", "disc.csv",
                                               "chain.txt", "summary.txt", "field.csv"]
        assert report.ae >= 0 and report.re >= 0
        assert report.re * report.f_norm == pytest.approx(report.ae, rel=1e-12)
        assert report.disc.radius == pytest.approx(1.1180, abs=1e-4)

    def test_field_csv(self, tmp_path):
        cfg = ExperimentConfig(example=5, aperture="G3", output_dir=tmp_path, **FAST)
        run_pipeline(cfg)
        lines = (tmp_path / "field.csv").read_text().splitlines()
        assert lines[0] == "x, y, f_true, f_be"
        assert len(lines) == 1 + 101 * 101

    def test_disc_override_skips_dsm(self, tmp_path):
        cfg = ExperimentConfig(example=1, disc_override=Disc((0.0, 0.0), 0.9),
                               output_dir=tmp_path, **FAST)
        report = run_pipeline(cfg)
        names = [m["file"] for m in report.manifest]
        assert "indicator.csv" not in names and "disc.csv" not in names
        assert report.indicator_max is None
        assert report.disc.radius == 0.9

    def test_zero_source_fails_in_dsm(self, tmp_path):
        src = custom_source(lambda x: 0.0 * x[..., 0], support=Disc((0.0, 0.0), 0.9))
        cfg = ExperimentConfig(example=None, source=src, output_dir=tmp_path, **FAST)
        with pytest.raises(StageError) as info:
            run_pipeline(cfg)
        assert info.value.stage == "dsm"
        assert json.loads((tmp_path / "report.json").read_text())["error"]["stage"] == "dsm"

    def test_gamma_out_of_range(self):
        with pytest.raises(StageError) as info:
            run_pipeline(ExperimentConfig(example=2, gamma=1.0 + 1e-9, **FAST))
        assert info.value.stage == "config"

    def test_unwritable_dir(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(StageError) as info:
            run_pipeline(ExperimentConfig(example=2, output_dir=blocker / "sub", **FAST))
        assert info.value.stage == "io"
        assert "file" in str(info.value)

    def test_invalid_config(self):
        with pytest.raises(StageError) as info:
            run_pipeline(ExperimentConfig(steps=10, burn_in=20))
        assert isinstance(info.value.cause, ConfigError)

    def test_gamma_sweep(self):
        rows = gamma_sweep(ExperimentConfig(example=2, aperture="G1", h_data=0.01), [0.41, 0.8])
        assert rows[0][1] == pytest.approx(0.9055, abs=1e-4)
        assert rows[1][1] <= rows[0][1]


class TestConfig:
    def test_defaults(self):
        cfg = ExperimentConfig()
        assert cfg.resolved_gamma() == 0.41
        assert ExperimentConfig(aperture="G3").resolved_gamma() == 0.70
        assert len(cfg.bayes_wavenumbers) == 20
        assert (cfg.M, cfg.N, cfg.steps, cfg.burn_in, cfg.beta) == (5, 2, 120_000, 20_000, 0.001)

    def test_custom_aperture_needs_gamma(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(aperture=(0.0, 0.5, 1.0)).resolved_gamma()

    def test_parse_wavenumbers(self):
        np.testing.assert_array_equal(parse_wavenumbers("1:1:3"), [1.0, 2.0, 3.0])
        np.testing.assert_array_equal(parse_wavenumbers("2,4.5"), [2.0, 4.5])

    def test_file(self, tmp_path):
        p = tmp_path / "cfg.txt"
        p.write_text("# comment\nexample = 3\naperture = G2\ngamma = 0.5\n"
                     "disc_override = 0,0,1.2\nbayes_wavenumbers = 1:1:5\nsteps = 1000\n")
        cfg = config_from_mapping(read_config_file(p))
        assert (cfg.example, cfg.aperture, cfg.gamma, cfg.steps) == (3, "G2", 0.5, 1000)
        assert cfg.disc_override == Disc((0.0, 0.0), 1.2)
        assert cfg.bayes_wavenumbers == (1.0, 2.0, 3.0, 4.0, 5.0)

    def test_bad_file(self, tmp_path):
        p = tmp_path / "cfg.txt"
        p.write_text("nonsense = 1\n")
        with pytest.raises(ConfigError):
            config_from_mapping(read_config_file(p))
        p.write_text("beta = abc\n")
        with pytest.raises(ConfigError):
            config_from_mapping(read_config_file(p))


class TestCli:
    fast = ["--steps", "3000", "--burn-in", "500", "--h", "0.04", "--h-operator", "0.04",
            "--h-eval", "0.04", "--bayes-wavenumbers", "1:1:4"]

    def test_run(self, tmp_path, capsys):
        assert cli.main(["run", "--example", "2", "--aperture", "G3", "--out", str(tmp_path)]
                        + self.fast) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["disc"]["radius"] == pytest.approx(1.0817, abs=1e-4)
        assert (tmp_path / "report.json").exists()

    def test_stepwise_commands(self, tmp_path, capsys):
        out = str(tmp_path)
        assert cli.main(["simulate", "--example", "2", "--h", "0.04", "--out", out,
                         "--bayes-wavenumbers", "1:1:4"]) == 0
        data = str(tmp_path / "farfield.txt")
        assert cli.main(["dsm", "--data", data, "--aperture", "G1", "--out", out]) == 0
        assert (tmp_path / "disc.csv").exists()
        assert cli.main(["reconstruct", "--data", data, "--disc", "0,0,0.9", "--out", out,
                         "--steps", "2000", "--burn-in", "100", "--h-operator", "0.04"]) == 0
        assert (tmp_path / "chain.txt").exists() and (tmp_path / "summary.txt").exists()

    def test_gamma_sweep(self, capsys):
        assert cli.main(["gamma-sweep", "--example", "2", "--gammas", "0.41,0.9", "--h", "0.04"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "gamma, radius" and len(lines) == 3

    def test_exit_codes(self, tmp_path):
        assert cli.main(["run", "--gamma", "3"] + self.fast) == cli.EXIT_CONFIG
        assert cli.main(["run", "--beta", "2"] + self.fast) == cli.EXIT_CONFIG
        blocker = tmp_path / "f"
        blocker.write_text("")
        assert cli.main(["run", "--out", str(blocker / "x")] + self.fast) == cli.EXIT_IO
        assert cli.main(["dsm", "--data", str(tmp_path / "missing.txt")]) == cli.EXIT_IO
        assert cli.main(["run", "--gamma", "1.0001"] + self.fast) == cli.EXIT_CONFIG

    def test_threshold_exit(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("example = 2\nnormalize_indicator = false\n")
        # the raw indicator stays below 1, so no grid point reaches the cutoff
        assert cli.main(["run", "--config", str(cfg), "--gamma", "1.0"] + self.fast) == cli.EXIT_NUMERIC
        assert "field max" in capsys.readouterr().err

    def test_argparse_error(self):
        with pytest.raises(SystemExit) as info:
            cli.main(["run", "--example", "9"])
        assert info.value.code == 2
