import json
import os

import numpy as np
import pytest

from slipns import cli
from slipns.checkpoint import read_checkpoint, write_checkpoint
from slipns.config import config_hash, config_to_text, parse_config
from slipns.errors import CheckpointError, ConfigurationError
from slipns.experiments import run_experiment, run_simulation
from slipns.grid import EosParams, build_grid, make_initial_state
from slipns.plotting import emit_plot


SMALL_RUN = """
[grid]
nx = 8
ny = 8
nz = 8
[step]
t_end = 0.3
[run]
sample_cadence = 10
checkpoint_cadence = 100
"""


class TestConfig:
    def test_defaults(self):
        cfg = parse_config("")
        assert cfg.grid.nx == 32
        assert cfg.eos.gamma == 2.0
        assert cfg.step.t_end == 8.0
        assert cfg.weights.D1 == 20.0
        assert cfg.preset == "smooth-perturbation"
        assert cfg.step.eps_floor is None

    def test_overrides(self):
        cfg = parse_config(
            "[grid]\nnx = 16\n[eos]\ngamma = 1.4\n[step]\neps_floor = 0.3\n"
            "[run]\nplots = true\n"
        )
        assert cfg.grid.nx == 16
        assert cfg.eos.gamma == 1.4
        assert cfg.step.eps_floor == 0.3
        assert cfg.plots is True

    def test_unknown_section(self):
        with pytest.raises(ConfigurationError):
            parse_config("[turbulence]\nmodel = none\n")

    def test_unknown_key(self):
        with pytest.raises(ConfigurationError):
            parse_config("[grid]\nnq = 3\n")

    def test_bad_value(self):
        with pytest.raises(ConfigurationError):
            parse_config("[grid]\nnx = tiny\n")

    def test_physics_violations_rejected(self):
        with pytest.raises(ConfigurationError):
            parse_config("[eos]\nlambda = -1.0\n")
        with pytest.raises(ConfigurationError):
            parse_config("[eos]\ngamma = 1.0\n")

    def test_bad_preset(self):
        with pytest.raises(ConfigurationError):
            parse_config("[run]\npreset = turbulent\n")

    def test_echo_round_trips(self):
        cfg = parse_config("[grid]\nnx = 20\n[step]\ncfl_viscous = 0.15\n")
        again = parse_config(config_to_text(cfg))
        assert config_hash(again) == config_hash(cfg)

    def test_hash_sensitive_to_changes(self):
        a = parse_config("")
        b = parse_config("[step]\nt_end = 7.9\n")
        assert config_hash(a) != config_hash(b)
        assert len(config_hash(a)) == 32


class TestCheckpoint:
    def make_state(self):
        grid = build_grid((1.0, 1.0, 1.0), (8, 8, 8))
        eos = EosParams()
        state = make_initial_state("large-amplitude", 0.3, grid, eos)
        state.t = 1.25
        return state, eos

    def test_round_trip_bitwise(self, tmp_path):
        state, eos = self.make_state()
        path = tmp_path / "ck.bin"
        write_checkpoint(state, path, eos, step=42, cfg_hash=b"\x01" * 32)
        back, back_eos, step, digest = read_checkpoint(path)
        assert step == 42
        assert back.t == state.t
        assert back_eos.gamma == eos.gamma
        assert np.array_equal(back.rho.values, state.rho.values)
        for d in range(3):
            assert np.array_equal(back.mom.components[d], state.mom.components[d])

    def test_truncation_detected(self, tmp_path):
        state, eos = self.make_state()
        path = tmp_path / "ck.bin"
        write_checkpoint(state, path, eos)
        data = path.read_bytes()
        path.write_bytes(data[:-8])
        with pytest.raises(CheckpointError, match="truncated"):
            read_checkpoint(path)

    def test_short_header(self, tmp_path):
        path = tmp_path / "ck.bin"
        path.write_bytes(b"SLIP")
        with pytest.raises(CheckpointError, match="shorter"):
            read_checkpoint(path)

    def test_bad_magic(self, tmp_path):
        state, eos = self.make_state()
        path = tmp_path / "ck.bin"
        write_checkpoint(state, path, eos)
        data = bytearray(path.read_bytes())
        data[0] ^= 0xFF
        path.write_bytes(bytes(data))
        with pytest.raises(CheckpointError, match="magic"):
            read_checkpoint(path)

    def test_version_mismatch(self, tmp_path):
        state, eos = self.make_state()
        path = tmp_path / "ck.bin"
        write_checkpoint(state, path, eos)
        data = bytearray(path.read_bytes())
        data[8] = 99
        path.write_bytes(bytes(data))
        with pytest.raises(CheckpointError, match="version"):
            read_checkpoint(path)

    def test_hash_guard(self, tmp_path):
        state, eos = self.make_state()
        path = tmp_path / "ck.bin"
        write_checkpoint(state, path, eos, cfg_hash=b"\x07" * 32)
        with pytest.raises(CheckpointError, match="hash"):
            read_checkpoint(path, expected_hash=b"\x08" * 32)
        back, *_ = read_checkpoint(
            path, expected_hash=b"\x08" * 32, allow_hash_mismatch=True
        )
        assert np.array_equal(back.rho.values, state.rho.values)


class TestPlotting:
    def test_svg_structure(self, tmp_path):
        t = np.linspace(0.0, 1.0, 20)
        path = tmp_path / "p.svg"
        emit_plot(
            [("a", t, np.exp(-t)), ("b", t, 2.0 * np.exp(-2 * t))],
            path, title="demo",
        )
        text = path.read_text()
        assert text.count("<polyline") == 2
        assert "demo" in text
        assert "omitted" not in text

    def test_nonpositive_footnote(self, tmp_path):
        t = [0.0, 1.0, 2.0, 3.0]
        path = tmp_path / "p.svg"
        emit_plot([("a", t, [1.0, 0.5, 0.0, -1.0])], path)
        assert "2 nonpositive point(s)" in path.read_text()

    def test_empty_errors(self, tmp_path):
        with pytest.raises(ConfigurationError):
            emit_plot([], tmp_path / "p.svg")
        with pytest.raises(ConfigurationError):
            emit_plot([("a", [0.0], [0.0])], tmp_path / "p.svg")


class TestRunSimulation:
    def test_artifacts_and_determinism(self, tmp_path):
        cfg = parse_config(SMALL_RUN)
        csvs = []
        for tag in ("a", "b"):
            out = tmp_path / tag
            records, final = run_simulation(cfg, out)
            assert (out / "config_echo.txt").exists()
            assert (out / "diagnostics.csv").exists()
            assert (out / "final.bin").exists()
            assert len(records) >= 10
            csvs.append((out / "diagnostics.csv").read_bytes())
        assert csvs[0] == csvs[1]
        assert (tmp_path / "a" / "final.bin").read_bytes() == (
            tmp_path / "b" / "final.bin"
        ).read_bytes()

    def test_resume_matches_uninterrupted(self, tmp_path):
        cfg = parse_config(SMALL_RUN)
        full = tmp_path / "full"
        run_simulation(cfg, full)
        ckpts = sorted(p for p in os.listdir(full) if p.startswith("ckpt_"))
        assert ckpts
        resumed = tmp_path / "resumed"
        run_simulation(cfg, resumed, resume=str(full / ckpts[0]))
        assert (full / "final.bin").read_bytes() == (
            resumed / "final.bin"
        ).read_bytes()

    def test_resume_rejects_other_config(self, tmp_path):
        cfg = parse_config(SMALL_RUN)
        full = tmp_path / "full"
        run_simulation(cfg, full)
        other = parse_config(SMALL_RUN + "[eos]\na = 1.1\n")
        with pytest.raises(CheckpointError):
            run_simulation(other, tmp_path / "bad", resume=str(full / "final.bin"))


class TestExperiments:
    def test_unknown_name(self):
        with pytest.raises(ConfigurationError):
            run_experiment("nonsense", parse_config(""))

    def test_probes_writes_summary(self, tmp_path):
        cfg = parse_config("[run]\nprobe_trials = 15\n")
        report = run_experiment("probes", cfg, out_dir=str(tmp_path / "probes"))
        assert report.passed, report.failures
        payload = json.loads((tmp_path / "probes" / "summary.json").read_text())
        assert payload["passed"] is True
        assert payload["summary"]["analytic_poincare_ratio"] == pytest.approx(
            payload["summary"]["analytic_expected"], rel=0.01
        )

    def test_theorem1_small_run(self, tmp_path):
        cfg = parse_config(SMALL_RUN.replace("t_end = 0.3", "t_end = 0.8")
                           + "plots = true\n")
        report = run_experiment("theorem1", cfg, out_dir=str(tmp_path / "t1"))
        assert report.passed, report.failures
        assert (tmp_path / "t1" / "decay.svg").exists()
        rates = report.summary["rates"]
        assert rates["l2_drho"]["r_squared"] >= 0.98


class TestCli:
    def test_missing_config_is_exit_2(self, tmp_path):
        code = cli.main(["run", "probes", "--config", str(tmp_path / "nope.ini")])
        assert code == cli.EXIT_CONFIG

    def test_bad_config_is_exit_2(self, tmp_path):
        bad = tmp_path / "bad.ini"
        bad.write_text("[grid]\nnq = 7\n")
        code = cli.main(["run", "probes", "--config", str(bad)])
        assert code == cli.EXIT_CONFIG

    def test_probes_run_passes(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.ini"
        cfg.write_text("[run]\nprobe_trials = 15\n")
        code = cli.main(
            ["run", "probes", "--config", str(cfg), "--out", str(tmp_path / "out")]
        )
        out = capsys.readouterr().out
        assert code == cli.EXIT_PASS
        assert "probes: pass" in out

    def test_fit_subcommand(self, tmp_path, capsys):
        from slipns import diagnostics
        from slipns.solver import StepControl, integrate

        grid = build_grid((1.0, 1.0, 1.0), (8, 8, 8))
        eos = EosParams()
        w = diagnostics.LyapunovWeights()
        recs = []
        state = make_initial_state("smooth-perturbation", 0.05, grid, eos)

        def obs(step, st, prev, dt):
            recs.append(diagnostics.sample(st, prev, dt, eos, w,
                                           prev_record=recs[-1] if recs else None))

        integrate(state, eos, StepControl(t_end=0.3), observers=[obs], cadence=10)
        csv_path = tmp_path / "d.csv"
        diagnostics.write_csv(recs, csv_path)

        code = cli.main(["fit", "--csv", str(csv_path), "--column", "l2_drho"])
        payload = json.loads(capsys.readouterr().out)
        assert code == cli.EXIT_PASS
        assert payload["rate"] > 0
        assert payload["column"] == "l2_drho"

    def test_fit_bad_window(self, tmp_path):
        csv_path = tmp_path / "d.csv"
        csv_path.write_text("t,l2_drho\n0,1\n")
        code = cli.main(
            ["fit", "--csv", str(csv_path), "--column", "l2_drho", "--window", "oops"]
        )
        assert code == cli.EXIT_CONFIG
