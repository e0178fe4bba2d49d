"""Command-line interface: subcommands, exit codes, artifact layout."""

import json

import pytest

from neurocore.cli import main


def small_config(tmp_path, **overrides):
    """A scaled-down copy of the default network for quick CLI runs."""
    from neurocore.config import default_config_text

    text = default_config_text()
    text = text.replace("size = 100", "size = 20")
    text = text.replace("duration_ms = 1000", f"duration_ms = {overrides.get('duration_ms', 250)}")
    text = text.replace("settle_ms = 200", f"settle_ms = {overrides.get('settle_ms', 50)}")
    path = tmp_path / "small.cfg"
    path.write_text(text)
    return path


class TestExitCodes:
    def test_unknown_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["frobnicate"])
        assert excinfo.value.code == 2

    def test_missing_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as excinfo:
            main([])
        assert excinfo.value.code == 2

    def test_bad_flag_exits_2(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["errt", "--no-such-flag"])
        assert excinfo.value.code == 2

    def test_config_parse_error_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("[population x]\nsize = banana\n")
        code = main(["gonogo", "--config", str(bad), "--out", str(tmp_path / "o")])
        assert code == 2
        assert "bad.cfg" in capsys.readouterr().err

    def test_missing_config_file_exits_2(self, tmp_path):
        code = main(["gonogo", "--config", str(tmp_path / "nope.cfg")])
        assert code == 2


class TestValidateSchedule:
    def test_shipped_schedule_ok(self, capsys):
        assert main(["validate-schedule"]) == 0
        assert "OK" in capsys.readouterr().out

    def test_violating_schedule_fails(self, tmp_path, capsys):
        bad = tmp_path / "bad.sched"
        bad.write_text(
            "schedule: bad\nblock: mix\nword: -\nop: add $t <- v, c\n"
        )
        assert main(["validate-schedule", "--schedule", str(bad)]) == 1
        assert "mix" in capsys.readouterr().out

    def test_unparseable_schedule_exits_2(self, tmp_path):
        bad = tmp_path / "junk.sched"
        bad.write_text("op: dangling <- x\n")
        assert main(["validate-schedule", "--schedule", str(bad)]) == 2


class TestErrtCommand:
    def test_reports_both_regimes(self, capsys):
        assert main(["errt", "--duration-ms", "400"]) == 0
        out = capsys.readouterr().out
        assert "RS:" in out and "FS:" in out and "%" in out


class TestGonogoCommand:
    def test_output_tree(self, tmp_path):
        out_dir = tmp_path / "results"
        cfg = small_config(tmp_path)
        code = main(["gonogo", "--config", str(cfg), "--out", str(out_dir)])
        assert code == 0
        for condition in ("baseline", "high", "low"):
            assert (out_dir / f"raster_{condition}.csv").exists()
            assert (out_dir / f"raster_{condition}.svg").exists()
        summary = json.loads((out_dir / "rates_summary.json").read_text())
        assert summary["metadata"]["backend"] == "fixed"
        assert set(summary["conditions"]) == {"baseline", "high", "low"}
        baseline = summary["conditions"]["baseline"]["populations"]
        assert set(baseline) == {
            "STR_D1", "STR_D2", "STR_FSI", "GPe", "STN", "GPi/SNr"
        }
        for stats in baseline.values():
            assert set(stats) == {"mean_rate_hz", "spike_count"}

        # the output nucleus band thins out under high dopamine
        def gpi_events(condition):
            lines = (out_dir / f"raster_{condition}.csv").read_text().splitlines()[1:]
            settle_steps = 50 / 0.125
            return sum(
                1 for line in lines
                if line.split(",")[2] == "GPi/SNr" and int(line.split(",")[0]) >= settle_steps
            )

        assert gpi_events("high") < gpi_events("low")

    def test_byte_identical_reruns_and_thread_settings(self, tmp_path):
        cfg = small_config(tmp_path)
        outputs = []
        for name, threads in (("a", "1"), ("b", "1"), ("c", "3")):
            out_dir = tmp_path / name
            code = main([
                "gonogo", "--config", str(cfg), "--out", str(out_dir),
                "--seed", "5", "--threads", threads,
            ])
            assert code == 0
            outputs.append({
                p.name: p.read_bytes()
                for p in sorted(out_dir.iterdir())
                if p.suffix == ".csv"
            })
        assert outputs[0] == outputs[1] == outputs[2]

    def test_env_seed_override(self, tmp_path, monkeypatch):
        cfg = small_config(tmp_path)
        monkeypatch.setenv("NEUROCORE_SEED", "77")
        out_dir = tmp_path / "env"
        assert main(["gonogo", "--config", str(cfg), "--out", str(out_dir)]) == 0
        summary = json.loads((out_dir / "rates_summary.json").read_text())
        assert summary["metadata"]["seed"] == 77

    def test_env_out_override(self, tmp_path, monkeypatch):
        cfg = small_config(tmp_path)
        target = tmp_path / "from-env"
        monkeypatch.setenv("NEUROCORE_OUT", str(target))
        assert main(["gonogo", "--config", str(cfg)]) == 0
        assert (target / "rates_summary.json").exists()

    def test_flag_beats_env(self, tmp_path, monkeypatch):
        cfg = small_config(tmp_path)
        monkeypatch.setenv("NEUROCORE_SEED", "77")
        out_dir = tmp_path / "flag"
        assert main([
            "gonogo", "--config", str(cfg), "--seed", "9", "--out", str(out_dir)
        ]) == 0
        summary = json.loads((out_dir / "rates_summary.json").read_text())
        assert summary["metadata"]["seed"] == 9

    def test_outputs_stay_under_out_dir(self, tmp_path, monkeypatch):
        cfg = small_config(tmp_path)
        out_dir = tmp_path / "only-here"
        monkeypatch.chdir(tmp_path)
        before = set(tmp_path.iterdir())
        assert main(["gonogo", "--config", str(cfg), "--out", str(out_dir)]) == 0
        created = set(tmp_path.iterdir()) - before
        assert created == {out_dir}


class TestRegimesCommand:
    def test_traces_and_report(self, tmp_path):
        out_dir = tmp_path / "regimes"
        code = main(["regimes", "--duration-ms", "400", "--out", str(out_dir)])
        assert code == 0
        report = (out_dir / "regimes_report.txt").read_text()
        for regime in ("RS", "FS", "IB", "CH", "LTS", "REBOUND"):
            assert regime in report
        assert "FAIL" not in report
        assert (out_dir / "regime_rs_fixed.csv").exists()
        assert (out_dir / "regime_rebound_float.csv").exists()
        header = (out_dir / "regime_rs_fixed.csv").read_text().splitlines()[0]
        assert header == "step,time_ms,v_mv"


class TestPrintConfig:
    def test_prints_default(self, capsys):
        assert main(["print-config"]) == 0
        out = capsys.readouterr().out
        assert "[population GPe]" in out
        assert "[connection STN -> GPi/SNr]" in out
