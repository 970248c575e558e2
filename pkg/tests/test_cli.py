import json
import subprocess
import sys

import pytest


def run_cli(*argv, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "kitaevsim.cli", *argv],
        capture_output=True, text=True, cwd=cwd,
    )


class TestExitCodes:
    def test_unknown_flag_exits_2_with_usage(self):
        proc = run_cli("evolve", "--no-such-flag")
        assert proc.returncode == 2
        assert "usage" in proc.stderr.lower()

    def test_unknown_subcommand_exits_2(self):
        proc = run_cli("frobnicate")
        assert proc.returncode == 2

    def test_bad_lattice_exits_2(self, tmp_path):
        proc = run_cli("evolve", "--nx", "1", "--outdir", str(tmp_path))
        assert proc.returncode == 2
        assert "configuration error" in proc.stderr

    def test_bad_config_file_exits_2(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("nx: 2\n")
        proc = run_cli("evolve", "--config", str(cfg), "--outdir", str(tmp_path))
        assert proc.returncode == 2

    def test_computation_failure_exits_3(self, tmp_path):
        # entropy needs the full Hilbert space; 3x3 exceeds the cap
        proc = run_cli(
            "entropy", "--nx", "3", "--ny", "3", "--outdir", str(tmp_path),
            "--samples", "3",
        )
        assert proc.returncode == 3
        assert "computation failed" in proc.stderr


class TestManifoldCommand:
    def test_class_sizes_and_total(self, tmp_path):
        proc = run_cli("manifold", "--n", "4", "--outdir", str(tmp_path))
        assert proc.returncode == 0
        assert "1, 4, 6, 4, 1" in proc.stdout
        assert "total states: 16" in proc.stdout
        body = [
            line for line in (tmp_path / "configs.csv").read_text().splitlines()
            if not line.startswith("#")
        ]
        assert body[0] == "bitmask,weight"
        assert len(body) == 17
        assert body[1] == "0x0,0"


class TestLatticeCommand:
    def test_geometry_dump_and_report(self, tmp_path):
        proc = run_cli("lattice", "--nx", "2", "--ny", "2", "--outdir", str(tmp_path))
        assert proc.returncode == 0
        assert "[PASS]" in proc.stdout and "[FAIL]" not in proc.stdout
        doc = json.loads((tmp_path / "geometry.json").read_text())
        assert len(doc["sites"]) == 8

    def test_kernel_warning_on_3x3(self, tmp_path):
        proc = run_cli("lattice", "--nx", "3", "--ny", "3", "--outdir", str(tmp_path))
        assert proc.returncode == 0
        assert "[WARN] signature_injectivity" in proc.stdout


class TestConfigHandling:
    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# comment line\n"
            "nx = 2\nny = 2\njx = 0.3\njy = 0.3\njz = 0.3\n"
            "d = 0.05\nomega = 0.4\nsamples = 9\nt_max = 2.0\n"
            "initial = 0x0\n"
        )
        out1 = tmp_path / "o1"
        out2 = tmp_path / "o2"
        p1 = run_cli("evolve", "--config", str(cfg), "--outdir", str(out1))
        p2 = run_cli(
            "evolve", "--config", str(cfg), "--outdir", str(out2),
            "--samples", "5",
        )
        assert p1.returncode == 0 and p2.returncode == 0
        rows1 = [l for l in (out1 / "coefficients.csv").read_text().splitlines()
                 if not l.startswith("#")]
        rows2 = [l for l in (out2 / "coefficients.csv").read_text().splitlines()
                 if not l.startswith("#")]
        # flags win over the file: fewer samples per series
        assert len(rows2) < len(rows1)

    def test_identical_config_gives_byte_identical_output(self, tmp_path):
        out = tmp_path / "det"
        args = ("evolve", "--outdir", str(out), "--samples", "9", "--t-max", "2.0")
        assert run_cli(*args).returncode == 0
        first = (out / "coefficients.csv").read_bytes()
        assert run_cli(*args).returncode == 0
        assert (out / "coefficients.csv").read_bytes() == first

    def test_header_block_present(self, tmp_path):
        out = tmp_path / "h"
        run_cli("evolve", "--outdir", str(out), "--samples", "5", "--t-max", "1.0")
        lines = (out / "coefficients.csv").read_text().splitlines()
        assert lines[0].startswith("# kitaevsim v")
        assert lines[1] == "# convention: hbar=1"
        assert any(l.startswith("# config_hash:") for l in lines[:4])


class TestPipelineCommands:
    def test_phase_and_sweep_outputs(self, tmp_path):
        out = tmp_path / "p"
        proc = run_cli(
            "phase", "--outdir", str(out), "--d", "1.0", "--omega", "-3.0",
            "--t-max", "6.283185307179586", "--samples", "201",
        )
        assert proc.returncode == 0
        assert (out / "phase.csv").exists()
        assert (out / "intervals.csv").exists()
        assert (out / "levels.csv").exists()
        intervals = [
            l for l in (out / "intervals.csv").read_text().splitlines()
            if not l.startswith("#")
        ][1:]
        assert len(intervals) == 2  # one growth arc, one decay arc over a period
        assert intervals[0].endswith("GROWING")
        assert intervals[1].endswith("DECAYING")

        proc = run_cli(
            "sweep", "--outdir", str(out), "--omega-min", "-0.6",
            "--omega-max", "0.2", "--omega-steps", "17", "--jobs", "2",
            "--jx", "0.1", "--jy", "0.1", "--jz", "0.1", "--d", "0.05",
            "--t-max", "20.0", "--samples", "11",
        )
        assert proc.returncode == 0
        summary = json.loads((out / "sweep_summary.json").read_text())
        # omega0 = -0.2 at these couplings and the grid contains it; the
        # transition weight must peak at resonance within one grid step
        assert summary["omega0"] == pytest.approx(-0.2, abs=1e-12)
        assert abs(summary["omega_peak"] - summary["omega0"]) <= 0.05 + 1e-12

    def test_entropy_correlate_thermal(self, tmp_path):
        out = tmp_path / "e"
        proc = run_cli(
            "entropy", "--outdir", str(out), "--d", "0.2", "--omega", "-1.0",
            "--jx", "0.3", "--jy", "0.3", "--jz", "0.3", "--samples", "5",
            "--t-max", "2.0",
        )
        assert proc.returncode == 0
        rows = [
            l for l in (out / "entropy.csv").read_text().splitlines()
            if not l.startswith("#")
        ][1:]
        assert len(rows) == 5

        proc = run_cli(
            "correlate", "--outdir", str(out), "--d", "0.05", "--t-max", "0.5",
            "--samples", "5", "--scan-tol", "1e-6",
        )
        assert proc.returncode == 0
        assert "selection rule" in proc.stdout
        assert (out / "correlations.csv").exists()

        proc = run_cli(
            "thermal", "--outdir", str(out), "--kt", "1.0", "--d", "0.05",
            "--t-max", "1.0", "--samples", "5", "--members", "0x0,0x1",
        )
        assert proc.returncode == 0
        doc = json.loads((out / "thermal.json").read_text())
        assert doc["trace"] == pytest.approx(1.0, abs=1e-10)
        assert len(doc["weights"]) == 2

    def test_emit_plot_script(self, tmp_path):
        out = tmp_path / "plot"
        proc = run_cli(
            "evolve", "--outdir", str(out), "--samples", "5", "--t-max", "1.0",
            "--emit-plot-script",
        )
        assert proc.returncode == 0
        assert (out / "plot_coefficients.py").exists()


class TestValidateCommand:
    # the real checks run in tests/test_acceptance.py; here only the
    # command wiring (exit codes, failure list) is exercised

    def test_exit_zero_when_all_pass(self, tmp_path, monkeypatch):
        from kitaevsim import cli
        from kitaevsim.validation import CheckResult

        monkeypatch.setattr(
            cli, "run_acceptance",
            lambda seed: [CheckResult(1, "stub", True, "ok")],
        )
        monkeypatch.setattr(cli, "oracle_error_report", lambda: {"targets": []})
        code = cli.main(["validate", "--outdir", str(tmp_path)])
        assert code == 0
        doc = json.loads((tmp_path / "validate.json").read_text())
        assert doc["failed"] == 0

    def test_exit_one_with_failure_list(self, tmp_path, monkeypatch, capsys):
        from kitaevsim import cli
        from kitaevsim.validation import CheckResult

        monkeypatch.setattr(
            cli, "run_acceptance",
            lambda seed: [
                CheckResult(1, "stub", True, "ok"),
                CheckResult(2, "broken", False, "bad"),
            ],
        )
        monkeypatch.setattr(cli, "oracle_error_report", lambda: {"targets": []})
        code = cli.main(["validate", "--outdir", str(tmp_path)])
        assert code == 1
        captured = capsys.readouterr().out
        assert "[FAIL] criterion  2" in captured
        assert json.loads((tmp_path / "validate.json").read_text())["failed"] == 1
