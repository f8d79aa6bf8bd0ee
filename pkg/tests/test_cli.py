"""Command-line front end tests: verdict tables, exports, runs, exit codes."""

import csv

import numpy as np
import pytest

from daglms.cli import CHECK_HEADER, main
from daglms.spr_design import dag_transfer, is_spr_numeric, is_pr_unit_pole, integrated_dag
from daglms.adapt import PRESET_ORDER, make_preset


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


SMALL_FEEDFORWARD_CONFIG = """
[scenario]
kind = feedforward
noise_kind = bandpass
sample_rate_hz = 2500
band_low_hz = 70
band_high_hz = 170
amplitude = 0.006
seed = 11
n_adaptive_params = 10
duration_samples = 30000
open_loop_prefix_samples = 5000
primary_path = resonant_primary
secondary_path = resonant_secondary

[run]
algorithms = nlms
presets = integral, arima2
mu_nlms = 0.0002
threshold_db = 10
window_seconds = 1.0
"""


@pytest.fixture
def ff_config(tmp_path):
    path = tmp_path / "scenario.ini"
    path.write_text(SMALL_FEEDFORWARD_CONFIG)
    return path


class TestCheck:
    def test_default_table(self, tmp_path, capsys):
        assert main(["check", "--out", str(tmp_path)]) == 0
        rows = read_csv(tmp_path / "check.csv")
        assert [r["name"] for r in rows] == list(PRESET_ORDER)
        verdicts = [(r["integrated_pr"], r["dag_spr"]) for r in rows]
        assert verdicts == [("Y", "Y"), ("N", "Y"), ("N", "Y"), ("Y", "Y"), ("N", "Y")]
        assert list(rows[0].keys()) == CHECK_HEADER

    def test_round_trip_matches_module(self, tmp_path):
        main(["check", "--out", str(tmp_path)])
        for row in read_csv(tmp_path / "check.csv"):
            cfg = make_preset(row["name"])
            spr = is_spr_numeric(dag_transfer(cfg))
            pr = is_pr_unit_pole(integrated_dag(cfg))
            assert row["dag_spr"] == ("Y" if spr.is_spr else "N")
            assert row["integrated_pr"] == ("Y" if pr.is_pr else "N")
            assert float(row["min_re_dag"]) == spr.min_real_part

    def test_custom_entry(self, tmp_path):
        main(["check", "--out", str(tmp_path), "--custom", "1.5,0,0"])
        rows = read_csv(tmp_path / "check.csv")
        assert rows[-1]["name"] == "custom0"
        assert rows[-1]["dag_spr"] == "N"

    def test_expect_match_and_mismatch(self, tmp_path):
        out1 = tmp_path / "a"
        main(["check", "--out", str(out1)])
        assert main(["check", "--out", str(tmp_path / "b"), "--expect", str(out1 / "check.csv")]) == 0
        bad = tmp_path / "bad.csv"
        rows = read_csv(out1 / "check.csv")
        rows[0]["dag_spr"] = "N"
        with bad.open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=CHECK_HEADER)
            writer.writeheader()
            writer.writerows(rows)
        assert main(["check", "--out", str(tmp_path / "c"), "--expect", str(bad)]) == 1

    def test_deterministic_bytes(self, tmp_path):
        main(["check", "--out", str(tmp_path / "x")])
        main(["check", "--out", str(tmp_path / "y")])
        assert (tmp_path / "x" / "check.csv").read_bytes() == (tmp_path / "y" / "check.csv").read_bytes()


class TestContour:
    def test_small_grid(self, tmp_path):
        code = main([
            "contour", "--d1p", "0.9", "--out", str(tmp_path),
            "--c1-min", "0.99", "--c1-max", "0.99", "--c1-step", "1",
            "--c2-min", "0", "--c2-max", "0", "--c2-step", "1",
            "--grid", "1024",
        ])
        assert code == 0
        rows = read_csv(tmp_path / "contour_d1p_0.9.csv")
        assert len(rows) == 1
        assert rows[0]["spr_dag"] == "1" and rows[0]["pr_integrated"] == "0"

    def test_trivial_cell(self, tmp_path):
        main([
            "contour", "--d1p", "0", "--out", str(tmp_path),
            "--c1-min", "0", "--c1-max", "0", "--c1-step", "1",
            "--c2-min", "0", "--c2-max", "0", "--c2-step", "1",
            "--grid", "1024",
        ])
        rows = read_csv(tmp_path / "contour_d1p_0.csv")
        assert rows[0]["spr_dag"] == "1" and rows[0]["pr_integrated"] == "1"

    def test_both_flags_on_grid(self, tmp_path):
        main([
            "contour", "--d1p", "0.5", "--out", str(tmp_path),
            "--c1-min", "-1", "--c1-max", "1", "--c1-step", "0.5",
            "--c2-min", "-0.5", "--c2-max", "0.5", "--c2-step", "0.5",
            "--grid", "1024",
        ])
        rows = read_csv(tmp_path / "contour_d1p_0.5.csv")
        assert len(rows) == 15
        assert {"c1", "c2", "spr_dag", "pr_integrated"} <= set(rows[0].keys())


class TestBode:
    def test_integral_flat(self, tmp_path):
        main(["bode", "--presets", "integral", "--out", str(tmp_path), "--grid", "512"])
        rows = read_csv(tmp_path / "bode_integral.csv")
        gains = np.array([float(r["gain_db"]) for r in rows])
        phases = np.array([float(r["phase_deg"]) for r in rows])
        assert np.allclose(gains, 0.0) and np.allclose(phases, 0.0)

    def test_arima2_low_frequency_gain(self, tmp_path):
        main(["bode", "--presets", "arima2", "--out", str(tmp_path), "--grid", "512"])
        rows = read_csv(tmp_path / "bode_arima2.csv")
        assert float(rows[0]["freq_hz"]) == 0.0
        assert float(rows[0]["gain_db"]) == pytest.approx(20.0 * np.log10(19.9), rel=1e-9)
        assert float(rows[-1]["gain_db"]) < 0.0

    def test_summary_mean_log_gain(self, tmp_path):
        main(["bode", "--out", str(tmp_path), "--grid", "512"])
        rows = read_csv(tmp_path / "bode_summary.csv")
        assert [r["name"] for r in rows] == list(PRESET_ORDER)
        for row in rows:
            assert row["phase_within_90deg"] == "Y"
            assert abs(float(row["mean_log_gain"])) < 1e-3


class TestRunCompare:
    def test_compare_two_presets(self, ff_config, tmp_path):
        out = tmp_path / "out"
        code = main(["compare", "--config", str(ff_config), "--out", str(out)])
        assert code == 0
        assert (out / "trace_nlms_integral.csv").exists()
        assert (out / "trace_nlms_arima2.csv").exists()
        rows = read_csv(out / "summary.csv")
        assert len(rows) == 2
        by_preset = {r["preset"]: r for r in rows}
        # accelerated preset attains the threshold strictly sooner
        t_triv = by_preset["integral"]["time_to_threshold_idx"]
        t_acc = by_preset["arima2"]["time_to_threshold_idx"]
        t_triv_val = float(t_triv) if t_triv else np.inf
        assert t_acc != ""
        assert float(t_acc) < t_triv_val

    def test_run_single(self, ff_config, tmp_path):
        out = tmp_path / "single"
        code = main(["run", "--config", str(ff_config), "--out", str(out), "--preset", "arima2"])
        assert code == 0
        rows = read_csv(out / "summary.csv")
        assert len(rows) == 1 and rows[0]["preset"] == "arima2"
        trace_rows = read_csv(out / "trace_nlms_arima2.csv")
        assert len(trace_rows) == 30000
        assert trace_rows[0]["e0"] == ""  # open-loop prefix rows carry no error
        assert trace_rows[-1]["e0"] != ""

    def test_byte_identical_reruns(self, ff_config, tmp_path):
        main(["compare", "--config", str(ff_config), "--out", str(tmp_path / "r1")])
        main(["compare", "--config", str(ff_config), "--out", str(tmp_path / "r2")])
        for name in ("trace_nlms_integral.csv", "trace_nlms_arima2.csv", "summary.csv"):
            a = (tmp_path / "r1" / name).read_bytes()
            b = (tmp_path / "r2" / name).read_bytes()
            assert a == b, name

    def test_seed_override_changes_output(self, ff_config, tmp_path):
        main(["run", "--config", str(ff_config), "--out", str(tmp_path / "s1")])
        main(["run", "--config", str(ff_config), "--out", str(tmp_path / "s2"), "--seed", "99"])
        a = (tmp_path / "s1" / "trace_nlms_integral.csv").read_bytes()
        b = (tmp_path / "s2" / "trace_nlms_integral.csv").read_bytes()
        assert a != b

    def test_config_error_exit_code(self, tmp_path):
        bad = tmp_path / "bad.ini"
        bad.write_text(SMALL_FEEDFORWARD_CONFIG.replace(
            "duration_samples = 30000", "duration_samples = 1000"
        ))
        assert main(["run", "--config", str(bad), "--out", str(tmp_path / "o")]) == 3

    def test_missing_config_exit_code(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.ini"), "--out", str(tmp_path)]) == 3

    def test_divergence_exit_code(self, ff_config, tmp_path):
        cfg = ff_config.read_text().replace("mu_nlms = 0.0002", "mu_nlms = 0.0002\nmu_lms = 80000")
        cfg = cfg.replace("algorithms = nlms", "algorithms = lms")
        path = ff_config.parent / "diverging.ini"
        path.write_text(cfg)
        out = tmp_path / "divout"
        code = main(["compare", "--config", str(path), "--out", str(out)])
        assert code == 2
        rows = read_csv(out / "summary.csv")
        assert any(r["diverged"] == "Y" for r in rows)
        # traces still written for every run in the sweep
        assert (out / "trace_lms_integral.csv").exists()


class TestSysidConfig:
    def test_sysid_from_config(self, tmp_path):
        path = tmp_path / "sysid.ini"
        path.write_text("""
[scenario]
kind = sysid
noise_kind = white
seed = 3
true_params = 0.5, -0.3
duration_samples = 4000

[run]
algorithms = lms
presets = integral
mu_lms = 0.1
""")
        out = tmp_path / "out"
        assert main(["run", "--config", str(path), "--out", str(out)]) == 0
        rows = read_csv(out / "trace_lms_integral.csv")
        assert float(rows[-1]["param_err"]) < 1e-3
