import json
import os

import numpy as np
import pytest

from cfisac.harness import (CSV_HEADER, ExperimentConfig, desk_config,
                            load_experiment_config, paper_config,
                            read_result_rows, run_drop, run_experiment,
                            summarize, validate)
from cfisac.optimizer import SolveOptions
from cfisac.scenario import SystemConfig, generate_scenario
from cfisac.units import dbm_to_watt


def tiny_exp(tmp_path, **kw):
    """A drop configuration small enough for sub-second end-to-end runs."""
    base = SystemConfig(
        B=2, K=2, Nt=2, Nr=2, L=8,
        fc=24e9, bandwidth=10e6, fs=20e6,
        sigma2_c=dbm_to_watt(-80), sigma2_r=dbm_to_watt(-80),
        P_b=(dbm_to_watt(35.0),) * 2,
        Gamma_k=(10 ** (-1.0),) * 2,  # -10 dB
    )
    args = dict(base=base, axis="power", values=(35.0,),
                schemes=("proposed", "radar_only"), drops=1, seed=3,
                output=str(tmp_path / "out.csv"))
    args.update(kw)
    return ExperimentConfig(**args)


def strip_wall(text):
    """Blank the wall-clock column, the only nondeterministic field."""
    out = []
    for line in text.strip().splitlines():
        parts = line.split(",")
        if parts and parts[0] != "drop_id":
            parts[8] = "-"
        out.append(",".join(parts))
    return "\n".join(out)


class TestRunExperiment:
    def test_single_row_cardinality(self, tmp_path):
        exp = tiny_exp(tmp_path, schemes=("proposed",))
        rows = run_experiment(exp)
        assert len(rows) == 1
        assert os.path.exists(exp.output)
        parsed = read_result_rows(exp.output)
        assert len(parsed) == 1
        assert parsed[0].scheme == "proposed"

    def test_deterministic_csv(self, tmp_path):
        exp = tiny_exp(tmp_path, drops=2)
        run_experiment(exp)
        first = open(exp.output).read()
        run_experiment(exp)
        second = open(exp.output).read()
        # identical apart from measured wall-clock times
        assert strip_wall(first) == strip_wall(second)

    def test_row_count_full_grid(self, tmp_path):
        exp = tiny_exp(tmp_path, values=(30.0, 35.0), drops=2,
                       schemes=("proposed", "radar_only"))
        rows = run_experiment(exp)
        assert len(rows) == 2 * 2 * 2

    def test_converged_rows_feasible(self, tmp_path):
        exp = tiny_exp(tmp_path, drops=2)
        rows = run_experiment(exp)
        for r in rows:
            if r.converged:
                assert np.isfinite(r.radar_sinr_dB)

    def test_infeasible_drop_recorded(self, tmp_path):
        base = tiny_exp(tmp_path).base
        from dataclasses import replace
        hard = replace(base, Gamma_k=(1e9,) * base.K)
        exp = tiny_exp(tmp_path, schemes=("proposed", "radar_only"))
        exp = ExperimentConfig(base=hard, axis=exp.axis, values=exp.values,
                               schemes=exp.schemes, drops=1, seed=3,
                               output=exp.output)
        rows = run_experiment(exp)
        by_scheme = {r.scheme: r for r in rows}
        assert not by_scheme["proposed"].converged
        assert np.isnan(by_scheme["proposed"].radar_sinr_dB)
        # radar-only ignores communication feasibility entirely
        assert by_scheme["radar_only"].converged

    def test_gamma_axis(self, tmp_path):
        exp = tiny_exp(tmp_path, axis="comm_sinr", values=(-10.0, -5.0),
                       schemes=("radar_only",), drops=1)
        rows = run_experiment(exp)
        assert [r.Gamma_dB for r in rows] == [-10.0, -5.0]
        assert len({r.P_dBm for r in rows}) == 1

    def test_parallel_matches_serial(self, tmp_path):
        exp = tiny_exp(tmp_path, drops=2, schemes=("radar_only",))
        run_experiment(exp)
        serial = open(exp.output).read()
        os.environ["CFISAC_THREADS"] = "2"
        try:
            run_experiment(exp)
        finally:
            del os.environ["CFISAC_THREADS"]
        parallel = open(exp.output).read()
        assert strip_wall(serial) == strip_wall(parallel)


class TestSummarize:
    def test_single_row_mean(self, tmp_path):
        exp = tiny_exp(tmp_path, schemes=("radar_only",))
        run_experiment(exp)
        table = summarize(exp.output)
        rows = read_result_rows(exp.output)
        assert len(table) == 1
        assert table[0].mean_radar_sinr_dB == pytest.approx(rows[0].radar_sinr_dB)

    def test_db_domain_average(self, tmp_path):
        path = tmp_path / "hand.csv"
        lines = [CSV_HEADER,
                 "0,proposed,35,0,10,1,5,true,1.0,3",
                 "1,proposed,35,0,20,1,5,true,1.0,4",
                 "2,proposed,35,0,99,1,5,false,1.0,5"]
        path.write_text("\n".join(lines) + "\n")
        table = summarize(path)
        assert len(table) == 1
        assert table[0].mean_radar_sinr_dB == pytest.approx(15.0)
        assert table[0].converged_rows == 2
        assert table[0].total_rows == 3

    def test_matches_independent_recomputation(self, tmp_path):
        exp = tiny_exp(tmp_path, drops=3, schemes=("radar_only",))
        run_experiment(exp)
        rows = read_result_rows(exp.output)
        vals = [r.radar_sinr_dB for r in rows if r.converged]
        table = summarize(exp.output)
        assert table[0].mean_radar_sinr_dB == pytest.approx(
            sum(vals) / len(vals), rel=1e-12)

    def test_rejects_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("nope,nope\n")
        with pytest.raises(ValueError, match="line 1"):
            summarize(path)

    def test_rejects_malformed_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(CSV_HEADER + "\n1,proposed,35\n")
        with pytest.raises(ValueError, match="line 2"):
            summarize(path)


class TestValidate:
    def test_all_checks_pass_default(self):
        checks = validate()
        assert all(c.passed for c in checks), [str(c) for c in checks]

    def test_tau_fault_injection_breaks_identity(self):
        checks = validate(tau_offset=1)
        by_name = {c.name: c for c in checks}
        assert not by_name["kronecker_target_identity"].passed

    def test_report_is_printable(self):
        text = "\n".join(str(c) for c in validate())
        assert "PASS" in text


class TestExperimentConfigIO:
    def test_json_roundtrip(self, tmp_path):
        cfg = {
            "base": {
                "B": 2, "K": 2, "Nt": 2, "Nr": 2, "L": 8,
                "fc": 24e9, "bandwidth": 10e6, "fs": 20e6,
                "sigma2_c": 1e-11, "sigma2_r": 1e-11,
                "P_b": [1.0, 1.0], "Gamma_k": [0.1, 0.1],
            },
            "axis": "power",
            "values": [30.0, 35.0],
            "schemes": ["proposed"],
            "drops": 2,
            "seed": 9,
            "output": str(tmp_path / "x.csv"),
        }
        path = tmp_path / "exp.json"
        path.write_text(json.dumps(cfg))
        exp = load_experiment_config(path)
        assert exp.base.B == 2
        assert exp.values == (30.0, 35.0)
        assert exp.drops == 2

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "exp.json"
        path.write_text(json.dumps({"base": {}, "axis": "power",
                                    "values": [1], "bogus": 1}))
        with pytest.raises(ValueError, match="bogus"):
            load_experiment_config(path)

    def test_unknown_base_key_rejected(self, tmp_path):
        path = tmp_path / "exp.json"
        path.write_text(json.dumps({
            "base": {"B": 1, "nonsense": 2}, "axis": "power", "values": [1]}))
        with pytest.raises(ValueError, match="nonsense"):
            load_experiment_config(path)

    def test_validation_rules(self, tmp_path):
        with pytest.raises(ValueError):
            tiny_exp(tmp_path, values=(35.0, 30.0))  # not increasing
        with pytest.raises(ValueError):
            tiny_exp(tmp_path, drops=0)
        with pytest.raises(ValueError):
            tiny_exp(tmp_path, schemes=("bogus",))
        with pytest.raises(ValueError):
            tiny_exp(tmp_path, axis="bogus")


class TestPresets:
    def test_desk_preset_shape(self):
        cfg = desk_config()
        assert (cfg.B, cfg.K, cfg.Nt, cfg.Nr, cfg.L) == (3, 4, 2, 2, 16)

    def test_paper_preset_shape(self):
        cfg = paper_config()
        assert (cfg.B, cfg.K, cfg.Nt, cfg.Nr, cfg.L) == (6, 15, 4, 4, 100)
        assert cfg.P_b[0] == pytest.approx(dbm_to_watt(35.0))
        assert cfg.Gamma_k[0] == pytest.approx(10.0)

    def test_scenario_fields_independent_of_power_and_gamma(self):
        # sweeping power or targets must not change the drop's randomness
        from dataclasses import replace
        a = generate_scenario(desk_config(P_dBm=25.0), 5)
        b = generate_scenario(desk_config(P_dBm=40.0), 5)
        assert np.array_equal(a.h, b.h)
        assert np.array_equal(a.G, b.G)
        assert np.array_equal(a.ap_positions, b.ap_positions)


class TestCli:
    def test_validate_command(self, capsys):
        from cfisac.cli import main
        assert main(["validate"]) == 0
        out = capsys.readouterr().out
        assert "PASS" in out

    def test_summarize_command(self, tmp_path, capsys):
        exp = tiny_exp(tmp_path, schemes=("radar_only",))
        run_experiment(exp)
        from cfisac.cli import main
        assert main(["summarize", "--csv", str(exp.output)]) == 0
        assert "radar_only" in capsys.readouterr().out

    def test_run_command_with_config(self, tmp_path, capsys):
        cfg = {
            "base": {
                "B": 2, "K": 2, "Nt": 2, "Nr": 2, "L": 8,
                "fc": 24e9, "bandwidth": 10e6, "fs": 20e6,
                "sigma2_c": 1e-11, "sigma2_r": 1e-11,
                "P_b": [3.16, 3.16], "Gamma_k": [0.1, 0.1],
            },
            "axis": "power", "values": [35.0], "schemes": ["radar_only"],
            "drops": 1, "seed": 1, "output": str(tmp_path / "cli.csv"),
        }
        path = tmp_path / "exp.json"
        path.write_text(json.dumps(cfg))
        from cfisac.cli import main
        assert main(["run", "--config", str(path)]) == 0
        assert os.path.exists(cfg["output"])
