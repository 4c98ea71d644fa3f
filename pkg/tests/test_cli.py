"""Config ingestion, command dispatch, persistence, and exit-code contracts."""

import json
import math

import numpy as np
import pytest

from auvformation import cli, config, runio, sim
from auvformation.errors import SchemaError, ValidationError

SHORT_SIM = {"sim": {"t_end": 0.5}}


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


class TestParseConfig:
    def test_empty_document_gives_shipped_defaults(self, tmp_path):
        sc = config.parse_config(write_config(tmp_path, {}))
        assert sc.n == 4
        assert sc.controller == "adaptive_sat"
        assert sc.dt == 1e-3
        assert sc.t_end == 20.0
        assert sc.kappa == 0.5
        assert sc.disturbance_on is True
        assert sc.gains.k1 == 5.0 and sc.gains.k8 == 5.0
        assert sc.gains.k2 == sc.gains.k3 == sc.gains.k9 == sc.gains.k10 == 0.4
        assert sc.gains.gamma == pytest.approx(5.0 / 7.0)
        assert sc.gains.iota == pytest.approx(7.0 / 5.0)
        assert sc.gains.beta_s == 20.0 and sc.gains.eps_bl == 0.01
        assert [p.tau_max for p in sc.agents] == [300.0] * 4
        assert np.array_equal(
            sc.graph.adjacency,
            [[0, 1, 0, 0], [1, 0, 1, 0], [0, 1, 0, 1], [0, 0, 1, 0]],
        )
        assert np.array_equal(sc.graph.pinning, [1, 0, 0, 0])
        assert np.allclose(sc.initial[0].eta, [2, 3, 3, 0.3, 0, 0.2])
        assert np.allclose(sc.initial[1].eta, [2.5, 3.5, 3, 0.2, 0, 0.25])
        assert np.array_equal(sc.fuzzy_net.centers, [-7, -5, -3, -1, 0, 1, 3, 5, 7])
        assert sc.fuzzy_net.width == 4.0

    def test_asymmetric_adjacency_names_entry(self, tmp_path):
        doc = {"graph": {"adjacency": [[0, 1], [0.5, 0]], "pinning": [1, 0]}}
        with pytest.raises(ValidationError, match=r"adjacency\[1\]\[2\]"):
            config.parse_config(write_config(tmp_path, doc))

    def test_zero_dt_rejected(self, tmp_path):
        with pytest.raises(ValidationError, match="sim.dt must be positive"):
            config.parse_config(write_config(tmp_path, {"sim": {"dt": 0.0}}))

    def test_unknown_key_rejected_with_path(self, tmp_path):
        with pytest.raises(SchemaError) as err:
            config.parse_config(write_config(tmp_path, {"sim": {"dtt": 1e-3}}))
        assert err.value.path == "sim/dtt"

    def test_wrong_type_reports_path(self, tmp_path):
        with pytest.raises(SchemaError) as err:
            config.parse_config(write_config(tmp_path, {"sim": {"dt": "fast"}}))
        assert err.value.path == "sim/dt"

    def test_invalid_json_is_schema_error(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(SchemaError):
            config.parse_config(str(path))

    def test_gain_override_and_bad_exponent(self, tmp_path):
        sc = config.parse_config(
            write_config(tmp_path, {"controller": {"gains": {"beta_s": 35.0}}})
        )
        assert sc.gains.beta_s == 35.0
        with pytest.raises(ValidationError, match="gamma"):
            config.parse_config(
                write_config(tmp_path, {"controller": {"gains": {"gamma": 1.5}}})
            )

    def test_baseline_gains_schema(self, tmp_path):
        doc = {"controller": {"name": "baseline_smc", "gains": {"beta0": 150.0}}}
        sc = config.parse_config(write_config(tmp_path, doc))
        assert sc.controller == "baseline_smc"
        assert sc.gains.beta0 == 150.0
        doc = {"controller": {"name": "baseline_smc", "gains": {"k9": 1.0}}}
        with pytest.raises(SchemaError):
            config.parse_config(write_config(tmp_path, doc))

    def test_formation_indices_one_based(self, tmp_path):
        doc = {"formation": {"offsets": [
            {"i": 0, "j": 1, "delta": [1, 0, 0]},
        ], "leader_offsets": [{"i": 1, "delta": [0, 0, 0]}]}}
        with pytest.raises(ValidationError, match="out of range"):
            config.parse_config(write_config(tmp_path, doc))

    def test_formation_must_match_graph(self, tmp_path):
        doc = {"formation": {"offsets": [
            {"i": 1, "j": 2, "delta": [1, 0, 0]},
            {"i": 2, "j": 1, "delta": [-1, 0, 0]},
        ], "leader_offsets": [{"i": 1, "delta": [0, 0, 0]}]}}
        with pytest.raises(ValidationError, match="match graph edges"):
            config.parse_config(write_config(tmp_path, doc))

    def test_custom_graph_requires_initial_states(self, tmp_path):
        doc = {
            "graph": {"adjacency": [[0, 1], [1, 0]], "pinning": [1, 0]},
            "formation": {
                "offsets": [
                    {"i": 1, "j": 2, "delta": [0, 5, 0]},
                    {"i": 2, "j": 1, "delta": [0, -5, 0]},
                ],
                "leader_offsets": [{"i": 1, "delta": [0, 0, 0]}],
            },
        }
        with pytest.raises(ValidationError, match="initial states are required"):
            config.parse_config(write_config(tmp_path, doc))
        doc["initial"] = [{"eta": [0] * 6}, {"eta": [1] * 5 + [0]}]
        sc = config.parse_config(write_config(tmp_path, doc))
        assert sc.n == 2

    def test_constant_leader(self, tmp_path):
        doc = {"leader": {"type": "constant", "params": {"pose": [1, 2, 3, 0, 0, 0]}}}
        sc = config.parse_config(write_config(tmp_path, doc))
        assert sc.leader.kind == "constant"
        pose, vel, _ = sc.leader.eval(5.0)
        assert np.array_equal(pose, [1, 2, 3, 0, 0, 0])
        assert np.array_equal(vel, np.zeros(6))


class TestCsvRoundTrip:
    def test_full_precision(self, tmp_path):
        import dataclasses

        sc = dataclasses.replace(config.default_scenario(), t_end=0.05)
        log = sim.run(sc)
        path = tmp_path / "run.csv"
        runio.write_csv(log, path)
        back = runio.read_csv(path)
        for field in ("t", "eta", "nu", "eps1", "eps2", "tau", "u", "theta", "mu"):
            assert np.array_equal(getattr(back, field), getattr(log, field)), field

    def test_header_schema(self):
        cols = runio.csv_header(2)
        assert cols[0] == "t"
        assert len(cols) == 1 + 43 * 2
        assert cols[1] == "eta_1_1"
        assert cols[37] == "theta_1"
        assert cols[43] == "mu_1_6"
        assert cols[44] == "eta_2_1"

    def test_schema_mismatch_detected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,foo,bar\n0,1,2\n")
        with pytest.raises(ValueError):
            runio.read_csv(path)


class TestCmdRun:
    def test_short_run_writes_artifacts(self, tmp_path):
        cfg = write_config(tmp_path, SHORT_SIM)
        out = tmp_path / "out"
        assert cli.main(["run", "--config", cfg, "--out", str(out)]) == 0
        rows = (out / "run.csv").read_text().splitlines()
        assert len(rows) == 1 + 501  # header + t_end/dt + 1 samples
        metrics = json.loads((out / "metrics.json").read_text())
        assert set(metrics) == {
            "settling_time", "ise", "peak_torque", "peak_applied", "chattering",
        }
        assert metrics["peak_applied"] <= 300.0

    def test_singular_initial_pitch_exits_two(self, tmp_path, capsys):
        doc = {"initial": [
            {"eta": [2, 3, 3, 0.3, math.pi / 2, 0.2]},
            {"eta": [2.5, 3.5, 3, 0.2, 0, 0.25]},
            {"eta": [2, 3, 3, 0.3, 0, 0.2]},
            {"eta": [3, 3, 2, 0.3, 0, 0.2]},
        ]}
        cfg = write_config(tmp_path, doc)
        assert cli.main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
        assert "pitch" in capsys.readouterr().err

    def test_unwritable_out_dir_exits_one(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        cfg = write_config(tmp_path, SHORT_SIM)
        code = cli.main(["run", "--config", cfg, "--out", str(blocker / "sub")])
        assert code == 1

    def test_bad_config_exits_one(self, tmp_path):
        cfg = write_config(tmp_path, {"sim": {"dt": -1.0}})
        assert cli.main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 1

    def test_flag_overrides(self, tmp_path):
        cfg = write_config(tmp_path, {})
        out = tmp_path / "o"
        code = cli.main([
            "run", "--config", cfg, "--out", str(out),
            "--t-end", "0.2", "--dt", "0.002", "--controller", "baseline_smc",
        ])
        assert code == 0
        rows = (out / "run.csv").read_text().splitlines()
        assert len(rows) == 1 + 101


class TestCmdCompare:
    def test_short_compare_report(self, tmp_path):
        cfg = write_config(tmp_path, SHORT_SIM)
        out = tmp_path / "cmp"
        assert cli.main(["compare", "--config", cfg, "--out", str(out)]) == 0
        report = json.loads((out / "compare.json").read_text())
        assert set(report) == {"adaptive_sat", "baseline_smc", "delta"}
        assert (out / "run_adaptive_sat.csv").exists()
        assert (out / "run_baseline_smc.csv").exists()
        delta = report["delta"]
        assert delta["peak_torque"] == pytest.approx(
            report["baseline_smc"]["peak_torque"] - report["adaptive_sat"]["peak_torque"]
        )

    def test_both_branches_fail_exits_two(self, tmp_path):
        doc = {"initial": [
            {"eta": [0, 0, 0, 0, 1.5, 0]},
            {"eta": [0] * 6}, {"eta": [0] * 6}, {"eta": [0] * 6},
        ]}
        cfg = write_config(tmp_path, doc)
        assert cli.main(["compare", "--config", cfg, "--out", str(tmp_path / "c")]) == 2


class TestCmdMc:
    def test_degenerate_sweep_matches_direct_measurement(self, tmp_path, default_log):
        cfg = write_config(tmp_path, {})
        out = tmp_path / "mc"
        code = cli.main([
            "mc", "--config", cfg, "--out", str(out), "--scales", "1", "--n-random", "0",
        ])
        assert code == 0
        payload = json.loads((out / "mc.json").read_text())
        assert len(payload["trials"]) == 1
        row = payload["trials"][0]
        assert row["settling_time"] == pytest.approx(
            sim.settling_time(default_log, 0.5)
        )
        assert row["t_bound"] == pytest.approx(payload["t_bound"])

    def test_fixed_seed_reproducible_bytes(self, tmp_path):
        cfg = write_config(tmp_path, {"sim": {"t_end": 0.3, "seed": 7}})
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert cli.main(["mc", "--config", cfg, "--out", str(out_a),
                         "--scales", "0.5,1", "--n-random", "2"]) == 0
        assert cli.main(["mc", "--config", cfg, "--out", str(out_b),
                         "--scales", "0.5,1", "--n-random", "2"]) == 0
        assert (out_a / "mc.json").read_bytes() == (out_b / "mc.json").read_bytes()

    def test_empty_scales_is_usage_error(self, tmp_path):
        cfg = write_config(tmp_path, {})
        assert cli.main(["mc", "--config", cfg, "--out", str(tmp_path / "m"),
                         "--scales", ""]) == 1


class TestCmdBound:
    def test_default_report(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {})
        assert cli.main(["bound", "--config", cfg]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["lambda_min"] == pytest.approx(0.12061475842818316)
        assert report["t_ideal"] == pytest.approx(125.20627211833744)
        assert report["t_practical"] == pytest.approx(250.41254423667488)
        assert report["residual_level"] == pytest.approx(1.0729677736656964)
        for key in ("zeta1", "zeta2", "nu1", "nu2", "chi1", "chi2", "sigma", "kappa"):
            assert key in report

    def test_invalid_exponent_exits_one(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"controller": {"gains": {"gamma": 1.5}}})
        assert cli.main(["bound", "--config", cfg]) == 1

    def test_larger_gains_shrink_bound(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {})
        cli.main(["bound", "--config", cfg])
        base = json.loads(capsys.readouterr().out)
        doubled = {"controller": {"gains": {"k2": 0.8, "k3": 0.8, "k9": 0.8, "k10": 0.8}}}
        cfg2 = write_config(tmp_path, doubled, name="doubled.json")
        cli.main(["bound", "--config", cfg2])
        big = json.loads(capsys.readouterr().out)
        assert big["t_ideal"] < base["t_ideal"]
        assert big["t_practical"] < base["t_practical"]

    def test_baseline_config_rejected(self, tmp_path):
        cfg = write_config(tmp_path, {"controller": {"name": "baseline_smc"}})
        assert cli.main(["bound", "--config", cfg]) == 1
