"""Fixture CSVs are produced through the simulator's CLI, its public interface."""

import json
import subprocess
import sys

import pytest

RUN_CLI = [sys.executable, "-m", "auvformation.cli"]


def run_cli(args, cwd=None):
    return subprocess.run(RUN_CLI + args, capture_output=True, text=True, cwd=cwd)


@pytest.fixture(scope="session")
def short_run_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("short")
    cfg = out / "config.json"
    cfg.write_text(json.dumps({"sim": {"t_end": 0.5}}))
    proc = run_cli(["run", "--config", str(cfg), "--out", str(out)])
    assert proc.returncode == 0, proc.stderr
    return out / "run.csv"


@pytest.fixture(scope="session")
def default_artifacts(tmp_path_factory):
    """Full default run.csv plus the compare pair (the shipped scenario)."""
    out = tmp_path_factory.mktemp("default")
    proc = run_cli(["run", "--out", str(out)])
    assert proc.returncode == 0, proc.stderr
    proc = run_cli(["compare", "--out", str(out)])
    assert proc.returncode == 0, proc.stderr
    return {
        "run": out / "run.csv",
        "adaptive": out / "run_adaptive_sat.csv",
        "baseline": out / "run_baseline_smc.csv",
    }
