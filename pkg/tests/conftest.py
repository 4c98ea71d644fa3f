"""Shared fixtures: expensive full-scale runs are computed once per session."""

import numpy as np
import pytest

from auvformation import config, sim

ACCEPTANCE_RESULTS = []


@pytest.fixture(scope="session")
def default_scenario():
    return config.default_scenario()


@pytest.fixture(scope="session")
def default_log(default_scenario):
    return sim.run(default_scenario)


@pytest.fixture(scope="session")
def compare_outcome(tmp_path_factory):
    """cmd_compare on the shipped defaults: (exit_code, out_dir, report)."""
    import json

    from auvformation import cli

    out = tmp_path_factory.mktemp("compare")
    code = cli.main(["compare", "--out", str(out)])
    report = json.loads((out / "compare.json").read_text())
    return code, out, report


@pytest.fixture(scope="session")
def sweep_rows(default_scenario):
    return sim.mc_sweep(default_scenario, [0.1, 1.0, 10.0])


@pytest.fixture
def acceptance(request):
    """Recorder for acceptance criteria results printed in the summary."""

    def record(criterion: str, passed: bool, detail: str = ""):
        ACCEPTANCE_RESULTS.append((criterion, passed, detail))
        assert passed, f"{criterion}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        line = f"{status}  {criterion}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
