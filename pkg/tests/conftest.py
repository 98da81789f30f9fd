from __future__ import annotations

import numpy as np
import pytest

from latentcut.pipeline import run_edit
from latentcut.scenario import assemble_run, canonical_run_spec, synth_video


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def canonical_run():
    """(scenario, config, deps) for the shipped square-to-circle run."""
    return assemble_run(canonical_run_spec())


@pytest.fixture(scope="session")
def canonical_video(canonical_run):
    scenario, _, _ = canonical_run
    return synth_video(scenario)


@pytest.fixture(scope="session")
def canonical_result(canonical_run, canonical_video):
    _, config, deps = canonical_run
    video, _ = canonical_video
    return run_edit(video, config, deps)


def pytest_terminal_summary(terminalreporter):
    """Surface the acceptance-criteria lines in the run summary."""
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "REPORT_LINES", []) if mod is not None else []
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
