import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from eventready.core_model import BeamSplitter, ExperimentConfig  # noqa: E402


@pytest.fixture
def balanced():
    return BeamSplitter.from_reflectivity(0.5)


def deg(*angles):
    return tuple(math.radians(a) for a in angles)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
