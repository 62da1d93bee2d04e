import json
import sys

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=100, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

MEAN_TARGET = dict(target_error=0.05, target_failure=0.05)


@pytest.fixture
def write_config(tmp_path):
    def write(doc, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(doc), encoding="utf-8")
        return str(path)

    return write


def scenario_config(name, total=3e4, exposure=0.002, **extra):
    doc = {
        "study": {"kind": "mean_estimation", **MEAN_TARGET},
        "scenario": name,
        "costs": {"exposure_fraction": exposure},
        "budget": {"total": total},
    }
    doc.update(extra)
    return doc


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda s: int(s.split("[")[1].split("]")[0])):
        terminalreporter.write_line(line)
