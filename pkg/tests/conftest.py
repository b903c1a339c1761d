import time

import pytest

from presto import load_scenario, run_scenario


@pytest.fixture(scope="session")
def bundled_runs():
    """Run each bundled scenario once and share (scenario, trace, report, seconds)."""
    out = {}
    for name in ("s71", "s72", "s73", "s74"):
        sc = load_scenario(name)
        t0 = time.perf_counter()
        trace, report = run_scenario(sc)
        out[name] = (sc, trace, report, time.perf_counter() - t0)
    return out
