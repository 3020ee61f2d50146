import numpy as np
import pytest

from ristoolkit.core import DirectionTerminal, Frequency, PointTerminal, Scene, make_layout
from ristoolkit.unitcell import default_response


@pytest.fixture(scope="session")
def resp():
    return default_response()


@pytest.fixture(scope="session")
def layout20():
    return make_layout(20, 20, 2.35e-3)


@pytest.fixture(scope="session")
def layout10():
    return make_layout(10, 10, 2.4e-3)


def near_field_scene(f_hz, inc_deg=45.0, distance=0.2):
    """Horn at ``distance`` and ``inc_deg`` in the x-z plane, observation toward boresight."""
    return Scene(PointTerminal.at_angle(np.deg2rad(inc_deg), distance),
                 DirectionTerminal((0.0, 0.0, 1.0)), Frequency(f_hz))


def random_scene(rng, f_lo=22.5e9, f_hi=30e9):
    feed = PointTerminal.at_angle(np.deg2rad(rng.uniform(-60, 60)), rng.uniform(0.1, 1.0),
                                  phi=np.deg2rad(rng.uniform(-30, 30)))
    obs = DirectionTerminal.at_angle(np.deg2rad(rng.uniform(-60, 60)))
    return Scene(feed, obs, Frequency(rng.uniform(f_lo, f_hi)))


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
