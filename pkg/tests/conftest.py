import pytest

from eeslife.battery import BatteryState, DegradationParams
from eeslife.market import synth_prices


@pytest.fixture
def params():
    return DegradationParams()


@pytest.fixture
def fresh(params):
    return BatteryState.fresh(params)


@pytest.fixture(scope="session")
def reference_year():
    """The synthetic stand-in for one year of day-ahead prices."""
    return synth_prices(1, 365, 32.0, 30.0, 3.0, day_sd=0.5)
