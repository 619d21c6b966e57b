import pathlib

import pytest
from hypothesis import HealthCheck, settings

from lonesieve.curves import PlaneCurveModel
from lonesieve.fields import get_field
from lonesieve.specio import load_curve_spec

settings.register_profile(
    "suite",
    derandomize=True,
    max_examples=50,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

DATA = pathlib.Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def klein2():
    return PlaneCurveModel(
        {(3, 1, 0): 1, (0, 3, 1): 1, (1, 0, 3): 1}, get_field(2)
    )


@pytest.fixture(scope="session")
def fermat3():
    return PlaneCurveModel(
        {(4, 0, 0): 1, (0, 4, 0): 1, (0, 0, 4): 1}, get_field(3)
    )


@pytest.fixture(scope="session")
def toy_data():
    return load_curve_spec(DATA / "toy_quartic.json")


@pytest.fixture(scope="session")
def perf_data():
    return load_curve_spec(DATA / "perf_quartic.json")
