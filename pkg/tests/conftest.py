"""Shared fixtures."""

import pytest

from src.actuators.stage1 import build_catalog
from src.models.robot import RobotModel
from src.utils.config import RunConfig


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run slow co-design acceptance tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def default_config() -> RunConfig:
    return RunConfig()


@pytest.fixture(scope="session")
def codesign_config() -> RunConfig:
    """Defaults with the ratio sweep trimmed to the co-design gear range."""
    return RunConfig.model_validate({"ratio_grid": {"lo": 4.0, "hi": 8.8, "step": 0.1}, "jobs": 1})


@pytest.fixture(scope="session")
def catalog(codesign_config):
    config = codesign_config
    return build_catalog(config.motor, config.gearbox_bounds, config.ratio_grid,
                         config.materials, config.actuator_geometry, jobs=1)


@pytest.fixture
def leg_model() -> RobotModel:
    """Nominal-sized leg with hand-picked masses."""
    return RobotModel.assemble(
        l1=0.4,
        l2=0.4,
        m_l1=0.4184,
        m_l2=0.4184,
        hip_actuator_mass=0.75,
        knee_actuator_mass=0.75,
        hip_peak_torque=15.0,
        knee_peak_torque=15.0,
        base_mass=1.5,
    )
