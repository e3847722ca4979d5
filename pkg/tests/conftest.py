import numpy as np
import pytest

from quadassist.model import default_model


@pytest.fixture(scope="session")
def model():
    return default_model()


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


def sample_valid_config(rng, model, limit_margin=0.15):
    """Random configuration strictly inside joint limits."""
    from quadassist.kinematics import RobotConfiguration

    lo = model.limits[:, 0] + limit_margin
    hi = model.limits[:, 1] - limit_margin
    return RobotConfiguration(
        base_x=float(rng.uniform(-2.0, 2.0)),
        base_y=float(rng.uniform(-2.0, 2.0)),
        base_yaw=float(rng.uniform(-np.pi, np.pi)),
        arm_q=rng.uniform(lo, hi),
    )
