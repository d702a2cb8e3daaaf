import numpy as np
import pytest

import lfsweep as lf
from lfsweep import _kernels


@pytest.fixture(scope="session", autouse=True)
def _compiled_kernels():
    # force numba compilation once so per-test timings stay meaningful
    _kernels.warmup()


@pytest.fixture()
def cfg():
    """The standard desk-scale test display (d_focal 2, 60 deg fov, 35 deg cone)."""
    return lf.DisplayConfig()


@pytest.fixture()
def base_pose():
    return lf.CameraPose.identity()


@pytest.fixture(scope="session")
def ramp_scene():
    return lf.generate_synthetic("depth-ramp")


@pytest.fixture(scope="session")
def single_scene():
    return lf.generate_synthetic("single")


def rand_rotation(rng) -> np.ndarray:
    """Uniform random rotation matrix (QR-based, determinant fixed to +1)."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 2] = -q[:, 2]
    return q
