import numpy as np
import pytest

from cubli.model import build_model


@pytest.fixture(scope="session")
def model():
    return build_model()


@pytest.fixture()
def rng():
    return np.random.default_rng(20260823)


def random_unit_quats(rng, n):
    """n x 4 array of uniformly random unit quaternions."""
    q = rng.normal(size=(n, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)
