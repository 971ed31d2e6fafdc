import numpy as np
import pytest

from lspec import geomkit as gk, hadamard as hd
from lspec.specpowers import SchwartzProfile


@pytest.fixture(scope="session")
def sphere_metric():
    return gk.make_ultrastatic_sphere(1.0)


@pytest.fixture(scope="session")
def sphere_base():
    return np.array([0.0, np.pi / 2, np.pi / 2, 0.0])


@pytest.fixture(scope="session")
def sphere_chart(sphere_metric, sphere_base):
    return gk.normal_chart(sphere_metric, sphere_base)


@pytest.fixture(scope="session")
def sphere_seq(sphere_chart):
    return hd.hadamard_sequence(sphere_chart, 2)


@pytest.fixture(scope="session")
def bump_profile():
    return SchwartzProfile(1.5, 0.5)
