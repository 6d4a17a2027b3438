import numpy as np
import pytest

from twistguide.geometry import (WaveguideScenario, WindowSpec, build_cross_section,
                                 make_twist_profile)
from twistguide.transverse import assemble_transverse, solve_transverse_modes


@pytest.fixture(scope="session")
def rect():
    return build_cross_section("rectangle", (1.0, 0.5), 16)


@pytest.fixture(scope="session")
def rect_tm(rect):
    return assemble_transverse(rect)


@pytest.fixture(scope="session")
def rect_modes(rect_tm):
    return solve_transverse_modes(rect_tm, k=3)


@pytest.fixture
def straight(rect):
    """Untwisted guide with a unit window at the origin."""
    return WaveguideScenario(rect, make_twist_profile(0.0, 0.0, 0.0), WindowSpec(0.0, 1.0), S=2.0)


@pytest.fixture
def twisted(rect):
    """Twist on (-1, 1), window to its right."""
    return WaveguideScenario(rect, make_twist_profile(1.0, -1.0, 1.0), WindowSpec(1.5, 0.5),
                             S=4.0)


def random_vectors(n, count, seed=0):
    return np.random.default_rng(seed).standard_normal((count, n))
