import numpy as np
import pytest

from steadybox.testing import demo_four_state, demo_three_state, demo_two_state


@pytest.fixture
def two_state():
    return demo_two_state()


@pytest.fixture
def four_state():
    return demo_four_state()


@pytest.fixture
def three_state():
    return demo_three_state()


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
