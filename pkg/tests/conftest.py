from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

FIXTURES = Path(__file__).parent / "fixtures"

coord = st.floats(-10, 10, allow_nan=False, allow_infinity=False, width=64)


def point_arrays(min_len=1, max_len=6, dim=2):
    return st.integers(min_len, max_len).flatmap(lambda m: arrays(np.float64, (m, dim), elements=coord))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
