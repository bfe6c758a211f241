import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from dentlab.seqspace import make_vec

settings.register_profile("dentlab", deadline=None, max_examples=150, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("dentlab")

coord = st.floats(-3, 3, allow_nan=False, allow_infinity=False)


def heads(max_len=10, min_len=0):
    return st.lists(coord, min_size=min_len, max_size=max_len)


@st.composite
def c0_vecs(draw, max_len=10):
    return make_vec(draw(heads(max_len)))


@st.composite
def c_vecs(draw, max_len=8):
    return make_vec(draw(heads(max_len)), draw(coord))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
