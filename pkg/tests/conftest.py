import numpy as np
import pytest
from hypothesis import strategies as st

from envassist.channel import ProbeConfig
from envassist.gate_family import CanonicalParams

HALF_PI = np.pi / 2

unit = st.floats(0.0, 1.0)
phase = st.floats(0.0, 2 * np.pi)
angle = st.floats(0.0, HALF_PI)
edge_ids = st.sampled_from(["E1", "E2", "E3", "E4", "E5", "E6"])


@st.composite
def canonical_params(draw):
    a = sorted((draw(angle) for _ in range(3)), reverse=True)
    return CanonicalParams(*a)


@st.composite
def probe_configs(draw):
    return ProbeConfig(draw(unit), draw(unit), draw(phase), draw(phase))


def random_params(rng):
    return CanonicalParams(*np.sort(rng.uniform(0, HALF_PI, 3))[::-1])


def random_probe(rng):
    return ProbeConfig(*rng.uniform(0, 1, 2), *rng.uniform(0, 2 * np.pi, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(20241019)
