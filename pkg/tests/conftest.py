import os

import hypothesis
import numpy as np
import pytest
from hypothesis import strategies as st

from unirel.families import random_relation

hypothesis.settings.register_profile("default", max_examples=25, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=200, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

seeds = st.integers(min_value=0, max_value=2**32 - 1)
small_dims = st.tuples(st.integers(1, 3), st.integers(1, 3))


@st.composite
def relations(draw, dims=small_dims):
    n, m = draw(dims)
    return random_relation(n, m, np.random.default_rng(draw(seeds)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[k])
