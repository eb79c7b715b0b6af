import os

import pytest
from hypothesis import settings

from analysis.exponents import ProblemParams
from analysis.specfun import get_gensine

settings.register_profile("ci", max_examples=200, deadline=None)
settings.register_profile("dev", max_examples=30, deadline=None)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "dev"))


@pytest.fixture
def laplace3():
    """p = 2, N = 3 at the Hardy constant"""
    return ProblemParams(2.0, 3, mu=0.25)


@pytest.fixture(scope="session")
def sine2():
    return get_gensine(2.0)
