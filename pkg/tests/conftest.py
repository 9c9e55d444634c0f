import numpy as np
import pytest

from exchange_cutoff.laws import BetaSymmetric, DiscreteSymmetric, PointHalf, TwoPoint

FOUR_ATOM = DiscreteSymmetric(((0.1, 0.2), (0.9, 0.2), (0.35, 0.3), (0.65, 0.3)))

LAWS = {
    "point-half": PointHalf(),
    "beta-0.5": BetaSymmetric(0.5),
    "beta-1": BetaSymmetric(1.0),
    "beta-2": BetaSymmetric(2.0),
    "two-point": TwoPoint(0.25),
    "four-atom": FOUR_ATOM,
}


@pytest.fixture(params=sorted(LAWS))
def any_law(request):
    return LAWS[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
