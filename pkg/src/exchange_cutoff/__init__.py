"""Monte Carlo laboratory for mean-field stochastic exchange models."""

from .dynamics import Configuration, ExchangeEvent, ModelKind
from .laws import (
    BetaSymmetric,
    DiscreteSymmetric,
    EntropicConstants,
    PointHalf,
    TwoPoint,
    entropic_constants,
    parse_law,
)
from .oracle import clt_profile, schedule, theorem_profile
from .replicas import Statistic
from .rng import seed_stream

__version__ = "0.1.0"

__all__ = [
    "BetaSymmetric",
    "Configuration",
    "DiscreteSymmetric",
    "EntropicConstants",
    "ExchangeEvent",
    "ModelKind",
    "PointHalf",
    "Statistic",
    "TwoPoint",
    "clt_profile",
    "entropic_constants",
    "parse_law",
    "schedule",
    "seed_stream",
    "theorem_profile",
]
