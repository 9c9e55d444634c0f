"""Redistribution laws for the exchange fraction X.

The menu is closed: the point mass at 1/2, symmetric Beta(alpha, alpha), the
symmetric two-point law on {a, 1-a}, and arbitrary finite symmetric discrete
laws. Every law can draw X and its size-biased version X-hat (density 2x
with respect to the law of X) exactly.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AsymmetricLaw, DegenerateLaw, InvalidParameter
from .rng import as_generator
from .special import digamma, trigamma

ATOM_TOL = 1e-12


class RedistributionLaw:
    """Common interface; concrete laws are frozen dataclasses below."""

    def validate(self):
        return self

    def sample(self, rng, size=None):
        raise NotImplementedError

    def sample_size_biased(self, rng, size=None):
        raise NotImplementedError

    @property
    def ex2(self):
        """E[X^2]."""
        raise NotImplementedError

    def atoms(self):
        """(values, weights) for discrete laws, None for continuous ones."""
        return None

    def spec(self):
        raise NotImplementedError

    def __str__(self):
        return self.spec()


@dataclass(frozen=True)
class PointHalf(RedistributionLaw):
    def sample(self, rng, size=None):
        if size is None:
            return 0.5
        return np.full(size, 0.5)

    sample_size_biased = sample

    @property
    def ex2(self):
        return 0.25

    def atoms(self):
        return np.array([0.5]), np.array([1.0])

    def spec(self):
        return "point-half"


@dataclass(frozen=True)
class BetaSymmetric(RedistributionLaw):
    alpha: float

    def validate(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise InvalidParameter(f"Beta parameter must be positive, got {self.alpha}")
        return self

    def sample(self, rng, size=None):
        if self.alpha == 1.0:
            return rng.random(size)
        return rng.beta(self.alpha, self.alpha, size)

    def sample_size_biased(self, rng, size=None):
        if self.alpha == 1.0:
            # Beta(2, 1) has CDF s^2
            return np.sqrt(rng.random(size))
        return rng.beta(self.alpha + 1.0, self.alpha, size)

    @property
    def ex2(self):
        a = self.alpha
        return (a + 1.0) / (2.0 * (2.0 * a + 1.0))

    def spec(self):
        return f"beta:{self.alpha!r}"


class _Discrete(RedistributionLaw):
    def atoms(self):
        raise NotImplementedError

    def validate(self):
        values, weights = self.atoms()
        if np.any(values < 0.0) or np.any(values > 1.0):
            raise InvalidParameter("atom values must lie in [0, 1]")
        if np.any(weights < 0.0):
            raise InvalidParameter("atom weights must be nonnegative")
        if abs(weights.sum() - 1.0) > ATOM_TOL:
            raise InvalidParameter(f"atom weights sum to {weights.sum()!r}, not 1")
        keep = weights > 0.0
        values, weights = values[keep], weights[keep]
        order = np.lexsort((weights, values))
        reflected = 1.0 - values
        rorder = np.lexsort((weights, reflected))
        if not (
            np.allclose(values[order], reflected[rorder], rtol=0, atol=ATOM_TOL)
            and np.allclose(weights[order], weights[rorder], rtol=0, atol=ATOM_TOL)
        ):
            raise AsymmetricLaw("law of X differs from law of 1 - X")
        interior = (values > 0.0) & (values < 1.0)
        if not np.any(interior):
            raise DegenerateLaw("all mass sits on {0, 1}: X is Bernoulli")
        return self

    def sample(self, rng, size=None):
        values, weights = self.atoms()
        return rng.choice(values, size=size, p=weights)

    def _size_biased_weights(self):
        values, weights = self.atoms()
        biased = 2.0 * values * weights
        return values, biased / biased.sum()

    def sample_size_biased(self, rng, size=None):
        values, biased = self._size_biased_weights()
        return rng.choice(values, size=size, p=biased)

    @property
    def ex2(self):
        values, weights = self.atoms()
        return float(np.dot(weights, values * values))


@dataclass(frozen=True)
class TwoPoint(_Discrete):
    a: float

    def validate(self):
        if not 0.0 < self.a < 1.0:
            raise InvalidParameter(f"two-point atom must lie in (0, 1), got {self.a}")
        return self

    def atoms(self):
        return np.array([self.a, 1.0 - self.a]), np.array([0.5, 0.5])

    def _pick(self, rng, size, p_low):
        out = np.where(rng.random(size) < p_low, self.a, 1.0 - self.a)
        return out if size is not None else float(out)

    def sample(self, rng, size=None):
        return self._pick(rng, size, 0.5)

    def sample_size_biased(self, rng, size=None):
        # P(X-hat = a) = a
        return self._pick(rng, size, self.a)

    def spec(self):
        return f"two-point:{self.a!r}"


@dataclass(frozen=True)
class DiscreteSymmetric(_Discrete):
    points: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(
            self, "points", tuple((float(x), float(w)) for x, w in self.points)
        )

    def validate(self):
        if not self.points:
            raise InvalidParameter("discrete law needs at least one atom")
        return super().validate()

    def atoms(self):
        arr = np.array(self.points, dtype=float).reshape(-1, 2)
        return arr[:, 0].copy(), arr[:, 1].copy()

    def spec(self):
        return "discrete:" + ";".join(f"{x!r},{w!r}" for x, w in self.points)


@dataclass(frozen=True)
class EntropicConstants:
    h: float
    s2: float
    r: float
    ex2: float
    method: str = "analytic"
    samples: int = 0
    h_stderr: float = 0.0
    s2_stderr: float = 0.0

    @property
    def s(self):
        return math.sqrt(self.s2)


def validate(law):
    """Return ``law`` if it is symmetric and non-degenerate, else raise."""
    if not isinstance(law, RedistributionLaw):
        raise InvalidParameter(f"not a redistribution law: {law!r}")
    return law.validate()


def sample(law, rng, size=None):
    return law.sample(as_generator(rng), size)


def sample_size_biased(law, rng, size=None):
    return law.sample_size_biased(as_generator(rng), size)


def _make(h, s2, ex2, **kw):
    s2 = max(s2, 0.0)
    r = math.sqrt(s2) / h
    return EntropicConstants(h=h, s2=s2, r=r, ex2=ex2, **kw)


def entropic_constants(law, mc_budget=None, rng=None):
    """Entropic constants (h, s^2, r) of ``law`` and its second moment.

    h = E[-log X-hat] = E[-2X log X] and s^2 = Var(log X-hat), r = s / h.
    Closed forms are used unless ``mc_budget`` is given, in which case h and
    s^2 are estimated from ``mc_budget`` size-biased draws.
    """
    validate(law)
    if mc_budget is not None:
        return _mc_constants(law, int(mc_budget), as_generator(rng))
    if isinstance(law, PointHalf):
        return EntropicConstants(h=math.log(2.0), s2=0.0, r=0.0, ex2=0.25)
    if isinstance(law, BetaSymmetric):
        a = law.alpha
        h = digamma(2 * a + 1) - digamma(a + 1)
        s2 = trigamma(a + 1) - trigamma(2 * a + 1)
        return _make(h, s2, law.ex2)
    values, biased = law._size_biased_weights()
    keep = biased > 0.0
    logs = np.log(values[keep])
    p = biased[keep]
    h = float(-np.dot(p, logs))
    s2 = float(np.dot(p, (logs + h) ** 2))
    return _make(h, s2, law.ex2)


def _mc_constants(law, samples, rng):
    if samples < 2:
        raise InvalidParameter("Monte Carlo budget must be at least 2 samples")
    logs = np.log(law.sample_size_biased(rng, samples))
    h = float(-logs.mean())
    dev2 = (logs + h) ** 2
    s2 = float(dev2.mean())
    h_se = float(logs.std(ddof=1) / math.sqrt(samples))
    s2_se = float(dev2.std(ddof=1) / math.sqrt(samples))
    return _make(
        h, s2, law.ex2, method="monte-carlo", samples=samples,
        h_stderr=h_se, s2_stderr=s2_se,
    )


def entropy_from_plain_samples(law, samples, rng):
    """Estimate h as the mean of -2X log X over plain draws of X.

    Returns (estimate, standard error). Atoms at zero contribute zero.
    """
    x = np.asarray(law.sample(as_generator(rng), int(samples)), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.where(x > 0.0, -2.0 * x * np.log(x), 0.0)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(len(vals)))


def parse_law(text):
    """Parse ``point-half``, ``beta:A``, ``two-point:A`` or ``discrete:x,w;...``."""
    text = text.strip()
    name, _, arg = text.partition(":")
    name = name.strip().lower()
    try:
        if name == "point-half" and not arg:
            law = PointHalf()
        elif name == "beta":
            law = BetaSymmetric(float(arg))
        elif name == "two-point":
            law = TwoPoint(float(arg))
        elif name == "discrete":
            pts = []
            for chunk in arg.split(";"):
                if not chunk.strip():
                    continue
                x, w = chunk.split(",")
                pts.append((float(x), float(w)))
            law = DiscreteSymmetric(tuple(pts))
        else:
            raise InvalidParameter(f"unknown law '{text}'")
    except ValueError as exc:
        if isinstance(exc, InvalidParameter):
            raise
        raise InvalidParameter(f"cannot parse law '{text}': {exc}") from exc
    return validate(law)
