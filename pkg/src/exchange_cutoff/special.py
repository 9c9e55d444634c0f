"""Digamma, trigamma and the standard normal CDF.

Digamma and trigamma use upward recurrence until the argument exceeds 6,
then a six-term asymptotic (Bernoulli) series. The first omitted series
term at x = 6 is about 3e-12, so absolute error stays well below 1e-10.
"""

import math

_SHIFT = 6.0

# B_{2k} / (2k) for k = 1..6
_DIGAMMA_COEFFS = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
)

# B_{2k} for k = 1..6
_TRIGAMMA_COEFFS = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
)


def digamma(x):
    """Logarithmic derivative of the Gamma function, for x > 0."""
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"digamma requires a positive argument, got {x}")
    acc = 0.0
    while x < _SHIFT:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    power = inv2
    for c in _DIGAMMA_COEFFS:
        series += c * power
        power *= inv2
    return acc + math.log(x) - 0.5 / x - series


def trigamma(x):
    """Derivative of digamma, for x > 0."""
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"trigamma requires a positive argument, got {x}")
    acc = 0.0
    while x < _SHIFT:
        acc += 1.0 / (x * x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    series = 0.0
    power = inv2 * inv  # x^{-3}
    for b in _TRIGAMMA_COEFFS:
        series += b * power
        power *= inv2
    return acc + inv + 0.5 * inv2 + series


def normal_cdf(a):
    """Standard normal CDF via the complementary error function."""
    return 0.5 * math.erfc(-a / math.sqrt(2.0))
