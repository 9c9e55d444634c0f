"""Closed-form and Monte Carlo right-hand sides.

* ``threshold_probability``: P(sum_{i<=T} log X-hat_i >= log theta) with
  T ~ Bin(t, 2/n), the exact expected mass of piles above theta.
* ``clt_profile`` / ``theorem_profile``: the Gaussian limit profiles.
* ``schedule``: cutoff location t_ent and window t_w.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DegenerateLaw, InvalidParameter
from .laws import EntropicConstants, entropic_constants, validate
from .piles import LOG_TOL
from .rng import as_generator
from .special import normal_cdf

DEFAULT_SAMPLES = 10**6
_BATCH = 1 << 17


@dataclass(frozen=True)
class CutoffSchedule:
    n: int
    constants: EntropicConstants
    t_ent: float
    t_w: float

    def time(self, beta):
        """Step count nearest to t_ent + beta * t_w, clamped at zero."""
        return round_time(self.t_ent + beta * self.t_w)


@dataclass(frozen=True)
class OracleSpec:
    t: int
    n: int
    theta: float
    law: object
    samples: int = DEFAULT_SAMPLES

    def __post_init__(self):
        if self.n < 2:
            raise InvalidParameter("n must be at least 2")
        if self.samples < 1:
            raise InvalidParameter("samples must be at least 1")
        if self.t < 0:
            raise InvalidParameter("t must be nonnegative")
        if not self.theta >= 0:
            raise InvalidParameter("theta must be nonnegative")


def round_time(t):
    return max(0, int(math.floor(t + 0.5)))


def _constants(arg):
    return arg if isinstance(arg, EntropicConstants) else entropic_constants(arg)


def schedule(n, constants):
    """Cutoff location n log n / (2h) and window (1 + r)(n/2) sqrt(log n / h)."""
    c = _constants(constants)
    if n < 2:
        raise InvalidParameter("n must be at least 2")
    if not c.h > 0:
        raise DegenerateLaw("entropic constant h must be positive")
    log_n = math.log(n)
    t_ent = n * log_n / (2.0 * c.h)
    t_w = (1.0 + c.r) * (n / 2.0) * math.sqrt(log_n / c.h)
    return CutoffSchedule(n=int(n), constants=c, t_ent=t_ent, t_w=t_w)


def clt_profile(beta, gamma, constants):
    """Phi(-(beta (1 + r) + gamma) / sqrt(1 + r^2))."""
    c = _constants(constants)
    if not c.h > 0:
        raise DegenerateLaw("entropic constant h must be positive")
    r = c.r
    return normal_cdf(-(beta * (1.0 + r) + gamma) / math.sqrt(1.0 + r * r))


def theorem_profile(beta, constants):
    """Limit of the worst-case distance at t_ent + beta t_w: 2 Phi(-beta(1+r)/sqrt(1+r^2))."""
    return 2.0 * clt_profile(beta, 0.0, constants)


def _log_sums(t, n, law, samples, rng):
    """Yield batches of sum_{i<=T} log X-hat_i, one per sample."""
    p = 2.0 / n
    done = 0
    while done < samples:
        k = min(_BATCH, samples - done)
        T = rng.binomial(t, p, size=k) if t > 0 else np.zeros(k, dtype=np.int64)
        total = int(T.sum())
        sums = np.zeros(k)
        if total:
            with np.errstate(divide="ignore"):
                logs = np.log(np.asarray(law.sample_size_biased(rng, total), dtype=float))
            owner = np.repeat(np.arange(k), T)
            sums = np.bincount(owner, weights=logs, minlength=k)
        yield sums
        done += k


def threshold_probability_grid(t, n, thetas, law, samples=DEFAULT_SAMPLES, rng=None):
    """Monte Carlo P(sum log X-hat >= log theta) for several thresholds at once.

    One sample set is shared across ``thetas``. Returns (estimates, stderrs)
    as arrays; theta = 0 entries are exactly 1 with zero error.
    """
    validate(law)
    rng = as_generator(rng)
    thetas = np.asarray(thetas, dtype=float)
    if np.any(thetas < 0):
        raise InvalidParameter("thresholds must be nonnegative")
    with np.errstate(divide="ignore"):
        cut = np.log(thetas) - LOG_TOL
    hits = np.zeros(len(thetas))
    for sums in _log_sums(int(t), int(n), law, int(samples), rng):
        hits += (sums[:, None] >= cut[None, :]).sum(axis=0)
    est = hits / samples
    se = np.sqrt(est * (1.0 - est) / samples)
    zero = thetas == 0.0
    est[zero] = 1.0
    se[zero] = 0.0
    return est, se


def threshold_probability(spec, rng=None):
    """Monte Carlo estimate and binomial standard error for one threshold."""
    if spec.theta == 0.0:
        return 1.0, 0.0
    est, se = threshold_probability_grid(
        spec.t, spec.n, [spec.theta], spec.law, spec.samples, rng
    )
    return float(est[0]), float(se[0])


def threshold_probability_exact(t, n, theta, law, max_terms=40):
    """Exact sum over T <= max_terms for discrete laws.

    Returns (value, truncation) where ``truncation = P(T > max_terms)``
    bounds the neglected tail.
    """
    validate(law)
    atoms = law.atoms()
    if atoms is None:
        raise InvalidParameter("exact path needs a discrete law")
    values, weights = atoms
    biased = 2.0 * values * weights
    keep = biased > 0
    logs = np.log(values[keep])
    probs = biased[keep] / biased[keep].sum()
    if theta == 0.0:
        return 1.0, 0.0
    cut = math.log(theta) - LOG_TOL
    binom = stats.binom(int(t), 2.0 / n)
    s_max = min(int(t), int(max_terms))
    # distribution of the sum over atom-count vectors, kept as {counts: prob}
    dist = {tuple([0] * len(logs)): 1.0}
    total = 0.0
    for s in range(s_max + 1):
        if s > 0:
            nxt = {}
            for counts, pr in dist.items():
                for j, pj in enumerate(probs):
                    c = list(counts)
                    c[j] += 1
                    key = tuple(c)
                    nxt[key] = nxt.get(key, 0.0) + pr * pj
            dist = nxt
        ps = float(binom.pmf(s))
        if ps == 0.0:
            continue
        tail = math.fsum(
            pr for counts, pr in dist.items() if float(np.dot(counts, logs)) >= cut
        )
        total += ps * tail
    truncation = float(binom.sf(s_max))
    return total, truncation


def expected_pile_counts(t, n, s_values):
    """E|A_{s,t}| = 2^s P(T = s), T ~ Bin(t, 2/n)."""
    binom = stats.binom(int(t), 2.0 / n)
    return {int(s): float(2.0**s * binom.pmf(s)) for s in s_values}


def expected_total_piles(t, n):
    """(1 + 2/n)^t, the mean total pile count."""
    return (1.0 + 2.0 / n) ** t
