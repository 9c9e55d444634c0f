"""Stationary states and mean-square contraction identities.

Closed forms (contraction rates, one-step mean-square displays, stationary
second moment) sit next to exact enumeration over every ordered pair and
every atom of X, so each display can be checked against brute force.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import dynamics
from .dynamics import Configuration, ModelKind
from .errors import DegenerateLaw, UnsupportedSize
from .laws import BetaSymmetric, validate
from .replicas import map_replicas
from .rng import as_generator

ENUM_MAX_N = 64


@dataclass(frozen=True)
class ContractionRates:
    n: int
    ex2: float
    lambda_srm: float
    lambda_gam: float
    lambda_sem: float

    def of(self, model):
        model = ModelKind.parse(model)
        return {
            ModelKind.SRM: self.lambda_srm,
            ModelKind.GAM: self.lambda_gam,
            ModelKind.SEM: self.lambda_sem,
        }[model]


@dataclass(frozen=True)
class StationarySample:
    config: Configuration
    approximate: bool
    burn: int = 0


def _ex2(law):
    validate(law)
    e = law.ex2
    if not e < 0.5:
        raise DegenerateLaw("E[X^2] = 1/2: X is Bernoulli")
    return e


def rates(n, law):
    """Mean-square contraction rates of the three models."""
    if n < 2:
        raise UnsupportedSize("n must be at least 2")
    e = _ex2(law)
    lam_srm = (2.0 / n) * (1.0 - 2.0 * e * (n - 2) / (n - 1))
    lam_gam = (2.0 / (n - 1)) * (1.0 - 2.0 * e)
    lam_sem = lam_gam * (1.0 + (4.0 * e - 1.0) / (n * (1.0 - 2.0 * e)))
    return ContractionRates(n=int(n), ex2=e, lambda_srm=lam_srm,
                            lambda_gam=lam_gam, lambda_sem=lam_sem)


# --- closed-form one-step displays ------------------------------------------

def one_step_l2_formula(v, law, kind):
    """Closed form of E||v M||_2^2 for one random update matrix M."""
    v = np.asarray(v, dtype=float)
    n = len(v)
    kind = ModelKind.parse(kind)
    rt = rates(n, law)
    norm2 = float(np.dot(v, v))
    mean = float(v.mean())
    if kind is ModelKind.SRM:
        return (1.0 - rt.lambda_srm) * norm2 + (4.0 * rt.ex2 * n / (n - 1)) * mean * mean
    # SEM uses the transpose of the SRM block, which has the GAM second moment
    return (1.0 - rt.lambda_gam) * norm2 + n * rt.lambda_gam * mean * mean


def mean_square_recursion(v, law):
    """(E<xi'>^2, E||xi' - <xi'>||^2) after one SEM update, from the displays."""
    v = np.asarray(v, dtype=float)
    n = len(v)
    rt = rates(n, law)
    c = 2.0 * (4.0 * rt.ex2 - 1.0)
    mean = float(v.mean())
    norm2 = float(np.dot(v, v))
    next_mean_sq = (1.0 - c / (n * (n - 1))) * mean * mean + c / (n * n * (n - 1)) * norm2
    centered = float(np.dot(v - mean, v - mean))
    return next_mean_sq, (1.0 - rt.lambda_sem) * centered


# --- exact enumeration -------------------------------------------------------

def _pairs(n):
    xs, ys = np.nonzero(~np.eye(n, dtype=bool))
    return xs, ys


def _updated_pair(a, b, X, kind):
    if kind is ModelKind.SRM:
        s = a + b
        return X * s, (1.0 - X) * s
    if kind is ModelKind.SEM:
        v = X * a + (1.0 - X) * b
        return v, v
    return X * a + (1.0 - X) * b, (1.0 - X) * a + X * b


def _expect_over_law(f, law):
    """E[f(X)] for f quadratic in X: exact atom sum for discrete laws,
    quadratic interpolation against E[X], E[X^2] otherwise."""
    atoms = law.atoms()
    if atoms is not None:
        values, weights = atoms
        return sum(w * f(x) for x, w in zip(values, weights) if w > 0)
    f0, fh, f1 = f(0.0), f(0.5), f(1.0)
    c2 = 2.0 * (f1 + f0 - 2.0 * fh)
    c1 = f1 - f0 - c2
    return f0 + c1 * 0.5 + c2 * law.ex2


def _check_enum(v):
    v = np.asarray(v, dtype=float)
    if len(v) > ENUM_MAX_N:
        raise UnsupportedSize(f"enumeration limited to n <= {ENUM_MAX_N}")
    if len(v) < 2:
        raise UnsupportedSize("n must be at least 2")
    return v


def one_step_l2(v, law, kind):
    """E||v M||_2^2 by enumerating all n(n-1) ordered pairs and the law of X."""
    v = _check_enum(v)
    validate(law)
    kind = ModelKind.parse(kind)
    xs, ys = _pairs(len(v))
    a, b = v[xs], v[ys]
    base = float(np.dot(v, v)) - a * a - b * b

    def f(X):
        na, nb = _updated_pair(a, b, X, kind)
        return float(np.mean(base + na * na + nb * nb))

    return float(_expect_over_law(f, law))


def mean_square_enumerated(v, law):
    """(E<xi'>^2, E||xi' - <xi'>||^2) for one SEM update, by enumeration."""
    v = _check_enum(v)
    validate(law)
    n = len(v)
    xs, ys = _pairs(n)
    a, b = v[xs], v[ys]
    total = float(v.sum())
    norm2 = float(np.dot(v, v))

    def moments(X):
        na, nb = _updated_pair(a, b, X, ModelKind.SEM)
        mean = (total - a - b + na + nb) / n
        sq = norm2 - a * a - b * b + na * na + nb * nb
        return mean * mean, sq - n * mean * mean

    m2 = _expect_over_law(lambda X: float(np.mean(moments(X)[0])), law)
    cen = _expect_over_law(lambda X: float(np.mean(moments(X)[1])), law)
    return float(m2), float(cen)


# --- stationary state --------------------------------------------------------

def stationary_second_moment(n, law):
    """n E||eta_inf||_2^2 for the SRM: 4 E[X^2] / (lambda_SRM (n - 1))."""
    rt = rates(n, law)
    return 4.0 * rt.ex2 / (rt.lambda_srm * (n - 1))


def stationary_second_moment_limit(law):
    """Large-n limit 2 E[X^2] / (1 - 2 E[X^2])."""
    e = _ex2(law)
    return 2.0 * e / (1.0 - 2.0 * e)


def default_burn(n):
    return int(round(12 * n * math.log(n)))


def sample_stationary(model, n, law, rng, burn=None):
    """One draw from (an approximation of) the stationary state.

    Exact for GAM (flat), SRM with Beta(alpha, alpha) (Dirichlet(alpha)) and
    SEM with Beta(alpha, alpha) from a Dirac start (flat at a
    Beta(alpha, alpha(n-1)) height). Other cases run the chain for ``burn``
    steps (default 12 n log n) and are flagged approximate.
    """
    model = ModelKind.parse(model)
    _ex2(law)
    rng = as_generator(rng)
    if model is ModelKind.GAM:
        return StationarySample(dynamics.flat(n, model), approximate=False)
    if isinstance(law, BetaSymmetric):
        a = law.alpha
        if model is ModelKind.SRM:
            g = rng.gamma(a, 1.0, size=n)
            return StationarySample(Configuration(model, g / g.sum()), approximate=False)
        height = rng.beta(a, a * (n - 1))
        return StationarySample(dynamics.flat(n, model, height=height), approximate=False)
    burn = default_burn(n) if burn is None else int(burn)
    start = dynamics.flat(n, model) if model is ModelKind.SRM else dynamics.dirac(n, 0, model)
    cfg = dynamics.run(start, law, burn, rng)
    return StationarySample(cfg, approximate=True, burn=burn)


# --- Monte Carlo checks ---------------------------------------------------------

def contraction_closed_form(model, law, n, t):
    """Mean-square gap at time t from a Dirac start.

    SRM: E||eta_t - eta'_t||^2 for the chain pair (Dirac, flat) driven by the
    same events; GAM: E||omega_t - 1/n||^2; SEM: E||xi_t - <xi_t>||^2. All
    three equal (1 - lambda)^t (1 - 1/n).
    """
    lam = rates(n, law).of(model)
    return (1.0 - lam) ** t * (1.0 - 1.0 / n)


def contraction_samples(model, law, n, ts, replicas, seed=0, workers=1, offset=0):
    """Per-replica mean-square gaps (see ``contraction_closed_form``), shape (replicas, len(ts))."""
    model = ModelKind.parse(model)
    ts = [int(t) for t in ts]

    def one(rng, _):
        a = dynamics.dirac(n, 0, model)
        b = dynamics.flat(n, model)
        rec = np.empty(len(ts))
        now = 0
        for k, t in enumerate(ts):
            for block in dynamics.iter_event_blocks(n, law, rng, t - now):
                dynamics.apply_block(a, block)
                if model is ModelKind.SRM:
                    dynamics.apply_block(b, block)
            now = t
            if model is ModelKind.SEM:
                d = a.energy - a.energy.mean()
            else:
                d = a.energy - b.energy
            rec[k] = float(np.dot(d, d))
        return rec

    return np.array(map_replicas(one, seed, replicas, workers=workers, offset=offset))


def long_run_samples(model, law, n, burn, replicas, seed=0, workers=1, offset=0):
    """End states after ``burn`` steps, shape (replicas, n).

    SRM starts flat; SEM and GAM start from a Dirac mass at site 0.
    """
    model = ModelKind.parse(model)

    def one(rng, _):
        start = dynamics.flat(n, model) if model is ModelKind.SRM else dynamics.dirac(n, 0, model)
        return dynamics.run(start, law, burn, rng).energy

    return np.array(map_replicas(one, seed, replicas, workers=workers, offset=offset))


def duality_samples(law, n, ts, replicas, seed=0, x_eta=0, x_xi=1, workers=1):
    """Samples of both sides of the SRM/SEM duality <eta_0, xi_t> = <eta_t, xi_0> in law.

    eta_0 = delta_{x_eta} and xi_0 = delta_{x_xi}. Returns ``(srm, sem)``, each
    of shape (replicas, len(ts)): srm holds eta_t(x_xi) from SRM runs, sem holds
    xi_t(x_eta) from SEM runs. The two sides use disjoint replica streams.
    """
    ts = [int(t) for t in ts]

    def runner(model, start, probe):
        def one(rng, _):
            cfg = dynamics.dirac(n, start, model)
            rec = np.empty(len(ts))
            now = 0
            for k, t in enumerate(ts):
                for block in dynamics.iter_event_blocks(n, law, rng, t - now):
                    dynamics.apply_block(cfg, block)
                now = t
                rec[k] = cfg.energy[probe]
            return rec
        return one

    srm = map_replicas(runner(ModelKind.SRM, x_eta, x_xi), seed, replicas, workers=workers)
    sem = map_replicas(runner(ModelKind.SEM, x_xi, x_eta), seed, replicas, workers=workers,
                       offset=replicas)
    return np.array(srm), np.array(sem)
