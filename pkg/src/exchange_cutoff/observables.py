"""Distance and pile statistics estimated from simulated replicas."""

import enum
import math

import numpy as np

from . import dynamics, equilibrium
from .dynamics import ModelKind, iter_event_blocks
from .errors import BudgetExceeded, DimensionMismatch, InvalidParameter
from .piles import DEFAULT_FLOOR_LOG, LOG_TOL, PileSet, ThresholdSpec, threshold_mass
from .replicas import Statistic, map_replicas

DEFAULT_MAX_EVENTS = 2 * 10**10
_FLOOR_MARGIN = 1000 * LOG_TOL


class Metric(enum.Enum):
    PLAIN = "plain"
    SORTED = "sorted"


def _energy(cfg):
    return cfg.energy if isinstance(cfg, dynamics.Configuration) else np.asarray(cfg, dtype=float)


def l1_to_flat(cfg):
    """sum_x |eta(x) - 1/n|."""
    e = _energy(cfg)
    return math.fsum(np.abs(e - 1.0 / len(e)))


def sorted_l1(a, b):
    """min over permutations of ||a - b o sigma||_1, i.e. the L1 gap of the sorted vectors."""
    a, b = _energy(a), _energy(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"sizes differ: {a.shape} vs {b.shape}")
    return math.fsum(np.abs(np.sort(a) - np.sort(b)))


def plain_l1(a, b):
    a, b = _energy(a), _energy(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"sizes differ: {a.shape} vs {b.shape}")
    return math.fsum(np.abs(a - b))


def default_horizon(model, law, n):
    """round(16 / lambda) for the model's mean-square rate."""
    lam = equilibrium.rates(n, law).of(model)
    return int(round(16.0 / lam))


def _check_budget(replicas, steps, max_events):
    work = int(replicas) * int(steps)
    if work > max_events:
        raise BudgetExceeded(
            f"{replicas} replicas x {steps} steps = {work} events exceeds the budget of {max_events}"
        )


def _run_to(cfg, law, steps, rng):
    for block in iter_event_blocks(cfg.n, law, rng, steps):
        dynamics.apply_block(cfg, block)


def _drawn_events(n, law, rng, steps):
    """All events of one replica in stream order, as one block."""
    blocks = list(iter_event_blocks(n, law, rng, steps))
    if not blocks:
        empty = np.zeros(0, dtype=np.int64)
        return dynamics.EventBlock(empty, empty.copy(), np.zeros(0))
    return dynamics.EventBlock(
        np.concatenate([b.xs for b in blocks]),
        np.concatenate([b.ys for b in blocks]),
        np.concatenate([b.xvals for b in blocks]),
    )


def _reversed(block):
    return dynamics.EventBlock(
        np.ascontiguousarray(block.xs[::-1]),
        np.ascontiguousarray(block.ys[::-1]),
        np.ascontiguousarray(block.xvals[::-1]),
    )


def coupling_samples(model, law, n, ts, replicas, seed=0, horizon=None,
                     max_events=DEFAULT_MAX_EVENTS, workers=1, offset=0):
    """Per-replica distances ||eta_t - eta_inf||_1 under the canonical coupling.

    Each replica starts from a Dirac mass at site 0 and draws the events
    R_1, ..., R_T with T = max(ts) + horizon.

    * GAM: eta_inf is exactly flat; no horizon is needed.
    * SEM: the forward product converges, so the chain is continued to T and
      its end state, flattened to its average, stands in for eta_inf; the
      flattening error is recorded.
    * SRM: the forward chain keeps fluctuating around a random stationary
      state, so the coupling is realized by backward products: delta R_t...R_1
      has the law of eta_t and delta R_s...R_1 converges a.s. to eta_inf. Both
      are computed by applying the drawn events in reverse order.

    Returns ``(plain, sorted, flat_err, horizon)``; the first two have shape
    (replicas, len(ts)).
    """
    model = ModelKind.parse(model)
    ts = [int(t) for t in ts]
    if any(b < a for a, b in zip(ts, ts[1:])):
        raise InvalidParameter("times must be sorted ascending")
    if any(t < 0 for t in ts):
        raise InvalidParameter("times must be nonnegative")
    if horizon is None:
        horizon = 0 if model is ModelKind.GAM else default_horizon(model, law, n)
    end = (ts[-1] if ts else 0) + (0 if model is ModelKind.GAM else int(horizon))
    work = end + (sum(ts) if model is ModelKind.SRM else 0)
    _check_budget(replicas, work, max_events)

    def forward(rng):
        cfg = dynamics.dirac(n, 0, model)
        snaps = np.empty((len(ts), n))
        now = 0
        for k, t in enumerate(ts):
            _run_to(cfg, law, t - now, rng)
            now = t
            snaps[k] = cfg.energy
        if model is ModelKind.GAM:
            return snaps, np.full(n, 1.0 / n), 0.0
        _run_to(cfg, law, end - now, rng)
        avg = dynamics.average(cfg)
        err = math.fsum(np.abs(cfg.energy - avg))
        return snaps, np.full(n, avg), err

    def backward(rng):
        rev = _reversed(_drawn_events(n, law, rng, end))
        limit = dynamics.apply_block(dynamics.dirac(n, 0, model), rev).energy
        snaps = np.empty((len(ts), n))
        for k, t in enumerate(ts):
            # events t-1, ..., 0 sit at the tail of the reversed block
            snaps[k] = dynamics.apply_block(dynamics.dirac(n, 0, model), rev.slice(end - t, end)).energy
        return snaps, limit, 0.0

    def one(rng, _):
        snaps, limit, err = backward(rng) if model is ModelKind.SRM else forward(rng)
        plain = np.array([plain_l1(s, limit) for s in snaps])
        srt = np.array([sorted_l1(s, limit) for s in snaps])
        return plain, srt, err

    out = map_replicas(one, seed, replicas, workers=workers, offset=offset)
    plain = np.array([o[0] for o in out]).reshape(replicas, len(ts))
    srt = np.array([o[1] for o in out]).reshape(replicas, len(ts))
    errs = np.array([o[2] for o in out])
    return plain, srt, errs, int(horizon)


def coupling_bias_bound(model, law, n, horizon, flat_errors=None):
    """Bound on the estimator's bias from using a finite horizon.

    SRM: the backward product after T >= horizon steps differs from its limit
    by (delta - eta') R_T...R_1 with eta' stationary and independent, whose
    mean-square norm is at most 2 (1 - lambda)^horizon; the L1 bound follows
    from ||v||_1 <= sqrt(n) ||v||_2. SEM: measured mean flattening error.
    GAM: zero.
    """
    model = ModelKind.parse(model)
    if model is ModelKind.GAM:
        return 0.0
    if model is ModelKind.SEM:
        return float(np.mean(flat_errors)) if flat_errors is not None and len(flat_errors) else 0.0
    lam = equilibrium.rates(n, law).lambda_srm
    return math.sqrt(2.0 * n * (1.0 - lam) ** horizon)


def canonical_coupling_distance(model, law, n, t, horizon=None, replicas=100, seed=0,
                                metric=Metric.PLAIN, max_events=DEFAULT_MAX_EVENTS, workers=1):
    """Mean +- SE of ||eta_t - eta_inf||_1 (or its sorted version) under the
    canonical coupling from a Dirac start."""
    metric = Metric(metric)
    plain, srt, errs, h = coupling_samples(model, law, n, [t], replicas, seed, horizon,
                                           max_events, workers)
    values = plain[:, 0] if metric is Metric.PLAIN else srt[:, 0]
    bias = coupling_bias_bound(model, law, n, h, errs)
    return Statistic.from_samples(f"coupling_{metric.value}", values, bias_bound=bias)


def monotonicity_curve(model, law, n, ts, replicas, seed=0, metric=Metric.PLAIN,
                       horizon=None, max_events=DEFAULT_MAX_EVENTS, workers=1):
    """Coupling distance on a time grid, with snapshots along shared trajectories."""
    metric = Metric(metric)
    plain, srt, errs, h = coupling_samples(model, law, n, ts, replicas, seed, horizon,
                                           max_events, workers)
    values = plain if metric is Metric.PLAIN else srt
    bias = coupling_bias_bound(model, law, n, h, errs)
    return [Statistic.from_samples(f"coupling_{metric.value}", values[:, k], bias_bound=bias)
            for k in range(len(ts))]


def is_monotone(curve, allowance=4.0):
    """Adjacent values never rise by more than ``allowance`` summed standard errors."""
    return all(
        b.value <= a.value + allowance * (a.stderr + b.stderr)
        for a, b in zip(curve, curve[1:])
    )


def large_pile_mass(ps, spec):
    """Mass in piles of size at least e^psi / n."""
    return threshold_mass(ps, spec.theta)


def pile_threshold_samples(model, law, n, ts, thetas, replicas, seed=0, floor_log=None,
                           max_events=DEFAULT_MAX_EVENTS, workers=1, offset=0):
    """Per-replica threshold masses, shape (replicas, len(ts), len(thetas)).

    ``floor_log`` defaults to just below log(min positive theta): piles below
    it can never grow back above any requested threshold, so discarding them
    leaves every statistic unchanged while bounding memory. The margin keeps
    piles that the tolerant threshold comparison would still count.
    """
    ts = [int(t) for t in ts]
    thetas = [float(th) for th in thetas]
    positive = [th for th in thetas if th > 0]
    if floor_log is None:
        floor_log = min(math.log(min(positive)), 0.0) - _FLOOR_MARGIN if positive else DEFAULT_FLOOR_LOG
    _check_budget(replicas, ts[-1] if ts else 0, max_events)

    def one(rng, _):
        ps = PileSet(model, n, 0, floor_log=floor_log)
        out = np.empty((len(ts), len(thetas)))
        now = 0
        for k, t in enumerate(ts):
            for block in iter_event_blocks(n, law, rng, t - now):
                ps.apply_block(block)
            now = t
            out[k] = [threshold_mass(ps, th) for th in thetas]
        return out

    return np.array(map_replicas(one, seed, replicas, workers=workers, offset=offset))


def large_pile_curve(model, law, n, ts, spec, replicas, seed=0, workers=1):
    """Mean large-pile mass at each time in ``ts`` for one threshold spec."""
    vals = pile_threshold_samples(model, law, n, ts, [spec.theta], replicas, seed,
                                  workers=workers)
    return [Statistic.from_samples("large_pile_mass", vals[:, k, 0]) for k in range(len(ts))]


def lower_bound_diagnostic(mass, spec, model, law, n):
    """2 E||eta^+||_1 - 2 sqrt(n e^{-psi} E||eta_inf||_2^2).

    The correction uses n E||eta_inf||^2, which is 1 for GAM and the SRM
    closed form for SRM and SEM.
    """
    model = ModelKind.parse(model)
    value = mass.value if isinstance(mass, Statistic) else float(mass)
    m2 = 1.0 if model is ModelKind.GAM else equilibrium.stationary_second_moment(n, law)
    return 2.0 * value - 2.0 * math.sqrt(math.exp(-spec.psi) * m2)


__all__ = [
    "Metric", "ThresholdSpec", "Statistic", "l1_to_flat", "sorted_l1", "plain_l1",
    "canonical_coupling_distance", "monotonicity_curve", "large_pile_mass",
    "pile_threshold_samples", "large_pile_curve", "lower_bound_diagnostic",
    "coupling_samples", "coupling_bias_bound", "default_horizon", "is_monotone",
]
