"""Command dispatch: each command turns a config into result rows."""

import math
import time
from dataclasses import dataclass

import numpy as np

from .. import dynamics, equilibrium, observables, oracle
from ..dynamics import ModelKind
from ..errors import BudgetExceeded
from ..laws import BetaSymmetric, entropic_constants
from ..piles import DEFAULT_FLOOR_LOG, PileSet, ThresholdSpec, counts_by_updates, threshold_mass
from ..replicas import Statistic, map_replicas
from ..rng import seed_stream

COLUMNS = (
    "command", "model", "law", "n", "t", "beta", "gamma", "statistic",
    "value", "stderr", "bias_bound", "samples", "seed", "wallclock_ms",
)

# replica indices at and above this offset are reserved for oracle streams
ORACLE_STREAM = 1 << 63
DEFAULT_THETA_GRID = tuple(np.exp(np.linspace(-8.0, 0.0, 6)))
COUNT_S_MAX = 10


@dataclass
class Row:
    command: str
    model: str
    law: str
    n: int
    statistic: str
    value: float
    t: int = None
    beta: float = None
    gamma: float = None
    stderr: float = None
    bias_bound: float = None
    samples: int = None
    seed: int = None
    wallclock_ms: float = None

    def as_tuple(self):
        return tuple(getattr(self, c) for c in COLUMNS)


@dataclass
class ExperimentResult:
    config: object
    rows: list

    def find(self, statistic, **where):
        """Rows with the given statistic name and matching column values."""
        return [
            r for r in self.rows
            if r.statistic == statistic and all(getattr(r, k) == v for k, v in where.items())
        ]


class _Emitter:
    def __init__(self, cfg):
        self.cfg = cfg
        self.rows = []
        self._t0 = time.perf_counter()

    def lap(self):
        now = time.perf_counter()
        ms = (now - self._t0) * 1000.0
        self._t0 = now
        return ms

    def add(self, statistic, value, *, stat=None, stderr=None, bias=None, samples=None,
            t=None, beta=None, gamma=None, ms=None):
        if stat is not None:
            value = stat.value
            stderr = stat.stderr if stderr is None else stderr
            bias = stat.bias_bound if bias is None else bias
            samples = stat.samples if samples is None else samples
        self.rows.append(Row(
            command=self.cfg.command, model=self.cfg.model, law=self.cfg.law,
            n=self.cfg.n, t=t, beta=beta, gamma=gamma, statistic=statistic,
            value=float(value), stderr=None if stderr is None else float(stderr),
            bias_bound=None if bias is None else float(bias), samples=samples,
            seed=self.cfg.seed, wallclock_ms=ms,
        ))

    def stamp(self, since):
        """Give rows added after index ``since`` the elapsed time of their block."""
        ms = self.lap()
        for r in self.rows[since:]:
            if r.wallclock_ms is None:
                r.wallclock_ms = ms


def _budget(cfg, steps):
    work = cfg.replicas * int(steps)
    if work > cfg.max_events:
        raise BudgetExceeded(
            f"{cfg.replicas} replicas x {steps} steps = {work} events exceeds the budget of {cfg.max_events}"
        )


# --- commands ------------------------------------------------------------------

def _constants(cfg, out):
    law, n = cfg.law_obj, cfg.n
    c = entropic_constants(law)
    rt = equilibrium.rates(n, law)
    sch = oracle.schedule(n, c)
    for name, value in (
        ("h", c.h), ("s2", c.s2), ("r", c.r), ("ex2", c.ex2),
        ("lambda_srm", rt.lambda_srm), ("lambda_gam", rt.lambda_gam),
        ("lambda_sem", rt.lambda_sem), ("t_ent", sch.t_ent), ("t_w", sch.t_w),
        ("stationary_second_moment", equilibrium.stationary_second_moment(n, law)),
        ("stationary_second_moment_limit", equilibrium.stationary_second_moment_limit(law)),
    ):
        out.add(name, value, stderr=0.0, samples=0)
    out.stamp(0)
    mark = len(out.rows)
    mc = entropic_constants(law, mc_budget=cfg.samples, rng=seed_stream(cfg.seed, ORACLE_STREAM))
    out.add("h_mc", mc.h, stderr=mc.h_stderr, samples=mc.samples)
    out.add("s2_mc", mc.s2, stderr=mc.s2_stderr, samples=mc.samples)
    out.stamp(mark)


def _simulate(cfg, out):
    law, n, model, ts = cfg.law_obj, cfg.n, cfg.model_kind, cfg.times
    _budget(cfg, ts[-1])

    def one(rng, _):
        cfg_ = dynamics.dirac(n, 0, model)
        rec = np.empty((len(ts), 4))
        now = 0
        for k, t in enumerate(ts):
            cfg_ = dynamics.run(cfg_, law, t - now, rng)
            now = t
            e = cfg_.energy
            rec[k] = (dynamics.total_mass(cfg_), e.max(), dynamics.average(cfg_),
                      observables.l1_to_flat(cfg_))
        return rec

    vals = np.array(map_replicas(one, cfg.seed, cfg.replicas, workers=cfg.workers))
    for k, t in enumerate(ts):
        for j, name in enumerate(("total_mass", "max_energy", "average", "l1_to_flat")):
            out.add(name, 0, stat=Statistic.from_samples(name, vals[:, k, j]), t=t)
    out.stamp(0)


def _piles(cfg, out):
    law, n, model, ts = cfg.law_obj, cfg.n, cfg.model_kind, cfg.times
    _budget(cfg, ts[-1])
    c = entropic_constants(law)
    thetas = list(cfg.thetas)
    gammas = [None] * len(thetas)
    if cfg.gamma is not None:
        thetas.append(ThresholdSpec.from_gamma(cfg.gamma, c.h, n).theta)
        gammas.append(cfg.gamma)
    floor = DEFAULT_FLOOR_LOG if cfg.floor_log is None else cfg.floor_log

    def one(rng, _):
        ps = PileSet(model, n, 0, floor_log=floor)
        counts = np.zeros((len(ts), COUNT_S_MAX + 1))
        total = np.zeros(len(ts))
        masses = np.zeros((len(ts), len(thetas)))
        residual = np.zeros(len(ts))
        now = 0
        for k, t in enumerate(ts):
            for block in dynamics.iter_event_blocks(n, law, rng, t - now):
                ps.apply_block(block)
            now = t
            hist = counts_by_updates(ps)
            counts[k] = [hist.get(s, 0) for s in range(COUNT_S_MAX + 1)]
            total[k] = ps.pile_count
            masses[k] = [threshold_mass(ps, th) for th in thetas]
            residual[k] = ps.residual_mass()
        return counts, total, masses, residual

    res = map_replicas(one, cfg.seed, cfg.replicas, workers=cfg.workers)
    counts = np.array([r[0] for r in res])
    total = np.array([r[1] for r in res])
    masses = np.array([r[2] for r in res])
    residual = np.array([r[3] for r in res])
    out.stamp(0)
    for k, t in enumerate(ts):
        mark = len(out.rows)
        expected = oracle.expected_pile_counts(t, n, range(COUNT_S_MAX + 1))
        for s in range(COUNT_S_MAX + 1):
            st = Statistic.from_samples(f"count_s{s}", counts[:, k, s])
            out.add(f"count_s{s}", 0, stat=st, t=t)
            out.add(f"count_s{s}_expected", expected[s], stderr=0.0, samples=0, t=t)
        out.add("pile_count", 0, stat=Statistic.from_samples("pile_count", total[:, k]), t=t)
        out.add("pile_count_expected", oracle.expected_total_piles(t, n), stderr=0.0,
                samples=0, t=t)
        out.add("residual_mass", 0, stat=Statistic.from_samples("r", residual[:, k]), t=t)
        if thetas:
            est, se = oracle.threshold_probability_grid(
                t, n, thetas, law, cfg.samples, seed_stream(cfg.seed, ORACLE_STREAM + k))
            for j, th in enumerate(thetas):
                out.add(f"threshold_mass@{th:.6g}", 0,
                        stat=Statistic.from_samples("m", masses[:, k, j]), t=t, gamma=gammas[j])
                out.add(f"threshold_probability@{th:.6g}", est[j], stderr=se[j],
                        samples=cfg.samples, t=t, gamma=gammas[j])
        out.stamp(mark)


def _identity(cfg, out):
    law, n, model, ts = cfg.law_obj, cfg.n, cfg.model_kind, cfg.times
    thetas = list(cfg.thetas) or list(DEFAULT_THETA_GRID)
    vals = observables.pile_threshold_samples(
        model, law, n, ts, thetas, cfg.replicas, cfg.seed, floor_log=cfg.floor_log,
        max_events=cfg.max_events, workers=cfg.workers)
    out.stamp(0)
    for k, t in enumerate(ts):
        mark = len(out.rows)
        est, se = oracle.threshold_probability_grid(
            t, n, thetas, law, cfg.samples, seed_stream(cfg.seed, ORACLE_STREAM + k))
        for j, th in enumerate(thetas):
            st = Statistic.from_samples("pile", vals[:, k, j])
            out.add(f"pile_mass@{th:.6g}", 0, stat=st, t=t)
            out.add(f"oracle@{th:.6g}", est[j], stderr=se[j], samples=cfg.samples, t=t)
            out.add(f"z@{th:.6g}", st.z(est[j], se[j]), t=t)
        out.stamp(mark)


def _contraction(cfg, out):
    law, n, model, ts = cfg.law_obj, cfg.n, cfg.model_kind, cfg.times
    _budget(cfg, ts[-1])
    vals = equilibrium.contraction_samples(model, law, n, ts, cfg.replicas, cfg.seed,
                                           workers=cfg.workers)
    for k, t in enumerate(ts):
        st = Statistic.from_samples("mean_square", vals[:, k])
        target = equilibrium.contraction_closed_form(model, law, n, t)
        out.add("mean_square_gap", 0, stat=st, t=t)
        out.add("closed_form", target, stderr=0.0, samples=0, t=t)
        out.add("z", st.z(target), t=t)
    out.stamp(0)


def _stationary(cfg, out):
    law, n, model = cfg.law_obj, cfg.n, cfg.model_kind
    burn = equilibrium.default_burn(n) if cfg.burn is None else cfg.burn
    _budget(cfg, burn)
    m2 = equilibrium.stationary_second_moment(n, law)
    samples = equilibrium.long_run_samples(model, law, n, burn, cfg.replicas, cfg.seed,
                                           workers=cfg.workers)
    if model is ModelKind.SRM:
        nl2 = n * np.einsum("ij,ij->i", samples, samples)
        st = Statistic.from_samples("n_l2_sq", nl2)
        out.add("n_l2_sq", 0, stat=st, t=burn)
        out.add("n_l2_sq_closed_form", m2, stderr=0.0, samples=0)
        out.add("z", st.z(m2), t=burn)
        if isinstance(law, BetaSymmetric):
            a = law.alpha
            out.add("n_l2_sq_dirichlet", n * (a + 1) / (n * a + 1), stderr=0.0, samples=0)
    elif model is ModelKind.SEM:
        height = samples.mean(axis=1)
        mean_st = Statistic.from_samples("height_mean", height)
        sq_st = Statistic.from_samples("height_second_moment", height**2)
        out.add("height_mean", 0, stat=mean_st, t=burn)
        out.add("height_mean_target", 1.0 / n, stderr=0.0, samples=0)
        out.add("height_second_moment", 0, stat=sq_st, t=burn)
        out.add("height_second_moment_target", m2 / n**2, stderr=0.0, samples=0)
        out.add("flatness_l1", 0, stat=Statistic.from_samples(
            "f", np.abs(samples - height[:, None]).sum(axis=1)), t=burn)
        if isinstance(law, BetaSymmetric):
            a, b = law.alpha, law.alpha * (n - 1)
            var = a * b / ((a + b) ** 2 * (a + b + 1))
            out.add("height_variance_beta", var, stderr=0.0, samples=0)
    else:
        l1 = np.abs(samples - 1.0 / n).sum(axis=1)
        out.add("l1_to_flat", 0, stat=Statistic.from_samples("l1", l1), t=burn)
        out.add("l1_to_flat_target", 0.0, stderr=0.0, samples=0)
    out.stamp(0)


def _profile(cfg, out):
    law, n, model = cfg.law_obj, cfg.n, cfg.model_kind
    c = entropic_constants(law)
    sch = oracle.schedule(n, c)
    betas = sorted(cfg.betas)
    ts = [sch.time(b) for b in betas]
    plain, srt, errs, h = observables.coupling_samples(
        model, law, n, ts, cfg.replicas, cfg.seed, max_events=cfg.max_events,
        workers=cfg.workers)
    bias = observables.coupling_bias_bound(model, law, n, h, errs)
    for k, (b, t) in enumerate(zip(betas, ts)):
        if model is ModelKind.GAM:
            out.add("l1_to_flat", 0, stat=Statistic.from_samples("d", plain[:, k]), t=t, beta=b,
                    bias=0.0)
        else:
            out.add("coupling_plain", 0, stat=Statistic.from_samples("d", plain[:, k]),
                    t=t, beta=b, bias=bias)
            out.add("coupling_sorted", 0, stat=Statistic.from_samples("d", srt[:, k]),
                    t=t, beta=b, bias=bias)
        out.add("theorem_profile", oracle.theorem_profile(b, c), stderr=0.0, samples=0,
                t=t, beta=b)
    out.stamp(0)
    if cfg.gamma is not None:
        mark = len(out.rows)
        spec = ThresholdSpec.from_gamma(cfg.gamma, c.h, n)
        # pile replicas use their own stream indices, disjoint from the coupling ones
        vals = observables.pile_threshold_samples(
            model, law, n, ts, [spec.theta], cfg.replicas, cfg.seed,
            max_events=cfg.max_events, workers=cfg.workers, offset=cfg.replicas)
        for k, (b, t) in enumerate(zip(betas, ts)):
            st = Statistic.from_samples("large_pile_mass", vals[:, k, 0])
            out.add("large_pile_mass", 0, stat=st, t=t, beta=b, gamma=cfg.gamma)
            out.add("clt_profile", oracle.clt_profile(b, cfg.gamma, c), stderr=0.0, samples=0,
                    t=t, beta=b, gamma=cfg.gamma)
            out.add("lower_bound_diagnostic",
                    observables.lower_bound_diagnostic(st, spec, model, law, n),
                    t=t, beta=b, gamma=cfg.gamma)
        out.stamp(mark)


def _monotonicity(cfg, out):
    law, n, model = cfg.law_obj, cfg.n, cfg.model_kind
    ts = cfg.times
    if not ts:
        t_ent = oracle.schedule(n, law).t_ent
        ts = sorted({oracle.round_time(x) for x in np.linspace(0.0, 2.0 * t_ent, 8)})
    plain, srt, errs, h = observables.coupling_samples(
        model, law, n, ts, cfg.replicas, cfg.seed, max_events=cfg.max_events,
        workers=cfg.workers)
    bias = observables.coupling_bias_bound(model, law, n, h, errs)
    curves = {}
    for name, arr in (("coupling_plain", plain), ("coupling_sorted", srt)):
        curve = [Statistic.from_samples(name, arr[:, k], bias_bound=bias) for k in range(len(ts))]
        curves[name] = curve
        for t, st in zip(ts, curve):
            out.add(name, 0, stat=st, t=t)
    for name, curve in curves.items():
        out.add(f"{name}_monotone", 1.0 if observables.is_monotone(curve) else 0.0)
    out.stamp(0)


_DISPATCH = {
    "constants": _constants,
    "simulate": _simulate,
    "piles": _piles,
    "identity": _identity,
    "contraction": _contraction,
    "stationary": _stationary,
    "profile": _profile,
    "monotonicity": _monotonicity,
}


def run_experiment(cfg):
    """Validate ``cfg``, run its command and return the rows."""
    cfg.validate()
    out = _Emitter(cfg)
    _DISPATCH[cfg.command](cfg, out)
    return ExperimentResult(config=cfg, rows=out.rows)


def format_value(v):
    if v is None:
        return ""
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    return str(v)
