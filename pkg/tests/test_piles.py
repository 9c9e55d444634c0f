import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from exchange_cutoff import dynamics
from exchange_cutoff.dynamics import ExchangeEvent, ModelKind
from exchange_cutoff.errors import CapExceeded, IndexOutOfRange, ThresholdBelowFloor
from exchange_cutoff.laws import BetaSymmetric, PointHalf, TwoPoint
from exchange_cutoff.oracle import expected_pile_counts, expected_total_piles
from exchange_cutoff.piles import (
    PileSet,
    ThresholdSpec,
    counts_by_updates,
    pile_init,
    pile_run,
    pile_step,
    threshold_mass,
)
from exchange_cutoff.rng import seed_stream

MODELS = list(ModelKind)


def test_init():
    ps = pile_init("srm", 10, 3)
    assert ps.pile_count == 1
    (p,) = ps.piles()
    assert (p.site, p.log_size, p.updates, p.size) == (3, 0.0, 0, 1.0)
    assert np.array_equal(ps.reconstruct(), dynamics.dirac(10, 3).energy)
    assert counts_by_updates(ps) == {0: 1}
    with pytest.raises(IndexOutOfRange):
        pile_init("srm", 10, 10)


def sizes_by_site(ps):
    out = {}
    for p in ps.piles():
        out.setdefault(p.site, []).append(round(p.size, 12))
    return {k: sorted(v) for k, v in out.items()}


def test_srm_split():
    ps = pile_step(pile_init("srm", 4, 0), ExchangeEvent(0, 2, 0.25))
    assert sizes_by_site(ps) == {0: [0.25], 2: [0.75]}
    # a pile at y: X p moves to x, (1 - X) p stays
    ps = pile_step(ps, ExchangeEvent(1, 2, 0.4))
    assert sizes_by_site(ps) == {0: [0.25], 1: [0.3], 2: [0.45]}


def test_sem_split():
    ps = pile_step(pile_init("sem", 4, 0), ExchangeEvent(0, 1, 0.3))
    assert sizes_by_site(ps) == {0: [0.3], 1: [0.3]}
    assert threshold_mass(ps, 0.0) == pytest.approx(0.6, abs=1e-15)
    ps = pile_step(ps, ExchangeEvent(2, 1, 0.3))
    # pile at y: both children (1 - X) p, one stays at y, one moves to x
    assert sizes_by_site(ps) == {0: [0.3], 1: [0.21], 2: [0.21]}


def test_gam_split():
    ps = pile_step(pile_init("gam", 3, 1), ExchangeEvent(1, 0, 0.25))
    assert sizes_by_site(ps) == {0: [0.75], 1: [0.25]}


@pytest.mark.parametrize("model", MODELS)
def test_count_doubles_at_touched_sites(model):
    g = seed_stream(1)
    ps = pile_run(pile_init(model, 6, 0), BetaSymmetric(1.0), 30, g)
    for _ in range(20):
        ev = dynamics.draw_event(6, BetaSymmetric(1.0), g)
        before = ps.cnt.copy()
        pile_step(ps, ev)
        assert ps.cnt[ev.x] + ps.cnt[ev.y] == 2 * (before[ev.x] + before[ev.y])
        others = [s for s in range(6) if s not in (ev.x, ev.y)]
        assert np.array_equal(ps.cnt[others], before[others])


@pytest.mark.parametrize("model", MODELS)
def test_reconstruction_coupled(model):
    law = BetaSymmetric(1.0)
    n = 20
    blocks = list(dynamics.iter_event_blocks(n, law, seed_stream(2), 2000, block=100))
    ps = PileSet(model, n, 0, floor_log=-10.0)
    cfg = dynamics.dirac(n, 0, model)
    for blk in blocks:
        ps.apply_block(blk)
        dynamics.apply_block(cfg, blk)
        assert np.allclose(ps.reconstruct(), cfg.energy, rtol=0, atol=1e-9)
    if model is not ModelKind.SEM:
        assert threshold_mass(ps, 0.0) == pytest.approx(1.0, abs=1e-9)


def test_floor_discards_into_landing_site():
    ps = PileSet("srm", 3, 0, floor_log=math.log(0.2))
    pile_step(ps, ExchangeEvent(0, 1, 0.1))
    # 0.1 stays at site 0 but falls below the floor
    assert ps.residual[0] == pytest.approx(0.1)
    assert sizes_by_site(ps) == {1: [0.9]}
    assert np.allclose(ps.reconstruct(), [0.1, 0.9, 0.0])


def test_threshold_mass_examples():
    ps = pile_init("srm", 5, 0)
    assert threshold_mass(ps, 0.5) == 1.0
    assert threshold_mass(ps, 1.0) == 1.0
    assert threshold_mass(ps, 2.0) == 0.0
    ps = PileSet("srm", 5, 0, floor_log=-5.0)
    with pytest.raises(ThresholdBelowFloor):
        threshold_mass(ps, math.exp(-6))


def test_theta_one_never_updated_pile():
    n, t, reps = 10, 20, 4000
    vals = np.empty(reps)
    for i in range(reps):
        ps = pile_run(pile_init("srm", n, 0), BetaSymmetric(1.0), t, seed_stream(3, i))
        vals[i] = threshold_mass(ps, 1.0)
    target = (1 - 2 / n) ** t
    assert abs(vals.mean() - target) <= 4 * vals.std(ddof=1) / math.sqrt(reps)


def test_counts_and_total():
    n, t, reps = 20, 40, 3000
    counts = np.zeros((reps, 8))
    totals = np.zeros(reps)
    for i in range(reps):
        ps = pile_run(pile_init("gam", n, 0), TwoPoint(0.25), t, seed_stream(4, i))
        h = counts_by_updates(ps)
        counts[i] = [h.get(s, 0) for s in range(8)]
        totals[i] = ps.pile_count
    exp = expected_pile_counts(t, n, range(8))
    se = counts.std(axis=0, ddof=1) / math.sqrt(reps)
    for s in range(8):
        assert abs(counts[:, s].mean() - exp[s]) <= 4 * se[s] + 1e-12
    assert abs(totals.mean() - expected_total_piles(t, n)) <= 4 * totals.std(ddof=1) / math.sqrt(reps)


def test_size_given_updates_is_product():
    law = BetaSymmetric(1.0)
    logs = []
    for i in range(2000):
        ps = pile_run(pile_init("srm", 10, 0), law, 20, seed_stream(5, i))
        logs.extend(p.log_size for p in ps.piles() if p.updates == 3)
    direct = np.log(law.sample(seed_stream(6), (len(logs), 3))).sum(axis=1)
    assert len(logs) > 1000
    assert stats.ks_2samp(logs, direct).pvalue > 1e-3


def test_cap_exceeded():
    ps = PileSet("srm", 4, 0, cap=16)
    with pytest.raises(CapExceeded):
        pile_run(ps, PointHalf(), 200, seed_stream(7))


def test_growth_keeps_state():
    # many reallocations from a tiny initial pool
    ps = PileSet("gam", 8, 0, floor_log=-30.0, capacity=2)
    cfg = dynamics.dirac(8, 0, "gam")
    g = seed_stream(8)
    for blk in dynamics.iter_event_blocks(8, BetaSymmetric(2.0), g, 60, block=7):
        ps.apply_block(blk)
        dynamics.apply_block(cfg, blk)
    assert ps.capacity > 2
    assert np.allclose(ps.reconstruct(), cfg.energy, atol=1e-9)
    assert sum(counts_by_updates(ps).values()) == ps.pile_count


def test_threshold_spec():
    spec = ThresholdSpec.from_gamma(0.3, 0.5, 1024)
    assert spec.psi == pytest.approx(0.3 * math.sqrt(0.5 * math.log(1024)), abs=1e-12)
    assert spec.theta == pytest.approx(math.exp(spec.psi) / 1024, rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(MODELS), st.integers(2, 9), st.integers(0, 120), st.integers(0, 2**31))
def test_reconstruction_property(model, n, steps, seed):
    law = TwoPoint(0.3)
    g = seed_stream(seed)
    blk = dynamics.draw_events(n, law, g, steps)
    ps = PileSet(model, n, 0, floor_log=-12.0)
    ps.apply_block(blk)
    cfg = dynamics.apply_block(dynamics.dirac(n, 0, model), blk)
    assert np.allclose(ps.reconstruct(), cfg.energy, atol=1e-9)
    assert all(p.log_size <= 0 and p.updates <= steps for p in ps.piles())
