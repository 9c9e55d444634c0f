"""Pile dynamics: fragment-level refinement of the exchange models.

Each pile carries a site, a log-size and the number of updates it has
experienced. On an event at (x, y) every pile at x or y splits into two
children. Children whose log-size falls below ``floor_log`` are folded into a
per-site residual, and the residual itself evolves under the plain dynamics.
That keeps ``pile mass + residual`` equal to the direct energy vector.

Storage is a slot pool: flat arrays indexed by slot, per-site singly linked
lists threaded through ``nxt``, and a stack of free slots.
"""

import math
from dataclasses import dataclass

import numba
import numpy as np

from .dynamics import EventBlock, ModelKind, _check_n, iter_event_blocks
from .errors import CapExceeded, IndexOutOfRange, InvalidParameter, ThresholdBelowFloor
from .rng import as_generator

DEFAULT_FLOOR_LOG = -60.0
DEFAULT_CAP = 10**8
# log-space slack so that exactly representable thresholds (e.g. 2^-k)
# are not lost to rounding in accumulated log-sizes
LOG_TOL = 1e-9
_UPDATES_MAX = 2**32 - 1
_FREE = -1


@dataclass(frozen=True)
class Pile:
    site: int
    log_size: float
    updates: int

    @property
    def size(self):
        return math.exp(self.log_size)


@dataclass(frozen=True)
class ThresholdSpec:
    gamma: float
    psi: float
    theta: float

    @classmethod
    def from_gamma(cls, gamma, h, n):
        psi = gamma * math.sqrt(h * math.log(n))
        return cls(gamma=float(gamma), psi=psi, theta=math.exp(psi) / n)


@numba.njit(cache=True, nogil=True, inline="always")
def _emit(site, logv, u, slot, floor_log, logsz, upd, where, nxt, head, cnt, free, state, residual):
    if logv < floor_log:
        if logv > -np.inf:
            residual[site] += math.exp(logv)
        if slot >= 0:
            upd[slot] = _FREE
            free[state[0]] = slot
            state[0] += 1
            state[1] -= 1
        return
    if slot < 0:
        state[0] -= 1
        slot = free[state[0]]
        state[1] += 1
    logsz[slot] = logv
    upd[slot] = u
    where[slot] = site
    nxt[slot] = head[site]
    head[site] = slot
    cnt[site] += 1


@numba.njit(cache=True, nogil=True)
def _pile_events(model, floor_log, xs, ys, xvals, start,
                 logsz, upd, where, nxt, head, cnt, free, state, residual, tmp):
    """Process events from ``start``; return the index of the first event not
    processed (short of the end only when free slots run out)."""
    m = xs.shape[0]
    for i in range(start, m):
        x = xs[i]
        y = ys[i]
        cx = cnt[x]
        cy = cnt[y]
        if state[0] < cx + cy:
            return i
        X = xvals[i]
        # residual follows the plain dynamics
        a = residual[x]
        b = residual[y]
        if model == 0:
            residual[x] = X * (a + b)
            residual[y] = (1.0 - X) * (a + b)
        elif model == 1:
            v = X * a + (1.0 - X) * b
            residual[x] = v
            residual[y] = v
        else:
            residual[x] = X * a + (1.0 - X) * b
            residual[y] = (1.0 - X) * a + X * b
        if cx + cy == 0:
            continue
        lx = math.log(X) if X > 0.0 else -np.inf
        l1x = math.log1p(-X) if X < 1.0 else -np.inf
        k = 0
        s = head[x]
        while s >= 0:
            tmp[k] = s
            k += 1
            s = nxt[s]
        s = head[y]
        while s >= 0:
            tmp[k] = s
            k += 1
            s = nxt[s]
        head[x] = -1
        head[y] = -1
        cnt[x] = 0
        cnt[y] = 0
        for j in range(k):
            p = tmp[j]
            lp = logsz[p]
            u = upd[p] + 1
            if u > _UPDATES_MAX:
                u = _UPDATES_MAX
            at_x = j < cx
            if model == 0:
                # SRM: fraction X goes to x, 1 - X to y, from either site
                _emit(x, lp + lx, u, p, floor_log, logsz, upd, where, nxt, head, cnt, free, state, residual)
                _emit(y, lp + l1x, u, -1, floor_log, logsz, upd, where, nxt, head, cnt, free, state, residual)
            elif model == 1:
                lc = lp + lx if at_x else lp + l1x
                _emit(x, lc, u, p, floor_log, logsz, upd, where, nxt, head, cnt, free, state, residual)
                _emit(y, lc, u, -1, floor_log, logsz, upd, where, nxt, head, cnt, free, state, residual)
            else:
                stay = x if at_x else y
                move = y if at_x else x
                _emit(stay, lp + lx, u, p, floor_log, logsz, upd, where, nxt, head, cnt, free, state, residual)
                _emit(move, lp + l1x, u, -1, floor_log, logsz, upd, where, nxt, head, cnt, free, state, residual)
    return m


class PileSet:
    """Piles of one replica started from a unit pile at ``x0``."""

    def __init__(self, model, n, x0, floor_log=DEFAULT_FLOOR_LOG, cap=DEFAULT_CAP, capacity=64):
        _check_n(n)
        if not 0 <= x0 < n:
            raise IndexOutOfRange(f"site {x0} outside [0, {n})")
        if floor_log > 0:
            raise InvalidParameter("floor_log must be nonpositive")
        self.model = ModelKind.parse(model)
        self.n = int(n)
        self.floor_log = float(floor_log)
        self.cap = int(cap)
        self.step = 0
        capacity = max(2, min(int(capacity), self.cap))
        self._alloc(capacity)
        self.head = np.full(n, -1, dtype=np.int64)
        self.cnt = np.zeros(n, dtype=np.int64)
        self.residual = np.zeros(n)
        # state[0]: free slots on the stack, state[1]: live piles
        self.state = np.array([capacity, 0], dtype=np.int64)
        self.free[:] = np.arange(capacity - 1, -1, -1)
        slot = self.free[capacity - 1]
        self.state[0] -= 1
        self.state[1] = 1
        self.logsz[slot] = 0.0
        self.upd[slot] = 0
        self.where[slot] = x0
        self.nxt[slot] = -1
        self.head[x0] = slot
        self.cnt[x0] = 1

    def _alloc(self, capacity):
        self.logsz = np.zeros(capacity)
        self.upd = np.full(capacity, _FREE, dtype=np.int64)
        self.where = np.zeros(capacity, dtype=np.int64)
        self.nxt = np.full(capacity, -1, dtype=np.int64)
        self.free = np.zeros(capacity, dtype=np.int64)
        self.tmp = np.zeros(capacity, dtype=np.int64)

    @property
    def capacity(self):
        return len(self.logsz)

    def _grow(self, needed):
        old = self.capacity
        live = int(self.state[1])
        target = max(2 * old, live + needed + 1)
        if target > self.cap:
            if live + needed > self.cap:
                raise CapExceeded(
                    f"pile count would exceed the cap of {self.cap} "
                    f"(live {live}, event needs {needed} more slots)"
                )
            target = self.cap
        logsz, upd, where, nxt = self.logsz, self.upd, self.where, self.nxt
        nfree = int(self.state[0])
        free = self.free[:nfree].copy()
        self._alloc(target)
        self.logsz[:old] = logsz
        self.upd[:old] = upd
        self.where[:old] = where
        self.nxt[:old] = nxt
        added = np.arange(target - 1, old - 1, -1)
        self.free[: len(added)] = added
        self.free[len(added): len(added) + nfree] = free
        self.state[0] = len(added) + nfree

    def apply_block(self, block):
        """Apply an event block in place."""
        i = 0
        m = len(block)
        while i < m:
            i = _pile_events(
                int(self.model), self.floor_log, block.xs, block.ys, block.xvals, i,
                self.logsz, self.upd, self.where, self.nxt, self.head, self.cnt,
                self.free, self.state, self.residual, self.tmp,
            )
            if i < m:
                needed = int(self.cnt[block.xs[i]] + self.cnt[block.ys[i]])
                self._grow(needed)
        self.step += m
        return self

    # --- views -----------------------------------------------------------
    def _live(self):
        return self.upd >= 0

    @property
    def pile_count(self):
        return int(self.state[1])

    def piles(self):
        live = np.flatnonzero(self._live())
        return [Pile(int(self.where[s]), float(self.logsz[s]), int(self.upd[s])) for s in live]

    def pile_energy(self):
        """Per-site total size of live piles."""
        live = self._live()
        return np.bincount(self.where[live], weights=np.exp(self.logsz[live]), minlength=self.n)

    def reconstruct(self):
        """Per-site pile mass plus residual; equals the direct energy vector."""
        return self.pile_energy() + self.residual

    def residual_mass(self):
        return math.fsum(self.residual)


def pile_init(model, n, x0, floor_log=DEFAULT_FLOOR_LOG, cap=DEFAULT_CAP):
    """Single unit pile at ``x0`` with no updates and zero residual."""
    return PileSet(model, n, x0, floor_log=floor_log, cap=cap)


def pile_step(ps, ev):
    """Apply one event to ``ps`` in place and return it."""
    if not (0 <= ev.x < ps.n and 0 <= ev.y < ps.n) or ev.x == ev.y:
        raise IndexOutOfRange(f"invalid event ({ev.x}, {ev.y}) for n={ps.n}")
    block = EventBlock(np.array([ev.x]), np.array([ev.y]), np.array([float(ev.xval)]))
    return ps.apply_block(block)


def pile_run(ps, law, steps, rng):
    """Run ``steps`` i.i.d. events on ``ps`` in place."""
    rng = as_generator(rng)
    for block in iter_event_blocks(ps.n, law, rng, int(steps)):
        ps.apply_block(block)
    return ps


def threshold_mass(ps, theta):
    """Total size of piles of size at least ``theta``.

    ``theta = 0`` counts everything including the residual; positive
    thresholds must not fall below the discard floor.
    """
    theta = float(theta)
    if theta < 0.0:
        raise InvalidParameter(f"threshold must be nonnegative, got {theta}")
    if theta == 0.0:
        return math.fsum(ps.pile_energy()) + ps.residual_mass()
    log_theta = math.log(theta)
    if log_theta < ps.floor_log:
        raise ThresholdBelowFloor(
            f"threshold {theta!r} is below the discard floor exp({ps.floor_log})"
        )
    live = ps._live()
    logs = ps.logsz[live]
    return math.fsum(np.exp(logs[logs >= log_theta - LOG_TOL]))


def counts_by_updates(ps):
    """Histogram {update count: number of live piles}."""
    counts = np.bincount(ps.upd[ps._live()])
    return {int(s): int(c) for s, c in enumerate(counts) if c}
