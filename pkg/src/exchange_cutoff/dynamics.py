"""Pairwise exchange dynamics (SRM, SEM, GAM) on energy vectors.

Events are drawn in blocks from a replica's random stream: first the block
of first sites, then the block of second sites, then the block of exchange
fractions. The numba kernel only applies updates, so trajectories depend on
the stream and block layout alone.
"""

import enum
import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import IndexOutOfRange, InvalidParameter, UnsupportedSize
from .rng import as_generator

BLOCK = 1 << 16
DENSE_MAX_N = 64


class ModelKind(enum.IntEnum):
    SRM = 0
    SEM = 1
    GAM = 2

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        try:
            return cls[str(text).strip().upper()]
        except KeyError:
            raise InvalidParameter(f"unknown model '{text}' (expected srm, sem or gam)") from None

    @property
    def label(self):
        return self.name.lower()


@dataclass
class Configuration:
    model: ModelKind
    energy: np.ndarray
    step: int = 0

    @property
    def n(self):
        return len(self.energy)

    def copy(self):
        return Configuration(self.model, self.energy.copy(), self.step)


@dataclass(frozen=True)
class ExchangeEvent:
    x: int
    y: int
    xval: float


@dataclass(frozen=True)
class EventBlock:
    """Parallel arrays of events: first sites, second sites, fractions."""

    xs: np.ndarray
    ys: np.ndarray
    xvals: np.ndarray

    def __len__(self):
        return len(self.xs)

    def __getitem__(self, i):
        return ExchangeEvent(int(self.xs[i]), int(self.ys[i]), float(self.xvals[i]))

    def slice(self, start, stop):
        return EventBlock(self.xs[start:stop], self.ys[start:stop], self.xvals[start:stop])


def _check_n(n):
    if n < 2:
        raise InvalidParameter(f"need at least two particles, got n={n}")


def dirac(n, x0, model=ModelKind.SRM):
    """Configuration with unit energy at ``x0`` and zero elsewhere."""
    _check_n(n)
    if not 0 <= x0 < n:
        raise IndexOutOfRange(f"site {x0} outside [0, {n})")
    energy = np.zeros(n)
    energy[x0] = 1.0
    return Configuration(ModelKind.parse(model), energy, 0)


def flat(n, model=ModelKind.SRM, height=None):
    _check_n(n)
    h = 1.0 / n if height is None else float(height)
    return Configuration(ModelKind.parse(model), np.full(n, h), 0)


def draw_event(n, law, rng):
    """One uniform ordered pair of distinct sites and an independent fraction."""
    _check_n(n)
    rng = as_generator(rng)
    x = int(rng.integers(0, n))
    y = int(rng.integers(0, n - 1))
    if y >= x:
        y += 1
    return ExchangeEvent(x, y, float(law.sample(rng)))


def draw_events(n, law, rng, count):
    """A block of ``count`` i.i.d. events (see module docstring for layout)."""
    _check_n(n)
    rng = as_generator(rng)
    xs = rng.integers(0, n, size=count)
    ys = rng.integers(0, n - 1, size=count)
    ys += ys >= xs
    xvals = np.asarray(law.sample(rng, count), dtype=float)
    return EventBlock(xs, ys, xvals)


def iter_event_blocks(n, law, rng, steps, block=BLOCK):
    """Yield event blocks covering ``steps`` events."""
    done = 0
    while done < steps:
        k = min(block, steps - done)
        yield draw_events(n, law, rng, k)
        done += k


@numba.njit(cache=True, nogil=True)
def apply_events(energy, model, xs, ys, xvals):
    """Apply events in order to ``energy`` in place."""
    for i in range(xs.shape[0]):
        x = xs[i]
        y = ys[i]
        X = xvals[i]
        a = energy[x]
        b = energy[y]
        if model == 0:
            s = a + b
            energy[x] = X * s
            energy[y] = (1.0 - X) * s
        elif model == 1:
            v = X * a + (1.0 - X) * b
            # rounding must not break the maximum principle
            hi = a if a > b else b
            lo = b if a > b else a
            if v > hi:
                v = hi
            elif v < lo:
                v = lo
            energy[x] = v
            energy[y] = v
        else:
            energy[x] = X * a + (1.0 - X) * b
            energy[y] = (1.0 - X) * a + X * b


def step(cfg, ev):
    """Configuration after one exchange event; the input is left unchanged."""
    n = cfg.n
    if not (0 <= ev.x < n and 0 <= ev.y < n) or ev.x == ev.y:
        raise IndexOutOfRange(f"invalid event ({ev.x}, {ev.y}) for n={n}")
    out = cfg.copy()
    apply_events(
        out.energy, int(out.model),
        np.array([ev.x]), np.array([ev.y]), np.array([float(ev.xval)]),
    )
    out.step += 1
    return out


def apply_block(cfg, block):
    """Apply an event block to ``cfg`` in place and return it."""
    apply_events(cfg.energy, int(cfg.model), block.xs, block.ys, block.xvals)
    cfg.step += len(block)
    return cfg


def run(cfg, law, steps, rng):
    """Run ``steps`` i.i.d. events from ``cfg``; returns a new configuration."""
    rng = as_generator(rng)
    out = cfg.copy()
    for block in iter_event_blocks(out.n, law, rng, int(steps)):
        apply_block(out, block)
    return out


def matrix_of(ev, n, kind):
    """Dense n x n update matrix whose right product reproduces ``step``.

    SRM gives the block r, SEM its transpose, GAM the block q; the identity
    elsewhere. Test-only, capped at n <= 64.
    """
    if n > DENSE_MAX_N:
        raise UnsupportedSize(f"dense matrices limited to n <= {DENSE_MAX_N}")
    kind = ModelKind.parse(kind)
    X = float(ev.xval)
    if kind is ModelKind.SRM:
        block = np.array([[X, 1 - X], [X, 1 - X]])
    elif kind is ModelKind.SEM:
        block = np.array([[X, X], [1 - X, 1 - X]])
    else:
        block = np.array([[X, 1 - X], [1 - X, X]])
    m = np.eye(n)
    idx = np.array([ev.x, ev.y])
    m[np.ix_(idx, idx)] = block
    return m


def average(cfg):
    """Mean energy per particle."""
    return math.fsum(cfg.energy) / cfg.n


def total_mass(cfg):
    return math.fsum(cfg.energy)
