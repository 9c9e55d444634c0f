"""Experiment configuration: ``key = value`` files merged with CLI flags."""

import dataclasses
from dataclasses import dataclass, field

from ..dynamics import ModelKind
from ..errors import ConfigError, ExchangeCutoffError
from ..laws import parse_law

COMMANDS = (
    "constants", "simulate", "piles", "identity",
    "contraction", "stationary", "profile", "monotonicity",
)
FORMATS = ("csv", "json")
_U64 = (1 << 64) - 1


def _int_list(text):
    return [int(float(tok)) for tok in str(text).replace(";", ",").split(",") if tok.strip()]


def _float_list(text):
    return [float(tok) for tok in str(text).replace(";", ",").split(",") if tok.strip()]


def _optional_float(text):
    return None if text in (None, "", "none") else float(text)


# key -> (attribute, parser)
_KEYS = {
    "command": ("command", str),
    "model": ("model", str),
    "law": ("law", str),
    "n": ("n", lambda s: int(float(s))),
    "t": ("times", _int_list),
    "times": ("times", _int_list),
    "beta": ("betas", _float_list),
    "gamma": ("gamma", _optional_float),
    "theta": ("thetas", _float_list),
    "replicas": ("replicas", lambda s: int(float(s))),
    "seed": ("seed", int),
    "out": ("output", str),
    "output": ("output", str),
    "format": ("format", str),
    "samples": ("samples", lambda s: int(float(s))),
    "budget": ("max_events", lambda s: int(float(s))),
    "workers": ("workers", int),
    "floor": ("floor_log", float),
    "burn": ("burn", lambda s: int(float(s))),
}


@dataclass
class ExperimentConfig:
    command: str = "constants"
    model: str = "srm"
    law: str = "beta:1"
    n: int = 100
    times: list = field(default_factory=list)
    betas: list = field(default_factory=list)
    gamma: float = None
    thetas: list = field(default_factory=list)
    replicas: int = 100
    seed: int = 0
    output: str = None
    format: str = "csv"
    samples: int = 10**6
    max_events: int = 2 * 10**10
    workers: int = 1
    floor_log: float = None
    burn: int = None

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command '{self.command}'", field="command")
        try:
            self.model = ModelKind.parse(self.model).label
        except ExchangeCutoffError as exc:
            raise ConfigError(str(exc), field="model") from None
        try:
            parse_law(self.law)
        except ExchangeCutoffError as exc:
            raise ConfigError(str(exc), field="law") from None
        if self.n < 2:
            raise ConfigError("n must be at least 2", field="n")
        if self.replicas < 1:
            raise ConfigError("replicas must be at least 1", field="replicas")
        if not 0 <= self.seed <= _U64:
            raise ConfigError("seed must be an unsigned 64-bit integer", field="seed")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}", field="format")
        if any(t < 0 for t in self.times):
            raise ConfigError("times must be nonnegative", field="t")
        if self.command == "profile" and not self.betas:
            raise ConfigError("profile needs a nonempty beta grid", field="beta")
        if self.command in ("simulate", "piles", "identity", "contraction") and not self.times:
            raise ConfigError(f"{self.command} needs at least one time", field="t")
        if self.samples < 1:
            raise ConfigError("samples must be at least 1", field="samples")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1", field="workers")
        if self.gamma is not None and self.gamma <= 0:
            raise ConfigError("gamma must be positive", field="gamma")
        self.times = sorted(self.times)
        return self

    @property
    def law_obj(self):
        return parse_law(self.law)

    @property
    def model_kind(self):
        return ModelKind.parse(self.model)

    def as_dict(self):
        return dataclasses.asdict(self)


def set_value(cfg, key, raw, line=None):
    key = key.strip().lower().replace("-", "_")
    if key not in _KEYS:
        raise ConfigError(f"unknown key '{key}'", field=key, line=line)
    attr, parse = _KEYS[key]
    try:
        value = parse(raw.strip() if isinstance(raw, str) else raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value {raw!r}: {exc}", field=key, line=line) from None
    setattr(cfg, attr, value)


def read_config_text(text, cfg=None):
    """Apply ``key = value`` lines (``#`` comments allowed) to ``cfg``."""
    cfg = cfg if cfg is not None else ExperimentConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, value = line.split("=", 1)
        set_value(cfg, key, value, line=lineno)
    return cfg


def read_config_file(path, cfg=None):
    with open(path, encoding="utf-8") as fh:
        return read_config_text(fh.read(), cfg)
