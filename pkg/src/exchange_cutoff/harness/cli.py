"""exchange-cutoff command line."""

import argparse
import re
import sys

from ..errors import BudgetExceeded, CapExceeded, ConfigError, ExchangeCutoffError
from .config import COMMANDS, FORMATS, ExperimentConfig, read_config_file, set_value
from .experiments import run_experiment
from .output import write_result

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_IO = 4

_NEG = re.compile(r"^-[0-9.]")

# flag -> config key
_FLAGS = (
    ("model", "model"), ("law", "law"), ("n", "n"), ("t", "t"), ("beta", "beta"),
    ("gamma", "gamma"), ("theta", "theta"), ("replicas", "replicas"), ("seed", "seed"),
    ("out", "out"), ("format", "format"), ("samples", "samples"), ("budget", "budget"),
    ("workers", "workers"), ("floor", "floor"), ("burn", "burn"),
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)


def build_parser():
    p = _Parser(prog="exchange-cutoff",
                description="Simulate SRM/SEM/GAM exchange models and check cutoff statistics.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="key = value file; flags override its keys")
    p.add_argument("--model", help="srm, sem or gam")
    p.add_argument("--law", help="point-half | beta:A | two-point:A | discrete:x,w;...")
    p.add_argument("--n", help="number of sites")
    p.add_argument("--t", help="comma-separated step counts")
    p.add_argument("--beta", help="comma-separated window offsets")
    p.add_argument("--gamma", help="pile threshold exponent")
    p.add_argument("--theta", help="comma-separated pile thresholds")
    p.add_argument("--replicas")
    p.add_argument("--seed", help="unsigned 64-bit master seed")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--samples", help="oracle / Monte Carlo sample budget")
    p.add_argument("--budget", help="maximum replicas x steps")
    p.add_argument("--workers", help="replica threads")
    p.add_argument("--floor", help="log pile discard floor")
    p.add_argument("--burn", help="burn-in steps for stationary runs")
    return p


def _glue_negative_values(argv):
    # argparse reads "--beta -1,0,1" as two options; rewrite it as "--beta=-1,0,1"
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if tok.startswith("--") and "=" not in tok and nxt is not None and _NEG.match(nxt):
            out.append(f"{tok}={nxt}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def config_from_args(args):
    cfg = ExperimentConfig()
    if args.config:
        read_config_file(args.config, cfg)
    cfg.command = args.command
    for flag, key in _FLAGS:
        value = getattr(args, flag)
        if value is not None:
            set_value(cfg, key, value)
    return cfg.validate()


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_glue_negative_values(argv))
    try:
        cfg = config_from_args(args)
        result = run_experiment(cfg)
        write_result(result, cfg.output, cfg.format)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BudgetExceeded, CapExceeded) as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ExchangeCutoffError as exc:
        # parameter combinations rejected by the library (e.g. threshold below floor)
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
