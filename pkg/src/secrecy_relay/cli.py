"""Command-line entry point: ``secrecy-relay <command> [options]``.

Commands map onto config modes::

    rate          awgn-rate
    sweep         awgn-sweep
    fading-sweep  awgn-fading-sweep
    dmc           dmc-point
    dmc-search    dmc-search

Without ``--config`` each command starts from the bundled defaults (the
relay-position sweep setup for the AWGN commands).  Exit status: 0 on
success, 2 for configuration errors, 3 for numerical or infeasibility
errors, 4 for I/O errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import experiment
from ._version import __version__
from .errors import (
    BudgetExceededError,
    ContractError,
    GeometryError,
    InfeasibleError,
    NumericalDomainError,
    SecrecyRelayError,
    ValidationError,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

COMMANDS = {
    "rate": "awgn-rate",
    "sweep": "awgn-sweep",
    "fading-sweep": "awgn-fading-sweep",
    "dmc": "dmc-point",
    "dmc-search": "dmc-search",
}

HELP = {
    "rate": "all AWGN rates at one operating point",
    "sweep": "AWGN rates versus relay position",
    "fading-sweep": "phase-fading Monte-Carlo sweep",
    "dmc": "evaluate one input design on a discrete channel",
    "dmc-search": "grid-search input distributions on a discrete channel",
}


def _strategy_list(text: str) -> list:
    items = [s.strip() for s in text.split(",") if s.strip()]
    if not items:
        raise argparse.ArgumentTypeError("empty strategy list")
    return items


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="secrecy-relay",
        description="Secrecy rates of the relay-eavesdropper channel.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name in COMMANDS:
        p = sub.add_parser(name, help=HELP[name], description=HELP[name])
        p.add_argument("--config", help="JSON config file (bundled:<name> for shipped ones)")
        p.add_argument("--seed", type=int, help="override mc.seed")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), dest="fmt", help="output format")
        p.add_argument(
            "--strategies", type=_strategy_list,
            help="comma-separated strategy names, e.g. df,nf,af",
        )
        p.add_argument(
            "--print-config", action="store_true",
            help="print the resolved config and exit",
        )
        if name in ("dmc", "dmc-search"):
            p.add_argument("--channel", help="channel tensor file (overrides dmc.channel)")
        if name == "dmc-search":
            p.add_argument("--k", type=int, help="grid denominator (overrides dmc.k)")
        if name == "fading-sweep":
            p.add_argument("--draws", type=int, help="override mc.draws")
    return parser


def _resolve(args) -> experiment.ExperimentConfig:
    mode = COMMANDS[args.command]
    if args.config:
        cfg = experiment.load_config(args.config)
        raw = cfg.doc
        base = cfg.base_dir
    else:
        raw = {"mode": mode}
        if mode == "awgn-fading-sweep":
            raw["topology"] = {"phase_model": "uniform-phase"}
            raw["strategies"] = ["wiretap", "df", "nf"]
        base = "."
    raw = dict(raw, mode=mode)
    if getattr(args, "channel", None):
        raw["dmc"] = dict(raw.get("dmc", {}), channel=args.channel)
    if getattr(args, "k", None) is not None:
        raw["dmc"] = dict(raw.get("dmc", {}), k=args.k)
    if getattr(args, "draws", None) is not None:
        raw["mc"] = dict(raw.get("mc", {}), draws=args.draws)
    cfg = experiment.ExperimentConfig.from_dict(raw, base)
    return cfg.with_overrides(
        seed=args.seed, out=args.out, fmt=args.fmt, strategies=args.strategies
    )


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, (ValidationError, ContractError, GeometryError)):
        return EXIT_CONFIG
    if isinstance(exc, (NumericalDomainError, InfeasibleError, BudgetExceededError)):
        return EXIT_NUMERICAL
    if isinstance(exc, OSError):
        return EXIT_IO
    if isinstance(exc, SecrecyRelayError):
        return EXIT_NUMERICAL
    raise exc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
        if args.print_config:
            sys.stdout.write(cfg.canonical_json())
            return EXIT_OK
        result = experiment.run(cfg)
        fmt = cfg.doc["output"]["format"]
        if isinstance(result, dict):
            data = experiment.emit_report(result, fmt)
        else:
            data = experiment.emit(result, fmt)
            for flag in result.flags:
                print(f"warning: x={flag['x']} {flag['column']}: {flag['error']}", file=sys.stderr)
        path = cfg.doc["output"]["path"]
        if path:
            experiment.write_output(data, path)
        else:
            sys.stdout.buffer.write(data)
            sys.stdout.flush()
    except (SecrecyRelayError, OSError) as exc:
        code = _exit_code(exc)
        print(f"error: {exc}", file=sys.stderr)
        return code
    except json.JSONDecodeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
