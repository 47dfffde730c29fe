from __future__ import annotations

import argparse
import logging
import sys
from typing import Sequence

from matchcast import __version__
from matchcast.commands import evaluate, predict, selftest, validate
from matchcast.commands.deps import get_settings
from matchcast.core.errors import MatchcastError

logger = logging.getLogger("matchcast")

# Commands
COMMANDS = (validate, predict, evaluate, selftest)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matchcast",
        description="Football outcome predictors (Dirichlet, Davidson-BT, Poisson) and their evaluation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    for command in COMMANDS:
        command.register(sub)
    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    if args.verbose >= 2:
        level = logging.DEBUG
    elif args.verbose == 1:
        level = logging.INFO
    else:
        level = logging.getLevelName(get_settings(args).log_level.upper())
        if not isinstance(level, int):
            level = logging.WARNING
    logging.basicConfig(
        level=level,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "handler", None) is None:
        parser.print_help(sys.stderr)
        return 2
    try:
        _configure_logging(args)
        return args.handler(args)
    except MatchcastError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
