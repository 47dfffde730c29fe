from __future__ import annotations

import argparse
import sys

from matchcast.commands.deps import common_parser, get_settings
from matchcast.core.errors import ConfigError
from matchcast.data.ingest import FULL_SEASON_MATCHES, validate_matches


def register(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser(
        "validate",
        parents=[common_parser()],
        help="check the match CSV: schema, duplicate fixtures, season completeness",
    )
    p.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    settings = get_settings(args)
    if settings.matches is None:
        raise ConfigError("no match file: pass --matches or set `matches` in the config")
    try:
        text = settings.matches.read_text(encoding="utf-8-sig")
    except OSError as e:
        raise ConfigError(f"cannot read {settings.matches}: {e}") from e

    summary = validate_matches(text)
    for issue in summary.issues:
        print(f"{settings.matches}:{issue.line}: {issue.message}", file=sys.stderr)

    problems = len(summary.issues)
    for s in summary.seasons:
        state = "complete season" if s.complete else "incomplete season"
        print(
            f"season {s.year}: {s.teams} teams, {s.matches} matches "
            f"({s.played} played), {s.rounds} rounds - {state}"
        )
        if settings.evaluation.strict and s.matches != FULL_SEASON_MATCHES:
            print(f"  strict mode expects {FULL_SEASON_MATCHES} matches", file=sys.stderr)
            problems += 1
        if s.scheduled_first_half:
            print(f"  scheduled in first half: {', '.join(s.scheduled_first_half)}")
        if s.scheduled_second_half:
            print(f"  scheduled in second half: {s.scheduled_second_half} match(es)")
    return 1 if problems else 0
