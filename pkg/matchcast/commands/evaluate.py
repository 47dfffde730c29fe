from __future__ import annotations

import argparse
import logging

from matchcast.commands.deps import common_parser, get_seasons, get_settings
from matchcast.evaluation.export import format_summary, write_evaluation
from matchcast.evaluation.harness import evaluate
from matchcast.evaluation.predictors import build_predictors

logger = logging.getLogger(__name__)


def register(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser(
        "evaluate",
        parents=[common_parser()],
        help="score every model on the second half of each season",
    )
    p.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    settings = get_settings(args)
    seasons = get_seasons(settings)
    reports = evaluate(build_predictors(settings), seasons, settings.calibration)
    write_evaluation(reports, settings.out, settings.describe())
    print(format_summary(reports), end="")
    flagged = sum(r.flagged for r in reports)
    if flagged:
        logger.warning("%d flag(s) raised, see %s", flagged, settings.out / "report.json")
    return 0
