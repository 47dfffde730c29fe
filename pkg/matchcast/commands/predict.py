from __future__ import annotations

import argparse
import logging
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from matchcast.commands.deps import common_parser, get_seasons, get_settings
from matchcast.core.audit import FlagTrail, log_action
from matchcast.core.errors import ConfigError, MatchcastError, NoResultError
from matchcast.engines.davidson import export_bt_fit
from matchcast.engines.poisson import export_poisson_fit
from matchcast.evaluation.export import render_predictions
from matchcast.evaluation.predictors import (
    DavidsonPredictor,
    PoissonPredictor,
    Predictor,
    SeasonView,
    build_predictors,
)
from matchcast.schemas.match import MatchRecord, Prediction, Season

logger = logging.getLogger(__name__)


def register(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser(
        "predict",
        parents=[common_parser()],
        help="predict the fixtures of one matchday from the matches before it",
    )
    p.add_argument("--matchday", type=int, required=True)
    p.add_argument("--season", type=int, help="season year (default: the latest in the file)")
    p.add_argument("--export-fits", action="store_true", help="also write fitted BT / Poisson parameters")
    p.set_defaults(handler=run)


def pick_season(seasons: list[Season], year: int | None, matchday: int) -> tuple[Season, list[Season]]:
    """Целевой сезон и более ранние (история для окна Пуассона)."""
    if not seasons:
        raise ConfigError("the match file holds no seasons")
    if year is None:
        target = seasons[-1]
    else:
        found = [s for s in seasons if s.year == year]
        if not found:
            raise ConfigError(f"season {year} is not in the match file")
        target = found[0]
    if not target.fixtures(matchday):
        raise ConfigError(f"season {target.year} has no fixtures on matchday {matchday}")
    missing = [m for m in target.matches if m.matchday < matchday and not m.is_played]
    if missing:
        first = missing[0]
        raise NoResultError(
            f"season {target.year}: {len(missing)} match(es) before matchday {matchday} "
            f"have no result, e.g. {first.matchday}:{first.home}-{first.away}"
        )
    return target, [s for s in seasons if s.year < target.year]


def _row(name: str, m: MatchRecord, p: Prediction | None, status: str) -> dict:
    return {
        "model": name,
        "season": m.season,
        "matchday": m.matchday,
        "home": m.home,
        "away": m.away,
        "p1": p.p1 if p else None,
        "p2": p.p2 if p else None,
        "p3": p.p3 if p else None,
        "status": status,
    }


def _rows(predictor: Predictor, view: SeasonView, trail: FlagTrail) -> list[dict]:
    try:
        preds = predictor.predict(view, trail)
    except (MatchcastError, ValidationError, ValueError, ArithmeticError, np.linalg.LinAlgError) as e:
        log_action(
            trail,
            action="PREDICTOR_FAILED",
            entity=f"{predictor.name}:{view.year}:{view.matchday}",
            details=str(e),
        )
        return [_row(predictor.name, m, None, "failed") for m in view.fixtures()]
    return [
        _row(predictor.name, m, preds.get(m.key), "ok" if m.key in preds else "absent")
        for m in view.fixtures()
    ]


def _export_fits(predictors: list[Predictor], out_dir: Path) -> list[Path]:
    written = []
    for predictor in predictors:
        if isinstance(predictor, DavidsonPredictor) and predictor.last_fit is not None:
            path, text = out_dir / "fit_bt.csv", export_bt_fit(predictor.last_fit)
        elif isinstance(predictor, PoissonPredictor) and predictor.last_fit is not None:
            path, text = out_dir / f"fit_{predictor.name}.csv", export_poisson_fit(predictor.last_fit)
        else:
            continue
        path.write_text(text, encoding="utf-8")
        written.append(path)
    return written


def run(args: argparse.Namespace) -> int:
    settings = get_settings(args)
    season, history = pick_season(get_seasons(settings), args.season, args.matchday)
    view = SeasonView(season, args.matchday, history)
    predictors = build_predictors(settings)

    trail = FlagTrail()
    rows = []
    for predictor in predictors:
        rows.extend(_rows(predictor, view, trail))

    text = render_predictions(rows)
    out_dir = settings.out
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "predictions.csv").write_text(text, encoding="utf-8")
    if args.export_fits:
        for path in _export_fits(predictors, out_dir):
            logger.info("wrote %s", path)
    print(text, end="")
    if len(trail):
        logger.warning("%d flag(s) raised while predicting", len(trail))
    return 0
