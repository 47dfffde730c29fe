from __future__ import annotations

import argparse
import logging

from matchcast.core.config import Settings, load_settings
from matchcast.core.errors import ConfigError
from matchcast.data.ingest import build_seasons, read_matches
from matchcast.schemas.match import MatchRecord, Season

logger = logging.getLogger(__name__)


def common_parser() -> argparse.ArgumentParser:
    """Флаги, общие для всех подкоманд."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--matches", help="match CSV: season,matchday,home,away,home_goals,away_goals")
    common.add_argument("--models", help="comma-separated: mn-dir1,mn-dir2,bt,poisson-lee,poisson-biv,trivial,external:<path>")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="seed for every random stream")
    common.add_argument("--config", help="key=value config file (falls back to $MATCHCAST_CONFIG)")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    return common


def get_settings(args: argparse.Namespace) -> Settings:
    overrides = {
        "matches": getattr(args, "matches", None),
        "models": getattr(args, "models", None),
        "out": getattr(args, "out", None),
        "seed": getattr(args, "seed", None),
    }
    return load_settings(getattr(args, "config", None), overrides)


def get_matches(settings: Settings) -> list[MatchRecord]:
    if settings.matches is None:
        raise ConfigError("no match file: pass --matches or set `matches` in the config")
    if not settings.matches.is_file():
        raise ConfigError(f"match file not found: {settings.matches}")
    return read_matches(settings.matches)


def get_seasons(settings: Settings) -> list[Season]:
    seasons = build_seasons(get_matches(settings), strict=settings.evaluation.strict)
    logger.info("loaded %d season(s) from %s", len(seasons), settings.matches)
    return seasons
