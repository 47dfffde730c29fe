from __future__ import annotations

import logging
from pathlib import Path
from typing import Protocol, Sequence, runtime_checkable

import pandas as pd

from matchcast.core.audit import FlagTrail, log_action
from matchcast.core.config import (
    BTSettings,
    DirichletSettings,
    PoissonSettings,
    Settings,
)
from matchcast.core.errors import InsufficientDataError, PredictorError
from matchcast.data.counts import with_outcomes
from matchcast.engines.davidson import bt_rolling_fit, bt_outcome_probs
from matchcast.engines.dirichlet import DEFAULT_MN_DIR2, cv_select, predict_fixtures
from matchcast.engines.poisson import match_probs, poisson_rolling_fit
from matchcast.schemas.davidson import BTFit
from matchcast.schemas.dirichlet import MnDir2Config, PoolWeights
from matchcast.schemas.match import MatchRecord, Prediction, Season, normalize_team_name
from matchcast.schemas.poisson import PoissonFit, TrainingWindow
from matchcast.schemas.reports import SelectedConfig

logger = logging.getLogger(__name__)

MatchKey = tuple[int, int, str, str]

INTERCHANGE_COLUMNS = ["season", "matchday", "home", "away", "p1", "p2", "p3"]


class SeasonView:
    """Что видно предиктору перед туром `matchday`."""

    def __init__(self, season: Season, matchday: int, history: Sequence[Season] = ()):
        visible = [m for m in season.matches if m.matchday < matchday]
        fixtures = [m.as_fixture() for m in season.fixtures(matchday)]
        self._season = Season.from_matches(season.year, visible + fixtures, season.teams)
        self._history = tuple(s for s in history if s.year < season.year)
        self.matchday = matchday
        # длина расписания не раскрывает результатов
        self.rounds = season.rounds
        self.first_half_rounds = season.first_half_rounds

    @property
    def year(self) -> int:
        return self._season.year

    @property
    def season(self) -> Season:
        return self._season

    @property
    def history(self) -> tuple[Season, ...]:
        return self._history

    @property
    def teams(self) -> frozenset[str]:
        return self._season.teams

    def fixtures(self) -> list[MatchRecord]:
        return self._season.fixtures(self.matchday)

    def played(self) -> list[MatchRecord]:
        return self._season.played_before(self.matchday)

    def first_half_played(self) -> list[MatchRecord]:
        return [m for m in self.played() if m.matchday <= self.first_half_rounds]


@runtime_checkable
class Predictor(Protocol):
    name: str

    def predict(self, view: SeasonView, trail: FlagTrail | None = None) -> dict[MatchKey, Prediction]:
        ...


# ---------- BASELINE ----------
class TrivialPredictor:
    name = "trivial"

    def predict(self, view: SeasonView, trail: FlagTrail | None = None) -> dict[MatchKey, Prediction]:
        return {m.key: Prediction.trivial() for m in view.fixtures()}


# ---------- MULTINOMIAL-DIRICHLET ----------
class MnDir1Predictor:
    name = "mn-dir1"

    def __init__(self, settings: DirichletSettings | None = None):
        alpha = (settings or DirichletSettings()).alpha
        self.cfg = MnDir2Config(alpha=alpha, weights=PoolWeights(w_home=0.5))

    def predict(self, view: SeasonView, trail: FlagTrail | None = None) -> dict[MatchKey, Prediction]:
        return predict_fixtures(view.played(), view.fixtures(), self.cfg)


class MnDir2Predictor:
    """(w, alpha) выбираются один раз на сезон по Брайеру первой половины."""

    name = "mn-dir2"

    def __init__(self, settings: DirichletSettings | None = None):
        self.grid = (settings or DirichletSettings()).grid()
        self._selected: dict[int, MnDir2Config] = {}

    @property
    def selected(self) -> list[SelectedConfig]:
        return [
            SelectedConfig(season=year, w=cfg.w, alpha=cfg.alpha)
            for year, cfg in sorted(self._selected.items())
        ]

    def config_for(self, view: SeasonView, trail: FlagTrail | None = None) -> MnDir2Config:
        if view.year in self._selected:
            return self._selected[view.year]
        first_half = with_outcomes(view.first_half_played())
        try:
            cfg = cv_select(first_half, self.grid)
        except InsufficientDataError:
            log_action(
                trail,
                action="CV_FALLBACK",
                entity=f"{self.name}:{view.year}",
                details=f"no first-half results, using w={DEFAULT_MN_DIR2.w} alpha={DEFAULT_MN_DIR2.alpha}",
            )
            return DEFAULT_MN_DIR2
        # кэшируем только когда первая половина уже вся позади
        if view.matchday > view.first_half_rounds:
            self._selected[view.year] = cfg
        return cfg

    def predict(self, view: SeasonView, trail: FlagTrail | None = None) -> dict[MatchKey, Prediction]:
        cfg = self.config_for(view, trail)
        return predict_fixtures(view.played(), view.fixtures(), cfg)


# ---------- DAVIDSON ----------
class DavidsonPredictor:
    name = "bt"

    def __init__(self, settings: BTSettings | None = None):
        self.settings = settings or BTSettings()
        self.last_fit: BTFit | None = None

    def predict(self, view: SeasonView, trail: FlagTrail | None = None) -> dict[MatchKey, Prediction]:
        fit = bt_rolling_fit(view.season, view.matchday, self.settings, trail)
        self.last_fit = fit
        return {m.key: bt_outcome_probs(fit.params, m.home, m.away) for m in view.fixtures()}


# ---------- POISSON ----------
class PoissonPredictor:
    def __init__(
        self,
        name: str,
        correlated: bool,
        window: TrainingWindow,
        settings: PoissonSettings | None = None,
    ):
        self.name = name
        self.correlated = correlated
        self.window = window
        self.settings = settings or PoissonSettings()
        self.last_fit: PoissonFit | None = None

    @classmethod
    def lee(cls, settings: PoissonSettings | None = None) -> "PoissonPredictor":
        # независимые голы, только текущий сезон
        return cls("poisson-lee", False, TrainingWindow(kind="season"), settings)

    @classmethod
    def bivariate(cls, settings: PoissonSettings | None = None) -> "PoissonPredictor":
        settings = settings or PoissonSettings()
        return cls("poisson-biv", settings.correlated, settings.training_window, settings)

    def predict(self, view: SeasonView, trail: FlagTrail | None = None) -> dict[MatchKey, Prediction]:
        fit = poisson_rolling_fit(
            view.season,
            view.matchday,
            self.correlated,
            self.window,
            view.history,
            self.settings,
            trail,
        )
        self.last_fit = fit
        return {
            m.key: match_probs(fit.strengths, m.home, m.away, self.settings.tail_tol)
            for m in view.fixtures()
        }


# ---------- EXTERNAL ----------
def read_interchange(path: str | Path) -> dict[MatchKey, Prediction]:
    """CSV `season,matchday,home,away,p1,p2,p3` (опубликованные прогнозы сторонних сайтов)."""
    try:
        frame = pd.read_csv(path, dtype={"home": str, "away": str})
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise PredictorError(f"cannot read predictions file {path}: {e}") from e
    missing = [c for c in INTERCHANGE_COLUMNS if c not in frame.columns]
    if missing:
        raise PredictorError(f"{path}: missing columns {','.join(missing)}")
    out: dict[MatchKey, Prediction] = {}
    for row in frame[INTERCHANGE_COLUMNS].itertuples(index=False):
        try:
            key = (
                int(row.season),
                int(row.matchday),
                normalize_team_name(str(row.home)),
                normalize_team_name(str(row.away)),
            )
            p = Prediction.from_weights(float(row.p1), float(row.p2), float(row.p3))
        except ValueError as e:
            raise PredictorError(f"{path}: bad row {tuple(row)}: {e}") from e
        if key in out:
            raise PredictorError(f"{path}: duplicate prediction for {key}")
        out[key] = p
    return out


class ExternalPredictor:
    """Готовые прогнозы из файла; отсутствующий матч пропускается с флагом."""

    def __init__(self, path: str | Path, name: str | None = None):
        self.path = Path(path)
        self.name = name or f"external:{path}"
        self._table: dict[MatchKey, Prediction] | None = None

    @property
    def table(self) -> dict[MatchKey, Prediction]:
        if self._table is None:
            self._table = read_interchange(self.path)
        return self._table

    def predict(self, view: SeasonView, trail: FlagTrail | None = None) -> dict[MatchKey, Prediction]:
        out = {}
        for m in view.fixtures():
            p = self.table.get(m.key)
            if p is None:
                log_action(
                    trail,
                    action="PREDICTION_ABSENT",
                    entity=self.name,
                    details=f"{m.season}:{m.matchday}:{m.home}-{m.away}",
                )
                continue
            out[m.key] = p
        return out


def build_predictor(name: str, settings: Settings) -> Predictor:
    if name == "trivial":
        return TrivialPredictor()
    if name == "mn-dir1":
        return MnDir1Predictor(settings.dirichlet)
    if name == "mn-dir2":
        return MnDir2Predictor(settings.dirichlet)
    if name == "bt":
        return DavidsonPredictor(settings.bt)
    if name == "poisson-lee":
        return PoissonPredictor.lee(settings.poisson)
    if name == "poisson-biv":
        return PoissonPredictor.bivariate(settings.poisson)
    if name.startswith("external:"):
        return ExternalPredictor(name.split(":", 1)[1], name=name)
    raise PredictorError(f"unknown model {name!r}")


def build_predictors(settings: Settings) -> list[Predictor]:
    return [build_predictor(name, settings) for name in settings.model_list]
