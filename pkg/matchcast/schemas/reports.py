from __future__ import annotations

import math
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field

from matchcast.schemas.audit_log import RunFlag
from matchcast.schemas.match import MatchRecord, Outcome, Prediction


# ---------- PER MATCH ----------
class ScoredMatch(BaseModel):
    model_config = ConfigDict(frozen=True)

    match: MatchRecord
    prediction: Prediction
    outcome: Outcome
    brier: float
    log: float
    spherical: float
    top_choice_error: int = Field(ge=0, le=1)
    argmax_tie: bool = False
    entropy: float
    cond_home_win: float | None = None


# ---------- AGGREGATES ----------
class ScoreSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    n_finite: int
    mean: float
    total: float
    se: float
    total_se: float
    ci_low: float
    ci_high: float
    trivial: float
    # 95% интервал для среднего не содержит балл тривиального прогноза
    excludes_trivial: bool


class DistributionSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    mean: float
    min: float
    q1: float
    median: float
    q3: float
    max: float


# ---------- CALIBRATION ----------
class CalibrationPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    prob: float
    observed: float
    expected: float
    n_eff: float
    lower: float
    upper: float
    band_lower: float
    band_upper: float

    @property
    def inside_band(self) -> bool:
        return self.band_lower <= self.observed <= self.band_upper


class CalibrationTable(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: Literal["binned", "smoothed"]
    level: float
    simultaneous: bool = False
    bandwidth: float | None = None
    points: list[CalibrationPoint]

    @property
    def fraction_inside_band(self) -> float:
        if not self.points:
            return 0.0
        return sum(p.inside_band for p in self.points) / len(self.points)


class CalibrationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_pairs: int
    binned: CalibrationTable
    smoothed: CalibrationTable


# ---------- GOODNESS OF FIT ----------
class GofResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    statistic: float
    df: int
    p_value: float
    n_teams: int
    excluded: list[str] = Field(default_factory=list)


# ---------- REPORT ----------
class SelectedConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    season: int
    w: float
    alpha: float


class SeasonBreakdown(BaseModel):
    model_config = ConfigDict(frozen=True)

    season: int
    n: int
    brier: ScoreSummary
    log: ScoreSummary
    spherical: ScoreSummary
    proportion_of_errors: float
    gof: GofResult | None = None


class ModelReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    model: str
    per_match: list[ScoredMatch]
    brier: ScoreSummary
    log: ScoreSummary
    spherical: ScoreSummary
    proportion_of_errors: float
    n_argmax_ties: int
    n_infinite_log: int
    entropy: DistributionSummary | None
    cond_home_win: DistributionSummary | None
    calibration: CalibrationReport | None
    gof: GofResult | None
    per_season: list[SeasonBreakdown]
    selected: list[SelectedConfig] = Field(default_factory=list)
    flags: list[RunFlag] = Field(default_factory=list)

    @property
    def n_matches(self) -> int:
        return len(self.per_match)

    @property
    def flagged(self) -> int:
        return len(self.flags)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "per_match": [
                {
                    "season": s.match.season,
                    "matchday": s.match.matchday,
                    "home": s.match.home,
                    "away": s.match.away,
                    "p1": s.prediction.p1,
                    "p2": s.prediction.p2,
                    "p3": s.prediction.p3,
                    "outcome": int(s.outcome),
                    "brier": s.brier,
                    "log": s.log if math.isfinite(s.log) else None,
                    "spherical": s.spherical,
                    "top_choice_error": s.top_choice_error,
                    "argmax_tie": s.argmax_tie,
                    "entropy": s.entropy,
                    "cond_home_win": s.cond_home_win,
                }
                for s in self.per_match
            ],
            "aggregates": {
                "n": self.n_matches,
                "brier": self.brier.model_dump(mode="json"),
                "log": self.log.model_dump(mode="json"),
                "spherical": self.spherical.model_dump(mode="json"),
                "proportion_of_errors": self.proportion_of_errors,
                "n_argmax_ties": self.n_argmax_ties,
                "n_infinite_log": self.n_infinite_log,
                "entropy": self.entropy.model_dump(mode="json") if self.entropy else None,
                "cond_home_win": (
                    self.cond_home_win.model_dump(mode="json") if self.cond_home_win else None
                ),
                "per_season": [b.model_dump(mode="json") for b in self.per_season],
                "selected": [
                    {"season": c.season, "w": round(c.w, 6), "alpha": round(c.alpha, 6)}
                    for c in self.selected
                ],
                "flagged": self.flagged,
            },
            "calibration": self.calibration.model_dump(mode="json") if self.calibration else None,
            "gof": self.gof.model_dump(mode="json") if self.gof else None,
            "flags": [f.model_dump(mode="json") for f in self.flags],
        }


class PairwiseComparison(BaseModel):
    model_config = ConfigDict(frozen=True)

    model_a: str
    model_b: str
    n: int
    agreement: float
    mean_brier_diff: float
    mean_log_diff: float
    mean_spherical_diff: float
