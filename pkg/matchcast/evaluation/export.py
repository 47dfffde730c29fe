from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import pandas as pd

from matchcast.core.excel import make_workbook
from matchcast.evaluation.harness import comparison_rows, pairwise_agreement
from matchcast.schemas.reports import ModelReport

logger = logging.getLogger(__name__)

SCORE_COLUMNS = [
    "model", "season", "matchday", "home", "away",
    "p1", "p2", "p3", "outcome", "brier", "log", "spherical",
]

PREDICTION_COLUMNS = ["model", "season", "matchday", "home", "away", "p1", "p2", "p3", "status"]


def sanitize(obj: Any) -> Any:
    """NaN/inf -> None, чтобы JSON оставался строгим."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    return obj


def report_document(reports: Sequence[ModelReport]) -> dict[str, Any]:
    # порядок моделей = порядок --models
    return {r.model: sanitize(r.to_json_dict()) for r in reports}


def render_report_json(reports: Sequence[ModelReport]) -> str:
    return json.dumps(report_document(reports), indent=2, allow_nan=False, ensure_ascii=False) + "\n"


def _csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, lineterminator="\n")


# ---------- FRAMES ----------
def scores_frame(reports: Iterable[ModelReport]) -> pd.DataFrame:
    rows = [
        {
            "model": r.model,
            "season": s.match.season,
            "matchday": s.match.matchday,
            "home": s.match.home,
            "away": s.match.away,
            "p1": s.prediction.p1,
            "p2": s.prediction.p2,
            "p3": s.prediction.p3,
            "outcome": int(s.outcome),
            "brier": s.brier,
            "log": s.log,
            "spherical": s.spherical,
        }
        for r in reports
        for s in r.per_match
    ]
    return pd.DataFrame(rows, columns=SCORE_COLUMNS)


def comparisons_frame(reports: Sequence[ModelReport]) -> pd.DataFrame:
    rows = []
    for i, a in enumerate(reports):
        for b in reports[i + 1 :]:
            rows.extend(comparison_rows(a, b))
    columns = [
        "model_a", "model_b", "season", "matchday", "home", "away",
        "brier_a", "brier_b", "log_a", "log_b", "spherical_a", "spherical_b", "same_top_choice",
    ]
    return pd.DataFrame(rows, columns=columns)


def agreement_frame(reports: Sequence[ModelReport]) -> pd.DataFrame:
    return pd.DataFrame(
        [c.model_dump() for c in pairwise_agreement(reports)],
        columns=[
            "model_a", "model_b", "n", "agreement",
            "mean_brier_diff", "mean_log_diff", "mean_spherical_diff",
        ],
    )


def summary_frame(reports: Iterable[ModelReport]) -> pd.DataFrame:
    rows = []
    for r in reports:
        rows.append({
            "model": r.model,
            "n": r.n_matches,
            "brier": r.brier.mean,
            "brier_se": r.brier.se,
            "log": r.log.mean,
            "log_se": r.log.se,
            "spherical": r.spherical.mean,
            "spherical_se": r.spherical.se,
            "errors": r.proportion_of_errors,
            "chi2": r.gof.statistic if r.gof else None,
            "df": r.gof.df if r.gof else None,
            "p_value": r.gof.p_value if r.gof else None,
            "flagged": r.flagged,
        })
    frame = pd.DataFrame(rows)
    frame["df"] = frame["df"].astype("Int64")
    return frame


def per_season_frame(reports: Iterable[ModelReport]) -> pd.DataFrame:
    rows = []
    for r in reports:
        for b in r.per_season:
            rows.append({
                "model": r.model,
                "season": b.season,
                "n": b.n,
                "brier": b.brier.mean,
                "log": b.log.mean,
                "spherical": b.spherical.mean,
                "errors": b.proportion_of_errors,
                "chi2": b.gof.statistic if b.gof else None,
                "df": b.gof.df if b.gof else None,
                "p_value": b.gof.p_value if b.gof else None,
            })
    frame = pd.DataFrame(rows)
    if not frame.empty:
        frame["df"] = frame["df"].astype("Int64")
    return frame


def calibration_frame(reports: Iterable[ModelReport]) -> pd.DataFrame:
    rows = []
    for r in reports:
        if r.calibration is None:
            continue
        for table in (r.calibration.binned, r.calibration.smoothed):
            for p in table.points:
                rows.append({"model": r.model, "method": table.method, **p.model_dump()})
    return pd.DataFrame(rows)


def distribution_frame(reports: Iterable[ModelReport]) -> pd.DataFrame:
    rows = []
    for r in reports:
        for name, d in (("entropy", r.entropy), ("cond_home_win", r.cond_home_win)):
            if d is not None:
                rows.append({"model": r.model, "quantity": name, **d.model_dump()})
    return pd.DataFrame(rows)


def _sheet(frame: pd.DataFrame) -> tuple[list[str], list[list[Any]]]:
    rows = [
        [None if pd.isna(v) else v for v in row]
        for row in frame.itertuples(index=False)
    ]
    return list(frame.columns), sanitize(rows)


def render_workbook(reports: Sequence[ModelReport]) -> bytes:
    return make_workbook({
        "summary": _sheet(summary_frame(reports)),
        "per_season": _sheet(per_season_frame(reports)),
        "calibration": _sheet(calibration_frame(reports)),
        "distributions": _sheet(distribution_frame(reports)),
        "agreement": _sheet(agreement_frame(reports)),
    })


# ---------- OUTPUT ----------
def write_evaluation(reports: Sequence[ModelReport], out_dir: Path, run_cfg: str) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {
        "report.json": render_report_json(reports),
        "scores.csv": _csv(scores_frame(reports)),
        "comparisons.csv": _csv(comparisons_frame(reports)),
        "run.cfg": run_cfg,
    }
    written = []
    for name, text in files.items():
        path = out_dir / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    xlsx = out_dir / "summary.xlsx"
    xlsx.write_bytes(render_workbook(reports))
    written.append(xlsx)
    logger.info("wrote %s", ", ".join(p.name for p in written))
    return written


def render_predictions(rows: Iterable[dict[str, Any]]) -> str:
    return _csv(pd.DataFrame(list(rows), columns=PREDICTION_COLUMNS))


def format_summary(reports: Sequence[ModelReport]) -> str:
    """Таблица для терминала: средние баллы, доля ошибок, хи-квадрат по моделям и по сезонам."""
    summary = summary_frame(reports)
    cols = ["model", "n", "brier", "log", "spherical", "errors", "chi2", "df", "p_value", "flagged"]
    text = summary[cols].to_string(index=False, float_format=lambda v: f"{v:.4f}", na_rep="-")
    seasons = per_season_frame(reports)
    if not seasons.empty:
        text += "\n\nper season\n" + seasons.to_string(
            index=False, float_format=lambda v: f"{v:.4f}", na_rep="-"
        )
    return text + "\n"
