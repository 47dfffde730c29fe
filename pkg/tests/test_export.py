import json
import math

import pandas as pd
import pytest
from openpyxl import load_workbook

from matchcast.evaluation.export import (
    PREDICTION_COLUMNS,
    SCORE_COLUMNS,
    format_summary,
    render_predictions,
    render_report_json,
    sanitize,
    write_evaluation,
)
from matchcast.evaluation.harness import evaluate
from matchcast.evaluation.predictors import MnDir1Predictor, MnDir2Predictor, TrivialPredictor
from matchcast.schemas.match import Prediction


class Overconfident:
    name = "sure-home"

    def predict(self, view, trail=None):
        return {m.key: Prediction(p1=1.0, p2=0.0, p3=0.0) for m in view.fixtures()}


@pytest.fixture
def reports(two_seasons):
    return evaluate([TrivialPredictor(), MnDir1Predictor(), Overconfident()], two_seasons)


def test_sanitize():
    assert sanitize({"a": [1.0, math.nan, (math.inf, 2)]}) == {"a": [1.0, None, [None, 2]]}


def test_report_json_is_strict_and_ordered(reports):
    doc = json.loads(render_report_json(reports))
    assert list(doc) == ["trivial", "mn-dir1", "sure-home"]
    sure = doc["sure-home"]
    assert sure["aggregates"]["n_infinite_log"] > 0
    assert any(row["log"] is None for row in sure["per_match"])
    assert "INFINITE_LOG_SCORE" in [f["action"] for f in sure["flags"]]
    assert doc["trivial"]["aggregates"]["brier"]["mean"] == pytest.approx(2 / 3)


def test_write_evaluation(tmp_path, reports):
    written = write_evaluation(reports, tmp_path / "out", "seed=1\n")
    assert sorted(p.name for p in written) == [
        "comparisons.csv", "report.json", "run.cfg", "scores.csv", "summary.xlsx",
    ]
    scores = pd.read_csv(tmp_path / "out" / "scores.csv")
    assert list(scores.columns) == SCORE_COLUMNS
    assert len(scores) == 3 * 30
    comparisons = pd.read_csv(tmp_path / "out" / "comparisons.csv")
    assert set(zip(comparisons.model_a, comparisons.model_b)) == {
        ("trivial", "mn-dir1"), ("trivial", "sure-home"), ("mn-dir1", "sure-home"),
    }
    book = load_workbook(tmp_path / "out" / "summary.xlsx")
    assert book.sheetnames == ["summary", "per_season", "calibration", "distributions", "agreement"]
    assert book["summary"]["A1"].value == "model"
    assert book["summary"]["A2"].value == "trivial"


def test_reports_are_reproducible(two_seasons):
    one = render_report_json(evaluate([MnDir1Predictor()], two_seasons))
    two = render_report_json(evaluate([MnDir1Predictor()], two_seasons))
    assert one == two


def test_render_predictions_keeps_full_precision():
    rows = [
        {"model": "bt", "season": 2014, "matchday": 20, "home": "a", "away": "b",
         "p1": 1 / 3, "p2": 0.5, "p3": 1 / 6, "status": "ok"},
        {"model": "x", "season": 2014, "matchday": 20, "home": "a", "away": "b",
         "p1": None, "p2": None, "p3": None, "status": "failed"},
    ]
    text = render_predictions(rows)
    lines = text.splitlines()
    assert lines[0] == ",".join(PREDICTION_COLUMNS)
    assert float(lines[1].split(",")[5]) == 1 / 3
    assert lines[2].endswith(",,,failed")


def test_format_summary_lists_models_and_seasons(reports):
    text = format_summary(reports)
    for name in ("trivial", "mn-dir1", "sure-home", "per season", "2013", "2014"):
        assert name in text


def test_selected_configs_are_numbers(two_seasons):
    predictor = MnDir2Predictor()
    [report] = evaluate([predictor], two_seasons)
    rows = json.loads(render_report_json([report]))["mn-dir2"]["aggregates"]["selected"]
    assert [r["season"] for r in rows] == [2013, 2014]
    for row, cfg in zip(rows, predictor.selected):
        assert isinstance(row["w"], float) and isinstance(row["alpha"], float)
        assert row["w"] == pytest.approx(cfg.w, abs=5e-7)
        assert row["alpha"] == pytest.approx(cfg.alpha, abs=5e-7)
