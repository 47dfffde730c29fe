from __future__ import annotations

import numpy as np
import pytest

from matchcast.data.ingest import serialize_matches
from matchcast.data.synthetic import simulate_davidson_season
from matchcast.schemas.davidson import BTParams
from matchcast.schemas.match import Season


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20140)


@pytest.fixture
def bt_truth() -> BTParams:
    return BTParams.normalized({"a": 0.4, "b": 0.3, "c": 0.2, "d": 0.1}, gamma=1.5, nu=0.8)


@pytest.fixture
def six_team_truth() -> BTParams:
    return BTParams.normalized(
        {"alfa": 0.3, "beta": 0.22, "gama": 0.18, "delta": 0.13, "eps": 0.1, "zeta": 0.07},
        gamma=1.4,
        nu=0.7,
    )


@pytest.fixture
def davidson_season(bt_truth: BTParams) -> Season:
    return simulate_davidson_season(bt_truth, np.random.default_rng(7), 2014)


@pytest.fixture
def two_seasons(six_team_truth: BTParams) -> list[Season]:
    return [
        simulate_davidson_season(six_team_truth, np.random.default_rng(11 + k), 2013 + k)
        for k in range(2)
    ]


@pytest.fixture
def matches_csv(tmp_path, two_seasons):
    path = tmp_path / "matches.csv"
    path.write_text(
        serialize_matches(m for s in two_seasons for m in s.matches),
        encoding="utf-8",
    )
    return path

