from matchcast.schemas.audit_log import RunFlag
from matchcast.schemas.davidson import BoundaryFlags, BTFit, BTParams, FitReport
from matchcast.schemas.dirichlet import DirichletParams, GridSpec, MnDir2Config, PoolWeights
from matchcast.schemas.match import (
    CountVector,
    MatchRecord,
    Outcome,
    Prediction,
    Season,
    TeamId,
    Venue,
    normalize_team_name,
)
from matchcast.schemas.poisson import (
    BivPoissonParams,
    PoissonFit,
    ScoreGrid,
    TeamStrengths,
    TrainingWindow,
)

__all__ = [
    "BivPoissonParams",
    "BoundaryFlags",
    "BTFit",
    "BTParams",
    "CountVector",
    "DirichletParams",
    "FitReport",
    "GridSpec",
    "MatchRecord",
    "MnDir2Config",
    "Outcome",
    "PoissonFit",
    "PoolWeights",
    "Prediction",
    "RunFlag",
    "ScoreGrid",
    "Season",
    "TeamId",
    "TeamStrengths",
    "TrainingWindow",
    "Venue",
    "normalize_team_name",
]
