"""Training protocol, R2 evaluation, and repeated-experiment reporting."""

from autorater.training.metrics import r_squared
from autorater.training.data import ScoreData, prepare_score_data
from autorater.training.harness import (
    EarlyStopper,
    ExperimentReport,
    RunResult,
    TrainConfig,
    learning_rate,
    repeat_experiment,
    train,
)
from autorater.training.ablation import ablation_table, ablation_to_csv

__all__ = [
    "r_squared",
    "ScoreData",
    "prepare_score_data",
    "EarlyStopper",
    "ExperimentReport",
    "RunResult",
    "TrainConfig",
    "learning_rate",
    "repeat_experiment",
    "train",
    "ablation_table",
    "ablation_to_csv",
]
