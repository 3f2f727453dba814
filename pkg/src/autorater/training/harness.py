"""Mini-batch training with exponential LR decay and patience-based stopping.

The protocol: batches of 32, squared-error loss, an adaptive
moment-estimation optimizer, learning rate lr0 * exp(-r * t) with t the
zero-based epoch index, and early stopping once the best validation loss
has not strictly improved (by more than 1e-6) for ``patience`` consecutive
epochs. The best-validation weights are restored before test evaluation,
and every experiment is repeated over consecutive seeds on one shared
split per (score, comparison group).
"""

from __future__ import annotations

import copy
import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import torch
from torch import nn

from autorater.corpus.splits import SplitAssignment
from autorater.models.common import weights_hash
from autorater.training.data import ScoreData
from autorater.training.metrics import r_squared

LR_RANGE = (5e-5, 1e-3)
DECAY_RANGE = (0.0, 0.015)


@dataclass
class TrainConfig:
    batch_size: int = 32
    lr0: float = 1e-3
    decay_r: float = 0.0
    patience: int = 20
    max_epochs: int = 200
    seed: int = 0
    target_score: str = "total"
    loss: str = "squared_error"
    min_improvement: float = 1e-6

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if not LR_RANGE[0] <= self.lr0 <= LR_RANGE[1]:
            raise ValueError(f"lr0 must lie in {LR_RANGE}, got {self.lr0}")
        if not DECAY_RANGE[0] <= self.decay_r <= DECAY_RANGE[1]:
            raise ValueError(f"decay_r must lie in {DECAY_RANGE}, got {self.decay_r}")
        if self.loss != "squared_error":
            raise ValueError("only squared_error loss is supported")

    def to_json(self) -> dict:
        return {
            "batch_size": self.batch_size,
            "lr0": self.lr0,
            "decay_r": self.decay_r,
            "patience": self.patience,
            "max_epochs": self.max_epochs,
            "seed": self.seed,
            "target_score": self.target_score,
            "loss": self.loss,
        }


def learning_rate(config: TrainConfig, epoch: int) -> float:
    """lr(t) = lr0 * exp(-r * t); the first epoch is t = 0."""
    return config.lr0 * math.exp(-config.decay_r * epoch)


class EarlyStopper:
    """Patience rule: stop after ``patience`` consecutive epochs without a
    strict best-loss improvement greater than ``min_improvement``."""

    def __init__(self, patience: int, min_improvement: float = 1e-6):
        self.patience = patience
        self.min_improvement = min_improvement
        self.best = math.inf
        self.best_epoch = -1
        self.stale = 0
        self._epoch = -1

    def update(self, val_loss: float) -> str:
        """Feed one epoch's validation loss; returns improved | wait | stop."""
        self._epoch += 1
        if val_loss < self.best - self.min_improvement:
            self.best = val_loss
            self.best_epoch = self._epoch
            self.stale = 0
            return "improved"
        self.stale += 1
        return "stop" if self.stale >= self.patience else "wait"


@dataclass
class RunResult:
    seed: int
    train_losses: list[float]
    val_losses: list[float]
    best_epoch: int  # zero-based index into the loss lists
    test_r2: float
    best_weights_hash: str
    eval_weights_hash: str
    test_preds: np.ndarray | None = None

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "train_losses": self.train_losses,
            "val_losses": self.val_losses,
            "best_epoch": self.best_epoch,
            "test_r2": self.test_r2,
            "best_weights_hash": self.best_weights_hash,
            "eval_weights_hash": self.eval_weights_hash,
        }


def _batched_scores(model: nn.Module, data: ScoreData, idx: torch.Tensor, batch_size: int = 256) -> torch.Tensor:
    outs = []
    with torch.no_grad():
        for start in range(0, len(idx), batch_size):
            chunk = idx[start : start + batch_size]
            _, score = model(**data.gather(model, chunk))
            outs.append(score)
    return torch.cat(outs)


def train(
    model: nn.Module,
    data: ScoreData,
    split: SplitAssignment,
    config: TrainConfig,
    deterministic: bool = False,
) -> RunResult:
    """Train ``model`` on the split's train ids, early-stop on val loss,
    restore the best-val weights, and evaluate test R^2 with them."""
    if split.score_name != config.target_score:
        raise ValueError(f"split is for {split.score_name!r} but config targets {config.target_score!r}")
    idx_train, idx_val, idx_test = data.split_indices(split)
    if len(idx_train) == 0 or len(idx_val) == 0 or len(idx_test) == 0:
        raise ValueError("empty split partition")
    y = data.labels
    if torch.isnan(y[torch.cat([idx_train, idx_val, idx_test])]).any():
        raise ValueError(f"split contains records without a {config.target_score!r} label")

    prev_threads = torch.get_num_threads()
    if deterministic:
        torch.set_num_threads(1)
    try:
        torch.manual_seed(config.seed)
        gen = torch.Generator().manual_seed(config.seed)
        optimizer = torch.optim.Adam(model.parameters(), lr=config.lr0)
        stopper = EarlyStopper(config.patience, config.min_improvement)
        train_losses: list[float] = []
        val_losses: list[float] = []
        best_state = None

        for epoch in range(config.max_epochs):
            lr = learning_rate(config, epoch)
            for group in optimizer.param_groups:
                group["lr"] = lr

            model.train()
            perm = idx_train[torch.randperm(len(idx_train), generator=gen)]
            epoch_loss = 0.0
            for start in range(0, len(perm), config.batch_size):
                batch = perm[start : start + config.batch_size]
                optimizer.zero_grad(set_to_none=True)
                _, score = model(**data.gather(model, batch))
                loss = ((score - y[batch]) ** 2).mean()
                if not torch.isfinite(loss):
                    raise RuntimeError(f"non-finite training loss at epoch {epoch}: {loss.item()}")
                loss.backward()
                optimizer.step()
                epoch_loss += loss.item() * len(batch)
            train_losses.append(epoch_loss / len(perm))

            model.eval()
            val_preds = _batched_scores(model, data, idx_val)
            val_loss = float(((val_preds - y[idx_val]) ** 2).mean())
            if not math.isfinite(val_loss):
                raise RuntimeError(f"non-finite validation loss at epoch {epoch}")
            val_losses.append(val_loss)

            verdict = stopper.update(val_loss)
            if verdict == "improved":
                best_state = copy.deepcopy(model.state_dict())
            elif verdict == "stop":
                break

        assert best_state is not None
        model.load_state_dict(best_state)
        best_hash = weights_hash(model)

        model.eval()
        test_preds = _batched_scores(model, data, idx_test)
        test = r_squared(test_preds.numpy(), y[idx_test].numpy())
        return RunResult(
            seed=config.seed,
            train_losses=train_losses,
            val_losses=val_losses,
            best_epoch=stopper.best_epoch,
            test_r2=test,
            best_weights_hash=best_hash,
            eval_weights_hash=weights_hash(model),
            test_preds=test_preds.numpy(),
        )
    finally:
        torch.set_num_threads(prev_threads)


@dataclass
class ExperimentReport:
    model_name: str
    score_name: str
    n_repeats: int
    mean_r2: float
    std_r2: float
    stderr_r2: float
    runs: list[RunResult] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "model_name": self.model_name,
            "score_name": self.score_name,
            "n_repeats": self.n_repeats,
            "mean_r2": self.mean_r2,
            "std_r2": self.std_r2,
            "stderr_r2": self.stderr_r2,
            "runs": [r.to_json() for r in self.runs],
        }


def repeat_experiment(
    model_factory: Callable[[int], nn.Module],
    data: ScoreData,
    split: SplitAssignment,
    config: TrainConfig,
    n: int = 10,
    model_name: str = "model",
) -> ExperimentReport:
    """Run ``n`` training repeats with seeds seed+0..n-1 on the shared split.

    ``model_factory`` receives the run seed and returns a fresh model, so
    every repeat re-initializes independently while all repeats (and all
    models compared on this score) see identical data partitions.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    runs = []
    for i in range(n):
        run_config = dataclasses.replace(config, seed=config.seed + i)
        model = model_factory(run_config.seed)
        runs.append(train(model, data, split, run_config))
    r2s = np.array([r.test_r2 for r in runs], dtype=np.float64)
    return ExperimentReport(
        model_name=model_name,
        score_name=split.score_name,
        n_repeats=n,
        mean_r2=float(r2s.mean()),
        std_r2=float(r2s.std()),
        stderr_r2=float(r2s.std() / math.sqrt(n)),
        runs=runs,
    )
