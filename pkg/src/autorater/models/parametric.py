"""MLP regressor over encoded parametric vectors.

Two hidden layers: the first as wide as the input, the second 100 wide,
with dropout after the first hidden layer and ReLU activations
throughout, including the score head. The 100-d second hidden activation
is the embedding used for fusion.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from autorater.models.common import seeded


@dataclass
class ParametricNetConfig:
    input_dim: int
    hidden1: int | None = None  # defaults to input_dim
    hidden2: int = 100
    dropout_p: float = 0.25

    def __post_init__(self) -> None:
        if self.hidden1 is None:
            self.hidden1 = self.input_dim
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError(f"dropout_p must be in [0, 1), got {self.dropout_p}")
        if self.input_dim < 1:
            raise ValueError("input_dim must be positive")

    def to_json(self) -> dict:
        return {"input_dim": self.input_dim, "hidden1": self.hidden1, "hidden2": self.hidden2, "dropout_p": self.dropout_p}


class ParametricNet(nn.Module):
    input_keys = ("parametric",)
    modality = "parametric"

    def __init__(self, config: ParametricNetConfig, init_seed: int = 0, head_bias: float = 5.0):
        super().__init__()
        self.config = config
        with seeded(init_seed):
            self.fc1 = nn.Linear(config.input_dim, config.hidden1)
            self.drop = nn.Dropout(config.dropout_p)
            self.fc2 = nn.Linear(config.hidden1, config.hidden2)
            self.head = nn.Linear(config.hidden2, 1)
        with torch.no_grad():
            # a mid-scale starting bias keeps the ReLU score head alive
            self.head.bias.fill_(head_bias)

    @property
    def embedding_dim(self) -> int:
        return self.config.hidden2

    def embed(self, parametric: torch.Tensor) -> torch.Tensor:
        if parametric.shape[-1] != self.config.input_dim:
            raise ValueError(f"expected input width {self.config.input_dim}, got {parametric.shape[-1]}")
        h = torch.relu(self.fc1(parametric))
        h = self.drop(h)
        return torch.relu(self.fc2(h))

    def forward(self, parametric: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        emb = self.embed(parametric)
        score = torch.relu(self.head(emb)).squeeze(-1)
        return emb, score
