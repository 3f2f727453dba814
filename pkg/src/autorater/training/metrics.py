"""Regression metrics."""

from __future__ import annotations

import numpy as np


def r_squared(preds, labels) -> float:
    """Determination coefficient: 1 - SS_res / SS_tot about the label mean.

    Undefined (raises) when the labels are all identical.
    """
    preds = np.asarray(preds, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if preds.shape != labels.shape or preds.size == 0:
        raise ValueError(f"preds and labels must be equal nonzero length, got {preds.shape} vs {labels.shape}")
    ss_tot = float(((labels - labels.mean()) ** 2).sum())
    if ss_tot == 0.0:
        raise ValueError("R^2 is undefined: labels are all identical")
    ss_res = float(((labels - preds) ** 2).sum())
    return 1.0 - ss_res / ss_tot
