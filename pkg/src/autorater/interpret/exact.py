"""Exact Shapley values by full coalition enumeration.

Verification oracle for the sampling estimator: computes the classic
Shapley value over feature coalitions with a mean-imputation value
function, v(S) = f(x with features outside S replaced by the background
mean). Cost is 2^d model evaluations, so the input dimension is capped.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

MAX_DIM = 15


def exact_shapley(
    f: Callable[[np.ndarray], np.ndarray],
    background: np.ndarray,
    x: np.ndarray,
) -> np.ndarray:
    """Shapley values of f at x against the background-mean baseline.

    ``f`` maps a (K, d) batch to (K,) outputs. All 2^d imputed inputs are
    evaluated in one batch; phi_i sums the weighted marginal contributions
    of feature i over every coalition not containing it.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    background = np.asarray(background, dtype=np.float64)
    if background.ndim == 1:
        background = background[None, :]
    d = x.shape[0]
    if d > MAX_DIM:
        raise ValueError(f"exact enumeration supports at most {MAX_DIM} features, got {d}")
    baseline = background.mean(axis=0)

    n_subsets = 1 << d
    masks = ((np.arange(n_subsets)[:, None] >> np.arange(d)[None, :]) & 1).astype(bool)
    inputs = np.where(masks, x[None, :], baseline[None, :])
    values = np.asarray(f(inputs), dtype=np.float64).reshape(n_subsets)

    # weight for a coalition of size s (excluding the feature): s!(d-s-1)!/d!
    weight = np.array([math.factorial(s) * math.factorial(d - s - 1) / math.factorial(d) for s in range(d)])

    sizes = masks.sum(axis=1)
    phi = np.zeros(d)
    for i in range(d):
        without = ~masks[:, i]
        idx_without = np.nonzero(without)[0]
        idx_with = idx_without | (1 << i)
        phi[i] = np.sum(weight[sizes[idx_without]] * (values[idx_with] - values[idx_without]))
    return phi
