"""Shared model utilities: seeded init, gradient extraction, weight hashing."""

from __future__ import annotations

import contextlib
import hashlib

import torch
from torch import nn


@contextlib.contextmanager
def seeded(seed: int):
    """Run a block under a fixed torch RNG state, then restore it.

    Used to make weight initialization reproducible without disturbing the
    caller's RNG stream.
    """
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        yield


def squared_error_gradients(
    model: nn.Module, inputs: dict[str, torch.Tensor], label: float | torch.Tensor
) -> dict[str, torch.Tensor]:
    """Gradients of (score - label)^2 with respect to every parameter.

    The model is evaluated in eval mode (no dropout); parameters that do
    not influence the score get zero gradients.
    """
    was_training = model.training
    model.eval()
    model.zero_grad(set_to_none=True)
    _, score = model(**inputs)
    label_t = torch.as_tensor(label, dtype=score.dtype).reshape(score.shape)
    loss = ((score - label_t) ** 2).sum()
    loss.backward()
    grads = {
        name: (p.grad.detach().clone() if p.grad is not None else torch.zeros_like(p))
        for name, p in model.named_parameters()
    }
    model.zero_grad(set_to_none=True)
    if was_training:
        model.train()
    return grads


def finite_difference_check(
    model: nn.Module,
    inputs: dict[str, torch.Tensor],
    label: float,
    n_params: int = 25,
    h: float = 1e-6,
    seed: int = 0,
    rel_tol: float = 1e-4,
) -> float:
    """Compare analytic parameter gradients against central differences.

    Samples ``n_params`` random scalar parameter entries, perturbs each by
    +-h at double precision, and checks the relative error of the analytic
    gradient of (score - label)^2. Returns the worst relative error;
    raises AssertionError beyond ``rel_tol``. Entries where both sides are
    tiny are compared absolutely.
    """
    import numpy as np

    model = model.double()
    analytic = squared_error_gradients(model, inputs, label)
    named = [(name, p) for name, p in model.named_parameters() if p.requires_grad and p.numel() > 0]
    rng = np.random.default_rng(seed)
    worst = 0.0
    model.eval()

    def loss() -> float:
        with torch.no_grad():
            _, score = model(**inputs)
            label_t = torch.as_tensor(label, dtype=score.dtype).reshape(score.shape)
            return float(((score - label_t) ** 2).sum())

    for _ in range(n_params):
        name, param = named[rng.integers(len(named))]
        flat = param.detach().reshape(-1)
        idx = int(rng.integers(flat.numel()))
        original = float(flat[idx])
        with torch.no_grad():
            param.reshape(-1)[idx] = original + h
            up = loss()
            param.reshape(-1)[idx] = original - h
            down = loss()
            param.reshape(-1)[idx] = original
        fd = (up - down) / (2 * h)
        an = float(analytic[name].reshape(-1)[idx])
        denom = max(abs(fd), abs(an))
        err = abs(fd - an) if denom < 1e-7 else abs(fd - an) / denom
        worst = max(worst, err)
        assert err <= rel_tol, f"{name}[{idx}]: analytic {an} vs finite-diff {fd} (rel err {err:.2e})"
    return worst


def weights_hash(model: nn.Module) -> str:
    """SHA-256 over all parameters and buffers, in state-dict order."""
    h = hashlib.sha256()
    for name, tensor in model.state_dict().items():
        h.update(name.encode("utf-8"))
        h.update(tensor.detach().cpu().contiguous().numpy().tobytes())
    return h.hexdigest()
