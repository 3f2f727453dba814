"""Expected-gradients Shapley estimation for all three modalities.

One estimator serves parametric vectors, token embeddings, and pixels:
phi = E[(x - b) * grad f(b + a * (x - b))] with b cycled through the
background set and a stratified over (0, 1). Backgrounds are weighted
equally and alphas stratified per background, so the estimate is exact
for linear models and satisfies local accuracy (attributions sum to the
prediction minus the background expectation) up to small integration
error for smooth ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import torch

from autorater.corpus.images import quadrant_slices
from autorater.corpus.text import SerializedText


@dataclass
class AttributionResult:
    """Per-element Shapley values for one prediction.

    ``phi`` is congruent with the attributed input: (d,) per encoded
    feature, (H, W) per pixel (channel-summed), or (L,) per token.
    """

    phi: np.ndarray
    expected_value: float
    prediction: float
    instance_id: str | None = None
    model_name: str | None = None

    @property
    def scale(self) -> float:
        return float(np.abs(self.phi).max(initial=0.0))


def local_accuracy_gap(result: AttributionResult) -> float:
    return abs(float(result.phi.sum()) - (result.prediction - result.expected_value))


def local_accuracy_tolerance(result: AttributionResult) -> float:
    return 0.01 * max(1.0, abs(result.prediction))


def _phi_round(forward, x_t, bg_t, quota, rng, chunk, dtype) -> tuple[np.ndarray, int]:
    """One stratified integration round: ``quota`` path samples per
    background, alphas stratified within each background's quota."""
    m_bg = bg_t.shape[0]
    bg_idx = np.repeat(np.arange(m_bg), quota)
    alphas = ((np.arange(quota)[None, :] + rng.random((m_bg, quota))) / quota).reshape(-1)
    phi = np.zeros(tuple(x_t.shape), dtype=np.float64)
    total = len(bg_idx)
    for start in range(0, total, chunk):
        idx = bg_idx[start : start + chunk]
        a = torch.from_numpy(alphas[start : start + chunk]).to(dtype).reshape(-1, *([1] * x_t.ndim))
        b = bg_t[idx]
        points = (b + a * (x_t.unsqueeze(0) - b)).requires_grad_(True)
        out = forward(points)
        grads = torch.autograd.grad(out.sum(), points)[0]
        phi += ((x_t.unsqueeze(0) - b) * grads).double().sum(dim=0).numpy()
    return phi, total


def expected_gradients(
    forward: Callable[[torch.Tensor], torch.Tensor],
    background: np.ndarray,
    x: np.ndarray,
    samples: int = 2000,
    seed: int = 0,
    chunk: int = 256,
    dtype: torch.dtype = torch.float32,
    refine: bool = True,
    max_samples: int = 200_000,
) -> AttributionResult:
    """Estimate Shapley values of ``forward`` at ``x``.

    ``forward`` maps a (B, *shape) tensor to (B,) outputs and must be
    differentiable at the given dtype; ``background`` is (M, *shape). The
    sample count is rounded up to a multiple of M so every background is
    integrated from equally often.

    Path-integration error is observable as the completeness gap
    |sum(phi) - (f(x) - E_bg f)|; with ``refine`` the sample count doubles
    until the gap sits inside half the local-accuracy tolerance (or
    ``max_samples`` is reached). Deterministic for a fixed seed.
    """
    x64 = np.asarray(x, dtype=np.float64)
    bg = np.asarray(background, dtype=np.float64)
    if bg.shape[1:] != x64.shape:
        raise ValueError(f"background shape {bg.shape[1:]} does not match instance shape {x64.shape}")
    m_bg = bg.shape[0]
    rng = np.random.default_rng(seed)
    x_t = torch.from_numpy(x64).to(dtype)
    bg_t = torch.from_numpy(bg).to(dtype)

    with torch.no_grad():
        prediction = float(forward(x_t.unsqueeze(0))[0])
        expected = float(forward(bg_t).double().mean())
    target_gap = 0.005 * max(1.0, abs(prediction))

    phi_sum = np.zeros(x64.shape, dtype=np.float64)
    n_total = 0
    quota = max(1, -(-samples // m_bg))  # ceil
    while True:
        phi_round, n_round = _phi_round(forward, x_t, bg_t, quota, rng, chunk, dtype)
        phi_sum += phi_round
        n_total += n_round
        phi = phi_sum / n_total
        gap = abs(float(phi.sum()) - (prediction - expected))
        if not refine or gap <= target_gap or n_total * 2 > max_samples:
            break
        quota = max(1, (n_total // m_bg))  # double the accumulated budget
    return AttributionResult(phi=phi, expected_value=expected, prediction=prediction)


def expected_gradients_multi(
    forward: Callable[..., torch.Tensor],
    backgrounds: dict[str, np.ndarray],
    xs: dict[str, np.ndarray],
    aux: dict[str, torch.Tensor] | None = None,
    samples: int = 200,
    seed: int = 0,
    chunk: int = 64,
    dtype: torch.dtype = torch.float32,
    refine: bool = True,
    max_samples: int = 50_000,
) -> tuple[dict[str, np.ndarray], float, float]:
    """Joint attribution over several input tensors at once.

    Every named input interpolates toward the same background record with
    the same alpha, so the per-input phi arrays jointly satisfy local
    accuracy: sum of all phi entries = prediction - expected_value (up to
    integration error, refined away as in :func:`expected_gradients`).
    ``aux`` tensors (e.g. attention masks) are broadcast to the batch and
    receive no attribution. Returns (phi per input, expected_value,
    prediction).
    """
    keys = list(xs.keys())
    m_bg = {len(backgrounds[k]) for k in keys}
    if len(m_bg) != 1:
        raise ValueError("all backgrounds must hold the same number of records")
    m_bg = m_bg.pop()
    rng = np.random.default_rng(seed)
    x_t = {k: torch.from_numpy(np.asarray(xs[k], dtype=np.float64)).to(dtype) for k in keys}
    bg_t = {k: torch.from_numpy(np.asarray(backgrounds[k], dtype=np.float64)).to(dtype) for k in keys}
    aux = aux or {}

    def expand_aux(n: int) -> dict[str, torch.Tensor]:
        return {k: v.expand(n, *v.shape[1:]) for k, v in aux.items()}

    with torch.no_grad():
        prediction = float(forward(**{k: x_t[k].unsqueeze(0) for k in keys}, **expand_aux(1))[0])
        expected = float(forward(**bg_t, **expand_aux(m_bg)).double().mean())
    target_gap = 0.005 * max(1.0, abs(prediction))

    def one_round(quota: int) -> tuple[dict[str, np.ndarray], int]:
        bg_idx = np.repeat(np.arange(m_bg), quota)
        alphas = ((np.arange(quota)[None, :] + rng.random((m_bg, quota))) / quota).reshape(-1)
        acc = {k: np.zeros(tuple(x_t[k].shape), dtype=np.float64) for k in keys}
        for start in range(0, len(bg_idx), chunk):
            idx = bg_idx[start : start + chunk]
            a_np = alphas[start : start + chunk]
            points, diffs = {}, {}
            for k in keys:
                b = bg_t[k][idx]
                a = torch.from_numpy(a_np).to(dtype).reshape(-1, *([1] * x_t[k].ndim))
                diffs[k] = x_t[k].unsqueeze(0) - b
                points[k] = (b + a * diffs[k]).requires_grad_(True)
            out = forward(**points, **expand_aux(len(idx)))
            grads = torch.autograd.grad(out.sum(), [points[k] for k in keys])
            for k, g in zip(keys, grads):
                acc[k] += (diffs[k] * g).double().sum(dim=0).numpy()
        return acc, len(bg_idx)

    phi_sum = {k: np.zeros(tuple(x_t[k].shape), dtype=np.float64) for k in keys}
    n_total = 0
    quota = max(1, -(-samples // m_bg))
    while True:
        acc, n_round = one_round(quota)
        for k in keys:
            phi_sum[k] += acc[k]
        n_total += n_round
        phi = {k: phi_sum[k] / n_total for k in keys}
        gap = abs(sum(float(p.sum()) for p in phi.values()) - (prediction - expected))
        if not refine or gap <= target_gap or n_total * 2 > max_samples:
            break
        quota = max(1, n_total // m_bg)
    return phi, expected, prediction


def parametric_forward_fn(net) -> Callable[[np.ndarray], np.ndarray]:
    """Numpy batch adapter over a net's score output (for the exact oracle)."""

    def f(batch: np.ndarray) -> np.ndarray:
        was_training = net.training
        net.eval()
        with torch.no_grad():
            _, score = net(torch.from_numpy(np.asarray(batch, dtype=np.float32)))
        if was_training:
            net.train()
        return score.double().numpy()

    return f


def shap_parametric(
    net,
    background: np.ndarray,
    x: np.ndarray,
    samples: int = 2000,
    seed: int = 0,
    instance_id: str | None = None,
) -> AttributionResult:
    """Per-encoded-feature attributions for a parametric model."""
    net.eval()

    def forward(points: torch.Tensor) -> torch.Tensor:
        return net(points)[1]

    result = expected_gradients(forward, background, x, samples=samples, seed=seed)
    result.instance_id = instance_id
    result.model_name = "parametric"
    return result


@dataclass
class RegionAggregate:
    """Mean absolute attribution per montage quadrant for one instance."""

    kind: str
    entries: dict[str, float]

    def max_region(self) -> str:
        return max(self.entries, key=self.entries.get)


def shap_image(
    net,
    background_images: np.ndarray,
    image: np.ndarray,
    kind: str = "exterior",
    samples: int = 200,
    seed: int = 0,
    instance_id: str | None = None,
) -> tuple[AttributionResult, RegionAggregate]:
    """Pixel attributions plus the quadrant rollup for one montage.

    ``image`` and ``background_images`` are (H, W, 3) and (M, H, W, 3)
    arrays in [0, 1]. The integration baseline is the per-pixel mean of
    the background images. The retained phi map is channel-summed (H, W);
    quadrant aggregation follows the montage tile layout.
    """
    net.eval()
    baseline = np.asarray(background_images, dtype=np.float64).mean(axis=0, keepdims=True)
    x_chw = np.ascontiguousarray(np.asarray(image, dtype=np.float64).transpose(2, 0, 1))
    bg_chw = np.ascontiguousarray(baseline.transpose(0, 3, 1, 2))

    def forward(points: torch.Tensor) -> torch.Tensor:
        return net(points)[1]

    result = expected_gradients(forward, bg_chw, x_chw, samples=samples, seed=seed)
    result.phi = result.phi.sum(axis=0)  # channel-summed pixel map
    result.instance_id = instance_id
    result.model_name = "image"

    regions = {}
    for view, (rows, cols) in quadrant_slices(result.phi.shape, kind).items():
        regions[view] = float(np.abs(result.phi[rows, cols]).mean())
    return result, RegionAggregate(kind=kind, entries=regions)


@dataclass
class TextSegmentAggregate:
    """Mean absolute attribution per text segment for one instance."""

    entries: dict[str, float]
    tokens: list[dict] = field(default_factory=list)  # {token, phi, segment}

    def max_segment(self) -> str:
        return max(self.entries, key=self.entries.get)


def shap_text(
    net,
    background_texts: list[str | SerializedText],
    text: str | SerializedText,
    samples: int = 1000,
    seed: int = 0,
    instance_id: str | None = None,
) -> tuple[AttributionResult, TextSegmentAggregate]:
    """Per-token attributions over the encoder's embedding inputs.

    Embedding-coordinate attributions are summed per token. Background
    texts are tokenized and padded/truncated to the instance length; the
    instance's attention mask applies throughout. Passing a
    :class:`SerializedText` enables the per-segment rollup; a bare string
    aggregates under one "text" segment.
    """
    net.eval()
    stext = text if isinstance(text, SerializedText) else None
    raw = text.text if stext is not None else str(text)
    if not raw:
        raise ValueError("text must be nonempty")
    encoder = net.encoder
    tokenizer = encoder.tokenizer
    ids, spans = tokenizer.tokenize_with_spans(raw)
    n = len(ids)
    mask_row = torch.ones(1, n, dtype=torch.bool)

    def embed_ids(seq: list[int]) -> np.ndarray:
        seq = (seq[:n] + [0] * max(0, n - len(seq)))[:n]
        with torch.no_grad():
            emb = encoder.embed_tokens(torch.tensor([seq], dtype=torch.long))
        return emb[0].double().numpy()

    x_emb = embed_ids(ids)
    bg_texts = [b.text if isinstance(b, SerializedText) else str(b) for b in background_texts]
    bg_emb = np.stack([embed_ids(tokenizer.tokenize(b)) for b in bg_texts])

    def forward(points: torch.Tensor) -> torch.Tensor:
        m = mask_row.expand(points.shape[0], n)
        return net.forward_embedded(points, m)[1]

    result = expected_gradients(forward, bg_emb, x_emb, samples=samples, seed=seed)
    result.phi = result.phi.sum(axis=-1)  # per-token scalars
    result.instance_id = instance_id
    result.model_name = "text"

    token_rows = []
    segment_phis: dict[str, list[float]] = {}
    for j, (start, end) in enumerate(spans):
        segment = (stext.segment_of(start) if stext is not None else None) or "text"
        phi_j = float(result.phi[j])
        token_rows.append({"token": raw[start:end], "phi": phi_j, "segment": segment})
        segment_phis.setdefault(segment, []).append(abs(phi_j))
    if stext is not None:
        for name in stext.segment_spans:
            segment_phis.setdefault(name, [])
    entries = {name: (float(np.mean(vals)) if vals else 0.0) for name, vals in segment_phis.items()}
    return result, TextSegmentAggregate(entries=entries, tokens=token_rows)
