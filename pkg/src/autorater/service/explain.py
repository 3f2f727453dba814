"""Attribution payloads for the /explain endpoint.

Single-modality bundles use the per-modality estimators; fusion bundles
run the joint multi-input estimator so local accuracy holds across the
concatenated attribution. The payload exposes signed per-group sums
("groups": taxonomy categories, montage quadrants, text segments), which
partition their modality's attributions, so the rendered bars always sum
to prediction minus expected value.
"""

from __future__ import annotations

import os

import numpy as np
import torch

from autorater.corpus.images import quadrant_slices
from autorater.corpus.text import serialize_text
from autorater.interpret.attribution import expected_gradients_multi
from autorater.models.bundle import ModelBundle

EXPLAIN_SAMPLES = int(os.environ.get("EXPLAIN_SAMPLES", "600"))
MAX_ALIGNED_BACKGROUNDS = 20


def _taxonomy_groups(phi: np.ndarray, schema, level: str) -> dict[str, dict]:
    slices = schema.slices()
    groups: dict[str, dict] = {}
    names = schema.categories() if level == "category" else schema.subcategories()
    for name in names:
        groups[name] = {"signed": 0.0, "mean_abs": 0.0}
    for f in schema.features:
        g = f.category if level == "category" else f.subcategory
        block = phi[slices[f.name]]
        groups[g]["signed"] += float(block.sum())
        groups[g]["mean_abs"] += float(np.abs(block).sum())
    return groups


def _feature_phis(phi: np.ndarray, schema) -> list[dict]:
    slices = schema.slices()
    return [
        {"feature": f.name, "phi": float(phi[slices[f.name]].sum()), "category": f.category, "subcategory": f.subcategory}
        for f in schema.features
    ]


def _region_groups(phi_map: np.ndarray, kind: str) -> dict[str, dict]:
    out = {}
    for view, (rows, cols) in quadrant_slices(phi_map.shape, kind).items():
        block = phi_map[rows, cols]
        out[view] = {"signed": float(block.sum()), "mean_abs": float(np.abs(block).mean())}
    return out


def _heatmap(phi_map: np.ndarray, max_side: int = 32) -> dict:
    h, w = phi_map.shape
    factor = max(1, -(-max(h, w) // max_side))
    gh, gw = -(-h // factor), -(-w // factor)
    padded = np.zeros((gh * factor, gw * factor))
    padded[:h, :w] = phi_map
    grid = padded.reshape(gh, factor, gw, factor).mean(axis=(1, 3))
    return {"rows": gh, "cols": gw, "cell": factor, "values": [[float(v) for v in row] for row in grid]}


def _text_parts(bundle: ModelBundle, parsed: dict, inputs: dict) -> dict:
    """Instance token embedding, background embeddings, and span metadata."""
    stext = serialize_text(parsed["text_segments"])
    tokenizer = bundle.tokenizer
    ids, spans = tokenizer.tokenize_with_spans(stext.text)
    n = len(ids)
    encoder = bundle.model.encoder if hasattr(bundle.model, "encoder") else bundle.model.subnets["text"].encoder

    def embed(seq: list[int]) -> np.ndarray:
        seq = (seq[:n] + [0] * max(0, n - len(seq)))[:n]
        with torch.no_grad():
            return encoder.embed_tokens(torch.tensor([seq], dtype=torch.long))[0].double().numpy()

    bg = [embed(tokenizer.tokenize(t)) for t in bundle.background_texts]
    return {
        "stext": stext,
        "spans": spans,
        "x_emb": embed(ids),
        "bg_emb": np.stack(bg),
        "mask": torch.ones(1, n, dtype=torch.bool),
    }


def _segment_groups(phi_tokens: np.ndarray, stext, spans) -> tuple[dict, list[dict]]:
    groups = {name: {"signed": 0.0, "mean_abs": 0.0, "count": 0} for name in stext.segment_spans}
    tokens = []
    for j, (start, end) in enumerate(spans):
        seg = stext.segment_of(start) or "text"
        phi_j = float(phi_tokens[j])
        tokens.append({"token": stext.text[start:end], "phi": phi_j, "segment": seg})
        entry = groups.setdefault(seg, {"signed": 0.0, "mean_abs": 0.0, "count": 0})
        entry["signed"] += phi_j
        entry["mean_abs"] += abs(phi_j)
        entry["count"] += 1
    for entry in groups.values():
        entry["mean_abs"] = entry["mean_abs"] / entry["count"] if entry["count"] else 0.0
        del entry["count"]
    return groups, tokens


def explain_bundle(bundle: ModelBundle, inputs: dict[str, torch.Tensor], parsed: dict) -> dict:
    """Attribution payload for one bundle and one assembled request."""
    model = bundle.model
    model.eval()
    xs: dict[str, np.ndarray] = {}
    backgrounds: dict[str, np.ndarray] = {}
    aux: dict[str, torch.Tensor] = {}
    text_parts = None

    n_bg = MAX_ALIGNED_BACKGROUNDS
    if "parametric" in bundle.modalities:
        bg = np.asarray(bundle.background["parametric"], dtype=np.float64)
        n_bg = min(n_bg, len(bg))
    if "text" in bundle.modalities:
        n_bg = min(n_bg, len(bundle.background_texts))
    if "image" in bundle.modalities:
        n_bg = min(n_bg, len(bundle.background["image"]))

    if "parametric" in bundle.modalities:
        xs["parametric"] = inputs["parametric"][0].double().numpy()
        backgrounds["parametric"] = np.asarray(bundle.background["parametric"], dtype=np.float64)[:n_bg]
    if "text" in bundle.modalities:
        text_parts = _text_parts(bundle, parsed, inputs)
        xs["text_embedded"] = text_parts["x_emb"]
        backgrounds["text_embedded"] = text_parts["bg_emb"][:n_bg]
        aux["token_mask"] = text_parts["mask"]
    if "image" in bundle.modalities:
        img = inputs["image"][0].double().numpy()
        bg_imgs = np.asarray(bundle.background["image"], dtype=np.float64)
        if bg_imgs.max(initial=0.0) > 1.5:  # stored uint8
            bg_imgs = bg_imgs / 255.0
        bg_chw = bg_imgs.transpose(0, 3, 1, 2)
        if bundle.kind == "image":
            bg_chw = bg_chw.mean(axis=0, keepdims=True)  # per-pixel mean baseline
        else:
            bg_chw = bg_chw[:n_bg]
        xs["image"] = img
        backgrounds["image"] = bg_chw

    counts = {len(v) for v in backgrounds.values()}
    if len(counts) > 1:  # align counts for the joint estimator
        k = min(counts)
        backgrounds = {key: v[:k] for key, v in backgrounds.items()}

    if bundle.kind == "fusion":
        def forward(**kw):
            return model.forward_from_parts(**kw)[1]
    elif bundle.kind == "text":
        def forward(text_embedded, token_mask):
            return model.forward_embedded(text_embedded, token_mask)[1]
    else:
        key = "parametric" if bundle.kind == "parametric" else "image"

        def forward(**kw):
            return model(kw[key])[1]

    phis, expected, prediction = expected_gradients_multi(
        forward, backgrounds, xs, aux=aux, samples=EXPLAIN_SAMPLES, seed=0
    )

    attributions: dict = {}
    groups: list[dict] = []
    total = 0.0
    if "parametric" in xs:
        phi = phis["parametric"]
        total += float(phi.sum())
        taxonomy = {
            "categories": _taxonomy_groups(phi, bundle.schema, "category"),
            "subcategories": _taxonomy_groups(phi, bundle.schema, "subcategory"),
        }
        attributions["taxonomy"] = taxonomy
        attributions["features"] = _feature_phis(phi, bundle.schema)
        groups += [{"name": k, "modality": "parametric", **v} for k, v in taxonomy["categories"].items()]
    if "text_embedded" in xs:
        phi_tokens = phis["text_embedded"].sum(axis=-1)
        total += float(phi_tokens.sum())
        seg_groups, tokens = _segment_groups(phi_tokens, text_parts["stext"], text_parts["spans"])
        attributions["segments"] = seg_groups
        attributions["tokens"] = tokens
        groups += [{"name": k, "modality": "text", **v} for k, v in seg_groups.items()]
    if "image" in xs:
        phi_map = phis["image"].sum(axis=0)
        total += float(phi_map.sum())
        regions = _region_groups(phi_map, bundle.image_kind())
        attributions["regions"] = regions
        attributions["heatmap"] = _heatmap(phi_map)
        groups += [{"name": k, "modality": "image", **v} for k, v in regions.items()]

    return {
        "bundle_id": bundle.bundle_id,
        "score": bundle.score_name,
        "prediction": prediction,
        "expected_value": expected,
        "attribution_total": total,
        "local_accuracy_gap": abs(total - (prediction - expected)),
        "groups": groups,
        "attributions": attributions,
    }
