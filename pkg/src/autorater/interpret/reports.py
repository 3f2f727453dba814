"""Attribution artifact writers: phi JSON, aggregate CSV, image overlays,
colored-token HTML.

Instances come either from a processed corpus cache (selected by record
id) or, as a fallback, from the attribution backgrounds stored inside the
bundle. Artifacts per record: ``phi_<id>.json``; per run:
``aggregates.csv`` plus ``overlay_<id>.png`` (image models) and
``tokens_<id>.html`` (text models).
"""

from __future__ import annotations

import csv
import html
import json
from pathlib import Path

import numpy as np
from PIL import Image

from autorater.corpus.processed import ProcessedCorpus
from autorater.corpus.text import SerializedText
from autorater.interpret.aggregates import aggregate_by_taxonomy, aggregate_regions, aggregate_segments
from autorater.interpret.attribution import shap_image, shap_parametric, shap_text


def render_overlay(image: np.ndarray, phi_map: np.ndarray, path: Path) -> None:
    """Blend a signed attribution map over the montage: red positive, blue
    negative, opacity scaled by magnitude."""
    base = (np.clip(image, 0, 1) * 255).astype(np.float32)
    max_abs = max(float(np.abs(phi_map).max()), 1e-12)
    strength = np.abs(phi_map) / max_abs
    alpha = (0.15 + 0.85 * strength)[..., None]
    color = np.where(
        (phi_map >= 0)[..., None],
        np.array([220.0, 60.0, 50.0]),
        np.array([40.0, 90.0, 220.0]),
    )
    blended = (1 - 0.6 * alpha) * base + 0.6 * alpha * color
    Image.fromarray(blended.round().astype(np.uint8)).save(path)


def render_token_html(tokens: list[dict], path: Path, title: str) -> None:
    max_abs = max((abs(t["phi"]) for t in tokens), default=1e-12) or 1e-12
    spans = []
    for t in tokens:
        strength = min(1.0, abs(t["phi"]) / max_abs)
        alpha = 0.15 + 0.85 * strength
        color = f"rgba(220,60,50,{alpha:.3f})" if t["phi"] >= 0 else f"rgba(40,90,220,{alpha:.3f})"
        spans.append(
            f'<span style="background:{color};padding:0 2px;border-radius:2px" '
            f'title="{html.escape(t["segment"])}: {t["phi"]:.3e}">{html.escape(t["token"])}</span>'
        )
    doc = (
        "<!doctype html><html><head><meta charset='utf-8'>"
        f"<title>{html.escape(title)}</title></head>"
        f"<body style='font-family:system-ui'><p>{' '.join(spans)}</p></body></html>"
    )
    path.write_text(doc, encoding="utf-8")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def explain_records_to_dir(
    bundle,
    out_dir: Path,
    corpus: ProcessedCorpus | None = None,
    ids: list[str] | None = None,
    limit: int = 8,
    samples: int = 500,
) -> int:
    """Write attribution artifacts for selected records; returns the file
    count. Fusion bundles report their parametric slice via the service;
    this writer covers the three unimodal kinds."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written = 0
    kind = bundle.kind

    if kind == "parametric":
        background = np.asarray(bundle.background["parametric"], dtype=np.float64)
        if corpus is not None:
            chosen = ids or corpus.ids[:limit]
            instances = [(rid, corpus.parametric[corpus.index_of[rid]].astype(np.float64)) for rid in chosen]
        else:
            instances = [(f"background-{i}", background[i]) for i in range(min(limit, len(background)))]
        results = []
        for i, (rid, vec) in enumerate(instances):
            res = shap_parametric(bundle.model, background, vec, samples=samples, seed=i, instance_id=rid)
            results.append(res)
            (out_dir / f"phi_{rid}.json").write_text(
                json.dumps({"id": rid, "phi": res.phi.tolist(), "expected_value": res.expected_value,
                            "prediction": res.prediction}),
                encoding="utf-8",
            )
            written += 1
        for level in ("category", "subcategory"):
            agg = aggregate_by_taxonomy(results, bundle.schema, level)
            _write_csv(
                out_dir / f"aggregate_{level}.csv",
                [level, "mean_abs_phi", "stderr"],
                [[name, agg.entries[name], agg.stderr[name]] for name in agg.ranking()],
            )
            written += 1
        return written

    if kind == "text":
        background = bundle.background_texts
        if corpus is not None:
            chosen = ids or corpus.ids[:limit]
            instances = [(rid, corpus.texts[corpus.index_of[rid]]) for rid in chosen]
        else:
            instances = [
                (f"background-{i}", SerializedText(text=t, token_count=len(t.split()), segment_spans={"text": (0, len(t))}))
                for i, t in enumerate(background[:limit])
            ]
        segment_aggs = []
        for i, (rid, stext) in enumerate(instances):
            res, seg = shap_text(bundle.model, background, stext, samples=samples, seed=i, instance_id=rid)
            segment_aggs.append(seg)
            (out_dir / f"phi_{rid}.json").write_text(
                json.dumps({"id": rid, "tokens": seg.tokens, "expected_value": res.expected_value,
                            "prediction": res.prediction}),
                encoding="utf-8",
            )
            render_token_html(seg.tokens, out_dir / f"tokens_{rid}.html", title=rid)
            written += 2
        merged = aggregate_segments(segment_aggs)
        _write_csv(
            out_dir / "aggregate_segments.csv",
            ["segment", "mean_abs_phi"],
            [[name, value] for name, value in sorted(merged.entries.items(), key=lambda kv: -kv[1])],
        )
        return written + 1

    if kind == "image":
        backgrounds = np.asarray(bundle.background["image"], dtype=np.float64)
        if backgrounds.max(initial=0.0) > 1.5:
            backgrounds = backgrounds / 255.0
        image_kind = bundle.image_kind()
        if corpus is not None:
            chosen = ids or corpus.ids[:limit]
            source = corpus.images_for_score(bundle.score_name)
            instances = [(rid, source[corpus.index_of[rid]].astype(np.float64)) for rid in chosen]
        else:
            instances = [(f"background-{i}", backgrounds[i]) for i in range(min(limit, len(backgrounds)))]
        region_aggs = []
        for i, (rid, img) in enumerate(instances):
            res, regions = shap_image(
                bundle.model, backgrounds, img, kind=image_kind, samples=samples, seed=i, instance_id=rid
            )
            region_aggs.append(regions)
            (out_dir / f"phi_{rid}.json").write_text(
                json.dumps({"id": rid, "regions": regions.entries, "expected_value": res.expected_value,
                            "prediction": res.prediction, "phi_shape": list(res.phi.shape)}),
                encoding="utf-8",
            )
            render_overlay(img, res.phi, out_dir / f"overlay_{rid}.png")
            written += 2
        merged = aggregate_regions(region_aggs)
        _write_csv(
            out_dir / "aggregate_regions.csv",
            ["region", "mean_abs_phi"],
            [[name, value] for name, value in sorted(merged.entries.items(), key=lambda kv: -kv[1])],
        )
        return written + 1

    raise ValueError(f"explain artifacts for bundle kind {kind!r} are served via the HTTP API")
