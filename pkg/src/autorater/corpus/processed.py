"""Model-ready corpus tensors and the on-disk processed cache.

``process_records`` runs the full preprocessing pipeline (parametric
encoding, montage composition, text serialization) over validated records
and returns aligned arrays. The cache directory holds ``schema.json``,
``texts.json``, and ``tensors.bin`` (the versioned tensor container), so
a processed corpus round-trips without re-decoding images.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from autorater import SCORE_NAMES
from autorater.corpus.images import ComposeConfig, compose_images
from autorater.corpus.schema import encode_many
from autorater.corpus.text import SerializedText, serialize_text
from autorater.corpus.types import ParametricSchema, VehicleRecord
from autorater.tensorio import read_tensors, write_tensors

CACHE_TENSORS = "tensors.bin"
CACHE_SCHEMA = "schema.json"
CACHE_TEXTS = "texts.json"


@dataclass
class ProcessedCorpus:
    """Aligned preprocessed arrays for a record set."""

    ids: list[str]
    years: np.ndarray  # (N,) int
    schema: ParametricSchema
    parametric: np.ndarray  # (N, encoded_dim) float32 in [0, 1]
    texts: list[SerializedText]
    labels: dict[str, np.ndarray]  # score -> (N,) float32, NaN where missing
    exterior: np.ndarray | None = None  # (N, H, W, 3) float32 in [0, 1]
    interior: np.ndarray | None = None
    compose_config: ComposeConfig = field(default_factory=ComposeConfig)

    def __post_init__(self) -> None:
        self.index_of = {rid: i for i, rid in enumerate(self.ids)}

    def __len__(self) -> int:
        return len(self.ids)

    def images_for_score(self, score_name: str) -> np.ndarray | None:
        """Interior composites serve the interior score; exterior the rest."""
        return self.interior if score_name == "interior" else self.exterior

    def image_kind_for_score(self, score_name: str) -> str:
        return "interior" if score_name == "interior" else "exterior"


def process_records(
    records: list[VehicleRecord],
    schema: ParametricSchema,
    compose_config: ComposeConfig | None = None,
    kinds: tuple[str, ...] = ("exterior", "interior"),
    base_dir: Path | None = None,
) -> ProcessedCorpus:
    """Encode, compose, and serialize all records into aligned arrays.

    ``kinds`` selects which montages to build; skipping one avoids image
    work for corpora used only with non-image models.
    """
    compose_config = compose_config or ComposeConfig()
    ids = [r.id for r in records]
    years = np.array([r.year for r in records], dtype=np.int64)
    parametric = encode_many(records, schema)
    texts = [serialize_text(r.text_segments) for r in records]
    labels = {
        s: np.array(
            [r.labels.get(s) if r.labels.get(s) is not None else np.nan for r in records],
            dtype=np.float32,
        )
        for s in SCORE_NAMES
    }

    composites: dict[str, np.ndarray | None] = {"exterior": None, "interior": None}
    for kind in kinds:
        stacks = []
        source = [r.exterior_images if kind == "exterior" else r.interior_images for r in records]
        if any(s is None for s in source):
            continue
        for imgs in source:
            stacks.append(compose_images(imgs, kind, compose_config, base_dir=base_dir))
        composites[kind] = np.stack(stacks) if stacks else None

    return ProcessedCorpus(
        ids=ids,
        years=years,
        schema=schema,
        parametric=parametric,
        texts=texts,
        labels=labels,
        exterior=composites["exterior"],
        interior=composites["interior"],
        compose_config=compose_config,
    )


def save_processed(corpus: ProcessedCorpus, out_dir: str | Path) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / CACHE_SCHEMA).write_text(json.dumps(corpus.schema.to_json(), indent=2), encoding="utf-8")
    (out_dir / CACHE_TEXTS).write_text(
        json.dumps(
            {
                "ids": corpus.ids,
                "texts": [
                    {"text": t.text, "token_count": t.token_count, "segment_spans": t.segment_spans}
                    for t in corpus.texts
                ],
                "compose": {
                    "exterior_tile_hw": list(corpus.compose_config.exterior_tile_hw),
                    "interior_tile_hw": list(corpus.compose_config.interior_tile_hw),
                    "exterior_resize": corpus.compose_config.exterior_resize,
                },
            }
        ),
        encoding="utf-8",
    )
    tensors = {
        "years": corpus.years,
        "parametric": corpus.parametric,
        "labels": np.stack([corpus.labels[s] for s in SCORE_NAMES], axis=1),
    }
    for kind in ("exterior", "interior"):
        arr = getattr(corpus, kind)
        if arr is not None:
            tensors[kind] = (np.clip(arr, 0, 1) * 255).round().astype(np.uint8)
    write_tensors(out_dir / CACHE_TENSORS, tensors)


def load_processed(cache_dir: str | Path) -> ProcessedCorpus:
    cache_dir = Path(cache_dir)
    schema = ParametricSchema.from_json(json.loads((cache_dir / CACHE_SCHEMA).read_text(encoding="utf-8")))
    meta = json.loads((cache_dir / CACHE_TEXTS).read_text(encoding="utf-8"))
    tensors = read_tensors(cache_dir / CACHE_TENSORS)
    texts = [
        SerializedText(
            text=t["text"],
            token_count=t["token_count"],
            segment_spans={k: tuple(v) for k, v in t["segment_spans"].items()},
        )
        for t in meta["texts"]
    ]
    labels_arr = tensors["labels"]
    compose = ComposeConfig(
        exterior_tile_hw=tuple(meta["compose"]["exterior_tile_hw"]),
        interior_tile_hw=tuple(meta["compose"]["interior_tile_hw"]),
        exterior_resize=meta["compose"]["exterior_resize"],
    )
    return ProcessedCorpus(
        ids=meta["ids"],
        years=tensors["years"],
        schema=schema,
        parametric=tensors["parametric"],
        texts=texts,
        labels={s: labels_arr[:, i] for i, s in enumerate(SCORE_NAMES)},
        exterior=tensors["exterior"].astype(np.float32) / 255.0 if "exterior" in tensors else None,
        interior=tensors["interior"].astype(np.float32) / 255.0 if "interior" in tensors else None,
        compose_config=compose,
    )
