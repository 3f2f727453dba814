"""JSON manifest loading with per-record validation and exclusion reports.

Manifest layout::

    {
      "schema_taxonomy": [
        {"name": "...", "kind": "numeric"|"categorical" (optional),
         "category": "...", "subcategory": "..."},
        ...
      ],
      "records": [
        {"id": "...", "year": 2020,
         "parametric": {"feature": value, ...},
         "text_segments": {"review": "...", "pros": "...", ...},
         "exterior_images": {"angular_front": "path.png", ...} (optional),
         "interior_images": {"dashboard": "path.png", ...} (optional),
         "labels": {"total": 8.1, ...}},
        ...
      ]
    }

Image paths are resolved relative to the manifest file. Records that fail
validation (no labels at all, bad year, unknown features, broken images)
are excluded and reported; a duplicate id is a hard error.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from autorater import SCORE_NAMES
from autorater.corpus.types import CorpusError, RatingLabels, VehicleRecord


@dataclass
class Exclusion:
    record_id: str
    reasons: list[str]


def _parse_record(raw: dict, index: int) -> VehicleRecord:
    rid = str(raw.get("id", "") or "")
    labels_raw = raw.get("labels", {}) or {}
    labels = RatingLabels(**{k: labels_raw.get(k) for k in SCORE_NAMES})
    year = raw.get("year")
    return VehicleRecord(
        id=rid or f"<record {index}>",
        year=year if isinstance(year, int) else -1,
        parametric=dict(raw.get("parametric", {}) or {}),
        text_segments=dict(raw.get("text_segments", {}) or {}),
        exterior_images=raw.get("exterior_images"),
        interior_images=raw.get("interior_images"),
        labels=labels,
    )


def load_manifest_with_report(
    path: str | Path, check_images: bool = True
) -> tuple[list[VehicleRecord], list[dict], list[Exclusion]]:
    """Load a manifest, returning (valid records, taxonomy, exclusions)."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise CorpusError(f"cannot read manifest {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise CorpusError(f"malformed JSON in manifest {path}: {exc}")
    if not isinstance(raw, dict) or "records" not in raw:
        raise CorpusError(f"manifest {path} must be an object with a 'records' list")

    taxonomy = raw.get("schema_taxonomy") or []
    known_features = {decl["name"] for decl in taxonomy}
    base_dir = path.parent

    records: list[VehicleRecord] = []
    exclusions: list[Exclusion] = []
    seen_ids: set[str] = set()
    for i, entry in enumerate(raw["records"]):
        rec = _parse_record(entry, i)
        if rec.id in seen_ids:
            raise CorpusError(f"duplicate record id {rec.id!r}")
        seen_ids.add(rec.id)
        problems = rec.validate(base_dir=base_dir, check_images=check_images)
        if known_features:
            unknown = [k for k in rec.parametric if k not in known_features]
            if unknown:
                problems.append(f"parametric: features not in schema_taxonomy: {unknown}")
        if problems:
            exclusions.append(Exclusion(record_id=rec.id, reasons=problems))
        else:
            records.append(rec)
    return records, taxonomy, exclusions


def load_manifest(path: str | Path, check_images: bool = True) -> list[VehicleRecord]:
    """Load and validate a manifest, returning only the valid records."""
    records, _, _ = load_manifest_with_report(path, check_images=check_images)
    return records
