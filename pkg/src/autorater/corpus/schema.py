"""Parametric schema construction and [0,1] vector encoding.

Numeric features are min-max normalized over the observed range and
clipped; categorical features are one-hot encoded over the sorted
distinct observed values. Missing features and unknown categorical values
encode as all-zero blocks so that partial inputs (what-if probes) stay
valid.
"""

from __future__ import annotations

import numbers

import numpy as np

from autorater.corpus.types import CorpusError, FeatureDef, ParametricSchema, VehicleRecord


def _is_numeric(value) -> bool:
    return isinstance(value, numbers.Real) and not isinstance(value, bool)


def build_schema(
    records: list[VehicleRecord],
    taxonomy: list[dict] | None = None,
) -> ParametricSchema:
    """Build the encoded-vector schema from observed records.

    ``taxonomy`` is the manifest's ordered feature declaration list; each
    entry needs ``name``, ``category``, ``subcategory`` and may pin
    ``kind``. When omitted, features are ordered by first appearance and
    kinds are inferred, with a mixed numeric/string feature being a hard
    error. Numeric ranges and categorical vocabularies always come from
    the data.
    """
    if not records:
        raise CorpusError("cannot build a schema from zero records")

    if taxonomy is None:
        taxonomy = []
        seen = set()
        for rec in records:
            for name in rec.parametric:
                if name not in seen:
                    seen.add(name)
                    taxonomy.append({"name": name, "category": "Uncategorized", "subcategory": "Uncategorized"})

    features: list[FeatureDef] = []
    for decl in taxonomy:
        name = decl["name"]
        declared_kind = decl.get("kind")
        numerics: list[float] = []
        strings: set[str] = set()
        for rec in records:
            if name not in rec.parametric:
                continue
            value = rec.parametric[name]
            if _is_numeric(value):
                numerics.append(float(value))
            else:
                strings.add(str(value))
        if numerics and strings:
            raise CorpusError(f"feature {name!r} observed as both numeric and string")
        kind = declared_kind or ("categorical" if strings else "numeric")
        if kind == "numeric" and strings:
            raise CorpusError(f"feature {name!r} declared numeric but observed string values")
        if kind == "categorical" and numerics:
            raise CorpusError(f"feature {name!r} declared categorical but observed numeric values")

        if kind == "numeric":
            lo = min(numerics) if numerics else 0.0
            hi = max(numerics) if numerics else 0.0
            features.append(
                FeatureDef(
                    name=name,
                    kind="numeric",
                    category=decl.get("category", "Uncategorized"),
                    subcategory=decl.get("subcategory", "Uncategorized"),
                    numeric_min=lo,
                    numeric_max=hi,
                    degenerate=not numerics or lo == hi,
                )
            )
        else:
            vocab = sorted(strings)
            if not vocab:
                vocab = [""]  # declared categorical but never observed
            features.append(
                FeatureDef(
                    name=name,
                    kind="categorical",
                    category=decl.get("category", "Uncategorized"),
                    subcategory=decl.get("subcategory", "Uncategorized"),
                    vocabulary=vocab,
                )
            )
    return ParametricSchema(features=features)


def encode_parametric(record: VehicleRecord | dict, schema: ParametricSchema) -> np.ndarray:
    """Encode one record's parametric map into the schema's [0,1] vector.

    Accepts either a record or a bare feature map. Unknown categorical
    values and absent features produce all-zero blocks; out-of-range
    numeric values are clipped.
    """
    values = record.parametric if isinstance(record, VehicleRecord) else record
    vec = np.zeros(schema.encoded_dim, dtype=np.float64)
    offset = 0
    for f in schema.features:
        if f.name in values and values[f.name] is not None:
            value = values[f.name]
            if f.kind == "numeric":
                if not _is_numeric(value):
                    raise CorpusError(f"feature {f.name!r} expects a number, got {value!r}")
                if not f.degenerate:
                    x = (float(value) - f.numeric_min) / (f.numeric_max - f.numeric_min)
                    vec[offset] = min(1.0, max(0.0, x))
            else:
                try:
                    vec[offset + f.vocabulary.index(str(value))] = 1.0
                except ValueError:
                    pass  # unknown category: zero block
        offset += f.width
    return vec


def encode_many(records: list[VehicleRecord], schema: ParametricSchema) -> np.ndarray:
    return np.stack([encode_parametric(r, schema) for r in records]).astype(np.float32)
