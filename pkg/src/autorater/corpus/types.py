"""Domain types for raw and encoded vehicle records."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from autorater import SCORE_NAMES

# Fixed view sets; montage quadrant order is row-major over these tuples.
EXTERIOR_VIEWS = ("angular_front", "front", "rear", "side")
INTERIOR_VIEWS = ("dashboard", "front_seat", "rear_seat", "steering_wheel")

YEAR_MIN = 1990
YEAR_MAX = 2100

# An image reference is either a file path or an in-memory H x W x 3 array.
ImageRef = Union[str, Path, np.ndarray]


class CorpusError(RuntimeError):
    """Hard corpus failure: unreadable manifest, duplicate ids, type conflicts."""


@dataclass
class RatingLabels:
    """The five 0-10 rating scores; any subset may be missing (None)."""

    total: float | None = None
    critics: float | None = None
    performance: float | None = None
    safety: float | None = None
    interior: float | None = None

    def get(self, score_name: str) -> float | None:
        if score_name not in SCORE_NAMES:
            raise KeyError(f"unknown score {score_name!r}")
        return getattr(self, score_name)

    def present(self) -> dict[str, float]:
        return {s: getattr(self, s) for s in SCORE_NAMES if getattr(self, s) is not None}

    def validate(self) -> list[str]:
        problems = []
        for s in SCORE_NAMES:
            v = getattr(self, s)
            if v is None:
                continue
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
                problems.append(f"labels.{s}: not a finite number")
            elif not 0.0 <= float(v) <= 10.0:
                problems.append(f"labels.{s}: {v} outside [0, 10]")
        return problems


@dataclass
class VehicleRecord:
    """One raw multi-modal vehicle entry.

    ``parametric`` maps feature name to a numeric value or a categorical
    string. ``text_segments`` is an ordered name -> content map (review,
    pros, cons, new_changes are the expected names; extras are allowed).
    Image maps, when present, must carry exactly the four view keys for
    their kind.
    """

    id: str
    year: int
    parametric: dict[str, float | str] = field(default_factory=dict)
    text_segments: dict[str, str] = field(default_factory=dict)
    exterior_images: dict[str, ImageRef] | None = None
    interior_images: dict[str, ImageRef] | None = None
    labels: RatingLabels = field(default_factory=RatingLabels)

    def validate(self, base_dir: Path | None = None, check_images: bool = True) -> list[str]:
        """Return a list of human-readable validation problems (empty if valid)."""
        problems = []
        if not self.id:
            problems.append("id: empty")
        if not isinstance(self.year, int) or not YEAR_MIN <= self.year <= YEAR_MAX:
            problems.append(f"year: {self.year!r} outside [{YEAR_MIN}, {YEAR_MAX}]")
        if not self.labels.present():
            problems.append("labels: all five scores missing")
        problems.extend(self.labels.validate())
        for name in self.text_segments:
            if ": " in name:
                problems.append(f"text_segments.{name}: segment name contains ': '")
        for kind, views, images in (
            ("exterior_images", EXTERIOR_VIEWS, self.exterior_images),
            ("interior_images", INTERIOR_VIEWS, self.interior_images),
        ):
            if images is None:
                continue
            missing = [v for v in views if v not in images]
            extra = [v for v in images if v not in views]
            if missing:
                problems.append(f"{kind}: missing views {missing}")
            if extra:
                problems.append(f"{kind}: unexpected views {extra}")
            if check_images and not missing:
                from autorater.corpus.images import probe_image

                for view, ref in images.items():
                    err = probe_image(ref, base_dir)
                    if err:
                        problems.append(f"{kind}.{view}: {err}")
        return problems


@dataclass
class FeatureDef:
    """Layout of one parametric feature in the encoded vector.

    Numeric features occupy one slot (min-max normalized); categorical
    features occupy one slot per vocabulary entry (one-hot over the sorted
    vocabulary). A numeric feature whose observed min equals its max is
    flagged degenerate and always encodes to 0.
    """

    name: str
    kind: str  # "numeric" | "categorical"
    category: str
    subcategory: str
    numeric_min: float | None = None
    numeric_max: float | None = None
    vocabulary: list[str] | None = None
    degenerate: bool = False

    @property
    def width(self) -> int:
        return 1 if self.kind == "numeric" else len(self.vocabulary or [])

    def to_json(self) -> dict:
        d = {"name": self.name, "kind": self.kind, "category": self.category, "subcategory": self.subcategory}
        if self.kind == "numeric":
            d.update(numeric_min=self.numeric_min, numeric_max=self.numeric_max, degenerate=self.degenerate)
        else:
            d["vocabulary"] = list(self.vocabulary or [])
        return d

    @classmethod
    def from_json(cls, d: dict) -> "FeatureDef":
        return cls(
            name=d["name"],
            kind=d["kind"],
            category=d["category"],
            subcategory=d["subcategory"],
            numeric_min=d.get("numeric_min"),
            numeric_max=d.get("numeric_max"),
            vocabulary=d.get("vocabulary"),
            degenerate=d.get("degenerate", False),
        )


@dataclass
class ParametricSchema:
    """Ordered feature definitions plus the resulting encoded vector width."""

    features: list[FeatureDef]

    def __post_init__(self) -> None:
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise CorpusError(f"duplicate feature names in schema: {dup}")

    @property
    def encoded_dim(self) -> int:
        return sum(f.width for f in self.features)

    def feature(self, name: str) -> FeatureDef:
        for f in self.features:
            if f.name == name:
                return f
        raise KeyError(f"unknown feature {name!r}")

    def slices(self) -> dict[str, slice]:
        """Feature name -> slice of its block in the encoded vector."""
        out = {}
        offset = 0
        for f in self.features:
            out[f.name] = slice(offset, offset + f.width)
            offset += f.width
        return out

    def categories(self) -> list[str]:
        seen: list[str] = []
        for f in self.features:
            if f.category not in seen:
                seen.append(f.category)
        return seen

    def subcategories(self) -> list[str]:
        seen: list[str] = []
        for f in self.features:
            if f.subcategory not in seen:
                seen.append(f.subcategory)
        return seen

    def to_json(self) -> dict:
        return {"features": [f.to_json() for f in self.features], "encoded_dim": self.encoded_dim}

    @classmethod
    def from_json(cls, d: dict) -> "ParametricSchema":
        return cls(features=[FeatureDef.from_json(f) for f in d["features"]])
