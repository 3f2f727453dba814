"""Synthetic benchmark corpus with controllable per-modality signal shares.

Generates vehicle records whose target score is a weighted combination of
three independent planted signals plus noise:

* a sparse linear + interaction function of the parametric features,
* sentiment keywords planted into the text segments ("top" and "but" in
  the review, "premium" in the pros),
* a bright patch in one montage quadrant whose intensity carries signal.

Each component is standardized over the corpus, weighted by the square
root of its variance share, summed, and affinely mapped into [0, 10], so
the sample variance contributed by each modality matches its requested
share. The per-record component values are returned for oracle tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from autorater import SCORE_NAMES
from autorater.corpus.types import EXTERIOR_VIEWS, INTERIOR_VIEWS, RatingLabels, VehicleRecord

DEFAULT_TAXONOMY: list[dict] = [
    {"name": "msrp", "kind": "numeric", "category": "General Information", "subcategory": "Price", "range": (18000.0, 85000.0)},
    {"name": "mpg_city", "kind": "numeric", "category": "General Information", "subcategory": "Fuel Economy", "range": (12.0, 55.0)},
    {"name": "mpg_highway", "kind": "numeric", "category": "General Information", "subcategory": "Fuel Economy", "range": (16.0, 60.0)},
    {"name": "brand", "kind": "categorical", "category": "General Information", "subcategory": "Brand",
     "vocabulary": ["Apex", "Boreal", "Cresta", "Dunewood", "Everline", "Verra"]},
    {"name": "drivetrain", "kind": "categorical", "category": "General Information", "subcategory": "Drivetrain",
     "vocabulary": ["AWD", "FWD", "RWD"]},
    {"name": "body_style", "kind": "categorical", "category": "Exterior Information", "subcategory": "Body Style",
     "vocabulary": ["Coupe", "Hatchback", "SUV", "Sedan", "Truck", "Van"]},
    {"name": "wheelbase", "kind": "numeric", "category": "Exterior Information", "subcategory": "Dimensions", "range": (90.0, 150.0)},
    {"name": "curb_weight", "kind": "numeric", "category": "Exterior Information", "subcategory": "Measurements", "range": (2400.0, 6800.0)},
    {"name": "front_legroom", "kind": "numeric", "category": "Interior Information", "subcategory": "Dimensions", "range": (38.0, 46.0)},
    {"name": "heated_seats", "kind": "categorical", "category": "Interior Information", "subcategory": "Seats",
     "vocabulary": ["no", "yes"]},
    {"name": "infotainment_screen", "kind": "categorical", "category": "Interior Information", "subcategory": "Entertainment",
     "vocabulary": ["large", "none", "standard"]},
    {"name": "horsepower", "kind": "numeric", "category": "Mechanical Information", "subcategory": "Engine & Performance", "range": (90.0, 700.0)},
    {"name": "transmission", "kind": "categorical", "category": "Mechanical Information", "subcategory": "Transmission",
     "vocabulary": ["Automatic", "CVT", "Manual"]},
    {"name": "airbag_count", "kind": "numeric", "category": "Safety Information", "subcategory": "Airbags", "range": (4.0, 10.0)},
    {"name": "adaptive_cruise", "kind": "categorical", "category": "Safety Information", "subcategory": "Driver Assistance",
     "vocabulary": ["no", "yes"]},
]

DEFAULT_PARAMETRIC_WEIGHTS = {
    "horsepower": 0.9,
    "msrp": -0.5,
    "mpg_city": 0.4,
    "airbag_count": 0.45,
    "heated_seats=yes": 0.6,
    "adaptive_cruise=yes": 0.7,
    "brand=Apex": 0.5,
    "brand=Verra": -0.4,
}

DEFAULT_KEYWORD_WEIGHTS = {"top": 1.0, "premium": 0.8, "but": -1.0}
_KEYWORD_SEGMENT = {"top": "review", "but": "review", "premium": "pros"}

_FILLER = (
    "cabin ride handling seats trim wheel layout road trips value comfort "
    "steering brakes engine noise space styling finish controls mileage"
).split()


@dataclass
class SyntheticSpec:
    """Generation parameters; shares are (parametric, text, image, noise)."""

    n: int = 2000
    shares: tuple[float, float, float, float] = (0.6, 0.25, 0.15, 0.0)
    target_score: str = "total"
    taxonomy: list[dict] = field(default_factory=lambda: [dict(d) for d in DEFAULT_TAXONOMY])
    parametric_weights: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_PARAMETRIC_WEIGHTS))
    interaction: tuple[tuple[str, str], float] | None = (("horsepower", "curb_weight"), 0.5)
    keyword_weights: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_KEYWORD_WEIGHTS))
    keyword_prob: float = 0.5
    tile_hw: tuple[int, int] = (32, 48)
    year_range: tuple[int, int] = (2007, 2022)
    score_center: float = 5.0
    score_scale: float = 1.5

    def schema_taxonomy(self) -> list[dict]:
        """Taxonomy declarations in manifest form (no generation params)."""
        return [
            {"name": d["name"], "kind": d["kind"], "category": d["category"], "subcategory": d["subcategory"]}
            for d in self.taxonomy
        ]

    @property
    def motif_view(self) -> str:
        return "dashboard" if self.target_score == "interior" else "front"

    @property
    def motif_kind(self) -> str:
        return "interior" if self.target_score == "interior" else "exterior"


@dataclass
class SyntheticTruth:
    """Per-record ground truth of the planted signal decomposition."""

    shares: tuple[float, float, float, float]
    components: dict[str, np.ndarray]  # standardized signals, keys parametric/text/image/noise
    contributions: dict[str, np.ndarray]  # sqrt(share) * component
    combined: np.ndarray  # sum of contributions, before the affine map
    score: np.ndarray  # final label values
    motif_intensity: np.ndarray
    keywords_planted: list[dict[str, bool]]


def _standardize(x: np.ndarray, label: str, share: float) -> np.ndarray:
    std = float(x.std())
    if std < 1e-12:
        if share > 0:
            raise ValueError(f"{label} component is constant but has share {share}")
        return np.zeros_like(x)
    return (x - x.mean()) / std


def _norm(value: float, rng_lo: float, rng_hi: float) -> float:
    return (value - rng_lo) / (rng_hi - rng_lo)


def _parametric_signal(spec: SyntheticSpec, values: dict) -> float:
    ranges = {d["name"]: d.get("range") for d in spec.taxonomy}
    total = 0.0
    for key, w in spec.parametric_weights.items():
        if "=" in key:
            name, wanted = key.split("=", 1)
            if str(values.get(name)) == wanted:
                total += w
        else:
            r = ranges[key]
            total += w * _norm(float(values[key]), *r)
    if spec.interaction is not None:
        (a, b), w = spec.interaction
        total += w * _norm(float(values[a]), *ranges[a]) * _norm(float(values[b]), *ranges[b])
    return total


def _make_text(spec: SyntheticSpec, planted: dict[str, bool], rng: np.random.Generator) -> dict[str, str]:
    def words(k: int) -> list[str]:
        return list(rng.choice(_FILLER, size=k))

    segs = {"review": words(int(rng.integers(4, 8))), "pros": words(int(rng.integers(2, 5))),
            "cons": words(int(rng.integers(2, 4))), "new_changes": words(int(rng.integers(2, 4)))}
    for kw, present in planted.items():
        if present:
            seg = segs[_KEYWORD_SEGMENT[kw]]
            seg.insert(int(rng.integers(0, len(seg) + 1)), kw)
    return {name: " ".join(ws) for name, ws in segs.items()}


def _make_views(
    spec: SyntheticSpec, kind: str, motif_u: float | None, rng: np.random.Generator
) -> dict[str, np.ndarray]:
    th, tw = spec.tile_hw
    views = EXTERIOR_VIEWS if kind == "exterior" else INTERIOR_VIEWS
    out = {}
    for view in views:
        base = 0.22 + 0.06 * rng.random((th, tw, 3), dtype=np.float32)
        if motif_u is not None and view == spec.motif_view:
            r0, r1 = int(th * 0.30), int(th * 0.70)
            c0, c1 = int(tw * 0.30), int(tw * 0.70)
            base[r0:r1, c0:c1] = 0.35 + 0.55 * motif_u
        out[view] = (np.clip(base, 0.0, 1.0) * 255).astype(np.uint8)
    return out


def generate_synthetic_corpus(
    spec: SyntheticSpec, seed: int = 0
) -> tuple[list[VehicleRecord], SyntheticTruth]:
    """Generate records plus the ground-truth signal decomposition."""
    if abs(sum(spec.shares) - 1.0) > 1e-9:
        raise ValueError(f"variance shares must sum to 1, got {spec.shares}")
    if spec.target_score not in SCORE_NAMES:
        raise ValueError(f"unknown target score {spec.target_score!r}")
    rng = np.random.default_rng(seed)

    values_per_record: list[dict] = []
    for _ in range(spec.n):
        values = {}
        for d in spec.taxonomy:
            if d["kind"] == "numeric":
                lo, hi = d["range"]
                values[d["name"]] = float(rng.uniform(lo, hi))
            else:
                values[d["name"]] = str(rng.choice(d["vocabulary"]))
        values_per_record.append(values)

    keywords = [
        {kw: bool(rng.random() < spec.keyword_prob) for kw in spec.keyword_weights}
        for _ in range(spec.n)
    ]
    motif_u = rng.random(spec.n)
    raw = {
        "parametric": np.array([_parametric_signal(spec, v) for v in values_per_record]),
        "text": np.array([sum(w for kw, w in spec.keyword_weights.items() if planted[kw]) for planted in keywords], dtype=np.float64),
        "image": motif_u.astype(np.float64),
        "noise": rng.standard_normal(spec.n),
    }
    share_of = dict(zip(("parametric", "text", "image", "noise"), spec.shares))
    components = {k: _standardize(v, k, share_of[k]) for k, v in raw.items()}
    contributions = {k: np.sqrt(share_of[k]) * z for k, z in components.items()}
    combined = sum(contributions.values())
    score = np.clip(spec.score_center + spec.score_scale * combined, 0.0, 10.0)

    # companion scores: correlated with the target but carrying fresh noise
    other_eps = rng.standard_normal((spec.n, len(SCORE_NAMES)))
    years = rng.integers(spec.year_range[0], spec.year_range[1] + 1, size=spec.n)

    records = []
    for i in range(spec.n):
        labels = {}
        for j, name in enumerate(SCORE_NAMES):
            if name == spec.target_score:
                labels[name] = float(score[i])
            else:
                labels[name] = float(np.clip(spec.score_center + spec.score_scale * (0.8 * combined[i] + 0.6 * other_eps[i, j]), 0.0, 10.0))
        ext_u = motif_u[i] if spec.motif_kind == "exterior" else None
        int_u = motif_u[i] if spec.motif_kind == "interior" else None
        records.append(
            VehicleRecord(
                id=f"synth-{i:05d}",
                year=int(years[i]),
                parametric=values_per_record[i],
                text_segments=_make_text(spec, keywords[i], rng),
                exterior_images=_make_views(spec, "exterior", ext_u, rng),
                interior_images=_make_views(spec, "interior", int_u, rng),
                labels=RatingLabels(**labels),
            )
        )
    truth = SyntheticTruth(
        shares=spec.shares,
        components=components,
        contributions=contributions,
        combined=combined,
        score=score,
        motif_intensity=motif_u,
        keywords_planted=keywords,
    )
    return records, truth


def materialize_corpus(
    records: list[VehicleRecord], out_dir: str | Path, taxonomy: list[dict] | None = None
) -> Path:
    """Write in-memory record images as PNGs plus a loadable manifest.json."""
    import json

    from PIL import Image

    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    entries = []
    for rec in records:
        entry = {
            "id": rec.id,
            "year": rec.year,
            "parametric": rec.parametric,
            "text_segments": rec.text_segments,
            "labels": rec.labels.present(),
        }
        for kind_key, images in (("exterior_images", rec.exterior_images), ("interior_images", rec.interior_images)):
            if images is None:
                continue
            paths = {}
            for view, arr in images.items():
                rel = f"images/{rec.id}_{kind_key.split('_')[0]}_{view}.png"
                if isinstance(arr, np.ndarray):
                    img = arr if arr.dtype == np.uint8 else (np.clip(arr, 0, 1) * 255).astype(np.uint8)
                    Image.fromarray(img).save(out_dir / rel)
                    paths[view] = rel
                else:
                    paths[view] = str(arr)
            entry[kind_key] = paths
        entries.append(entry)
    manifest = {"schema_taxonomy": taxonomy or [], "records": entries}
    (out_dir / "manifest.json").write_text(json.dumps(manifest), encoding="utf-8")
    return out_dir / "manifest.json"
