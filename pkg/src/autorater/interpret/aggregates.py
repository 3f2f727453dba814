"""Cross-record attribution rollups: taxonomy groups, year trends, regions,
segments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from autorater.corpus.types import ParametricSchema
from autorater.interpret.attribution import AttributionResult, RegionAggregate, TextSegmentAggregate


@dataclass
class CategoryAggregate:
    """Mean absolute attribution per feature group over a record set.

    For each record the absolute attributions of a group's encoded
    features are summed; entries hold the mean of those per-record sums
    with standard errors. Every schema group appears, including ones
    whose attributions are all zero.
    """

    level: str  # "category" | "subcategory"
    entries: dict[str, float]
    stderr: dict[str, float]
    n_records: int

    def ranking(self) -> list[str]:
        return sorted(self.entries, key=self.entries.get, reverse=True)


def aggregate_by_taxonomy(
    results: list[AttributionResult],
    schema: ParametricSchema,
    level: str = "category",
) -> CategoryAggregate:
    if level not in ("category", "subcategory"):
        raise ValueError(f"level must be category or subcategory, got {level!r}")
    if not results:
        raise ValueError("need at least one attribution result")
    groups = schema.categories() if level == "category" else schema.subcategories()
    slices = schema.slices()
    per_record = {g: np.zeros(len(results)) for g in groups}
    for i, res in enumerate(results):
        phi = np.asarray(res.phi)
        if phi.shape != (schema.encoded_dim,):
            raise ValueError(f"attribution shape {phi.shape} does not match schema width {schema.encoded_dim}")
        for f in schema.features:
            g = f.category if level == "category" else f.subcategory
            per_record[g][i] += np.abs(phi[slices[f.name]]).sum()
    entries = {g: float(v.mean()) for g, v in per_record.items()}
    stderr = {g: float(v.std() / np.sqrt(len(results))) for g, v in per_record.items()}
    return CategoryAggregate(level=level, entries=entries, stderr=stderr, n_records=len(results))


@dataclass
class TrendSeries:
    feature: str
    series: dict[int, float]  # year -> mean signed attribution, years sorted

    def years(self) -> list[int]:
        return list(self.series)

    def values(self) -> list[float]:
        return list(self.series.values())


def trend_over_years(
    results: list[AttributionResult],
    years: list[int] | np.ndarray,
    feature: str,
    schema: ParametricSchema,
) -> TrendSeries:
    """Mean signed attribution of one feature per model year.

    A categorical feature's attribution is the sum over its one-hot block.
    Only years present in the record set appear.
    """
    slices = schema.slices()
    if feature not in slices:
        raise KeyError(f"unknown feature {feature!r}")
    if len(results) != len(years):
        raise ValueError("results and years must align")
    sl = slices[feature]
    by_year: dict[int, list[float]] = {}
    for res, year in zip(results, years):
        by_year.setdefault(int(year), []).append(float(np.asarray(res.phi)[sl].sum()))
    series = {year: float(np.mean(vals)) for year, vals in sorted(by_year.items())}
    return TrendSeries(feature=feature, series=series)


def aggregate_regions(region_aggs: list[RegionAggregate]) -> RegionAggregate:
    """Average per-instance quadrant aggregates across a record set."""
    if not region_aggs:
        raise ValueError("need at least one region aggregate")
    kinds = {r.kind for r in region_aggs}
    if len(kinds) != 1:
        raise ValueError(f"region aggregates mix kinds: {sorted(kinds)}")
    views = region_aggs[0].entries.keys()
    return RegionAggregate(
        kind=region_aggs[0].kind,
        entries={v: float(np.mean([r.entries[v] for r in region_aggs])) for v in views},
    )


def aggregate_segments(segment_aggs: list[TextSegmentAggregate]) -> TextSegmentAggregate:
    """Average per-instance segment aggregates across a record set."""
    if not segment_aggs:
        raise ValueError("need at least one segment aggregate")
    names: list[str] = []
    for agg in segment_aggs:
        for name in agg.entries:
            if name not in names:
                names.append(name)
    return TextSegmentAggregate(
        entries={n: float(np.mean([agg.entries.get(n, 0.0) for agg in segment_aggs])) for n in names}
    )
