"""Shapley-value attributions and the aggregation analyses built on them."""

from autorater.interpret.attribution import (
    AttributionResult,
    RegionAggregate,
    TextSegmentAggregate,
    expected_gradients,
    expected_gradients_multi,
    local_accuracy_gap,
    local_accuracy_tolerance,
    parametric_forward_fn,
    shap_image,
    shap_parametric,
    shap_text,
)
from autorater.interpret.exact import exact_shapley
from autorater.interpret.aggregates import (
    CategoryAggregate,
    TrendSeries,
    aggregate_by_taxonomy,
    aggregate_regions,
    aggregate_segments,
    trend_over_years,
)

__all__ = [
    "AttributionResult",
    "RegionAggregate",
    "TextSegmentAggregate",
    "expected_gradients",
    "expected_gradients_multi",
    "local_accuracy_gap",
    "local_accuracy_tolerance",
    "parametric_forward_fn",
    "shap_image",
    "shap_parametric",
    "shap_text",
    "exact_shapley",
    "CategoryAggregate",
    "TrendSeries",
    "aggregate_by_taxonomy",
    "aggregate_regions",
    "aggregate_segments",
    "trend_over_years",
]
