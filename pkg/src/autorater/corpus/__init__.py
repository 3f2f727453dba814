"""Corpus ingestion, preprocessing, synthetic benchmarking, and splits."""

from autorater.corpus.types import (
    EXTERIOR_VIEWS,
    INTERIOR_VIEWS,
    FeatureDef,
    ParametricSchema,
    RatingLabels,
    VehicleRecord,
)
from autorater.corpus.manifest import load_manifest, load_manifest_with_report
from autorater.corpus.schema import build_schema, encode_parametric
from autorater.corpus.images import ComposeConfig, compose_images
from autorater.corpus.text import SerializedText, serialize_text
from autorater.corpus.splits import SplitAssignment, stratified_split
from autorater.corpus.synthetic import SyntheticSpec, SyntheticTruth, generate_synthetic_corpus
from autorater.corpus.processed import ProcessedCorpus, process_records

__all__ = [
    "EXTERIOR_VIEWS",
    "INTERIOR_VIEWS",
    "FeatureDef",
    "ParametricSchema",
    "RatingLabels",
    "VehicleRecord",
    "load_manifest",
    "load_manifest_with_report",
    "build_schema",
    "encode_parametric",
    "ComposeConfig",
    "compose_images",
    "SerializedText",
    "serialize_text",
    "SplitAssignment",
    "stratified_split",
    "SyntheticSpec",
    "SyntheticTruth",
    "generate_synthetic_corpus",
    "ProcessedCorpus",
    "process_records",
]
