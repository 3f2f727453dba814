import numpy as np
import pytest

from autorater.corpus import stratified_split
from autorater.corpus.types import RatingLabels, VehicleRecord


def make_records(labels):
    return [
        VehicleRecord(id=f"r{i}", year=2010, labels=RatingLabels(total=float(v)))
        for i, v in enumerate(labels)
    ]


def test_sizes_80_10_10():
    records = make_records(np.random.default_rng(0).uniform(0, 10, size=100))
    split = stratified_split(records, "total", (0.8, 0.1, 0.1), seed=3)
    assert (len(split.train_ids), len(split.val_ids), len(split.test_ids)) == (80, 10, 10)


def test_disjoint_and_complete():
    records = make_records(np.random.default_rng(1).uniform(0, 10, size=137))
    split = stratified_split(records, "total", seed=5)
    parts = [set(split.train_ids), set(split.val_ids), set(split.test_ids)]
    assert not (parts[0] & parts[1]) and not (parts[0] & parts[2]) and not (parts[1] & parts[2])
    assert parts[0] | parts[1] | parts[2] == {r.id for r in records}


def test_identical_labels_single_stratum():
    records = make_records([5.0] * 50)
    split = stratified_split(records, "total", seed=0)
    assert (len(split.train_ids), len(split.val_ids), len(split.test_ids)) == (40, 5, 5)


def test_deterministic_under_seed():
    records = make_records(np.random.default_rng(2).uniform(0, 10, size=90))
    a = stratified_split(records, "total", seed=9)
    b = stratified_split(records, "total", seed=9)
    assert a.train_ids == b.train_ids and a.val_ids == b.val_ids and a.test_ids == b.test_ids
    c = stratified_split(records, "total", seed=10)
    assert c.train_ids != a.train_ids


def test_per_stratum_composition_within_2pp():
    """Each split part's rounded-score distribution tracks the corpus."""
    rng = np.random.default_rng(3)
    labels = np.concatenate([np.full(150, 3.0), np.full(500, 5.0), np.full(350, 8.0)]) + rng.normal(0, 0.1, 1000)
    records = make_records(np.clip(labels, 0, 10))
    split = stratified_split(records, "total", seed=1)
    by_bin: dict[int, set[str]] = {}
    for r in records:
        by_bin.setdefault(int(round(r.labels.total)), set()).add(r.id)
    for part in (split.train_ids, split.val_ids, split.test_ids):
        part_set = set(part)
        for b, ids in by_bin.items():
            if len(ids) < 10:
                continue
            corpus_share = len(ids) / len(records)
            part_share = len(ids & part_set) / len(part)
            assert abs(part_share - corpus_share) <= 0.02, f"bin {b}: {part_share} vs {corpus_share}"


def test_small_bins_merge_rather_than_fragment():
    labels = [0.0, 0.1] + [5.0] * 48  # bin 0 has two members, below the merge floor
    records = make_records(labels)
    split = stratified_split(records, "total", seed=0)
    assert len(split.train_ids) + len(split.val_ids) + len(split.test_ids) == 50


def test_only_labeled_records_participate():
    records = make_records(np.linspace(0, 10, 30))
    records.append(VehicleRecord(id="unlabeled", year=2010, labels=RatingLabels(critics=5.0)))
    split = stratified_split(records, "total", seed=0)
    ids = set(split.train_ids) | set(split.val_ids) | set(split.test_ids)
    assert "unlabeled" not in ids
    assert len(ids) == 30


def test_bad_ratios_rejected():
    records = make_records(np.linspace(0, 10, 30))
    with pytest.raises(ValueError, match="sum to 1"):
        stratified_split(records, "total", (0.7, 0.2, 0.2))


def test_too_few_records_rejected():
    with pytest.raises(ValueError, match="at least 10"):
        stratified_split(make_records([5.0] * 5), "total")
