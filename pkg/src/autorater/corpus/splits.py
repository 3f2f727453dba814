"""Stratified train/val/test splitting, one independent split per score.

Strata are the labels rounded to the nearest integer (bins 0..10); bins
with fewer than 3 members are merged into the nearest nonempty bin.
Within each stratum, ids are shuffled by the seed and apportioned to the
three partitions by largest remainder, which keeps every stratum's split
proportions within one record of the requested ratios.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from autorater.corpus.types import VehicleRecord


@dataclass
class SplitAssignment:
    score_name: str
    seed: int
    ratios: tuple[float, float, float]
    train_ids: list[str] = field(default_factory=list)
    val_ids: list[str] = field(default_factory=list)
    test_ids: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "score_name": self.score_name,
            "seed": self.seed,
            "ratios": list(self.ratios),
            "train_ids": self.train_ids,
            "val_ids": self.val_ids,
            "test_ids": self.test_ids,
        }

    @classmethod
    def from_json(cls, d: dict) -> "SplitAssignment":
        return cls(
            score_name=d["score_name"],
            seed=d["seed"],
            ratios=tuple(d["ratios"]),
            train_ids=list(d["train_ids"]),
            val_ids=list(d["val_ids"]),
            test_ids=list(d["test_ids"]),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "SplitAssignment":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def _apportion(targets: list[float], n: int) -> list[int]:
    """Largest-remainder apportionment of n items toward float targets."""
    counts = [max(0, int(np.floor(x))) for x in targets]
    over = sum(counts) - n
    if over > 0:  # carried error pushed floors past n; trim largest counts
        for idx in sorted(range(3), key=lambda i: -counts[i])[:over]:
            counts[idx] -= 1
    remainders = [x - c for x, c in zip(targets, counts)]
    short = n - sum(counts)
    for idx in sorted(range(3), key=lambda i: -remainders[i])[:short]:
        counts[idx] += 1
    return counts


def _build_strata(ids: list[str], labels: list[float], min_bin: int = 3) -> dict[int, list[str]]:
    bins: dict[int, list[str]] = {}
    for rid, label in zip(ids, labels):
        b = int(round(label))
        bins.setdefault(b, []).append(rid)
    # merge undersized bins into the nearest nonempty other bin
    merged = True
    while merged and len(bins) > 1:
        merged = False
        for b in sorted(bins):
            if len(bins[b]) < min_bin:
                others = [o for o in bins if o != b]
                target = min(others, key=lambda o: (abs(o - b), o))
                bins[target].extend(bins.pop(b))
                merged = True
                break
    return bins


def stratified_split(
    records: list[VehicleRecord],
    score_name: str,
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
) -> SplitAssignment:
    """Split the records carrying ``score_name`` into train/val/test.

    Deterministic given (records, score_name, ratios, seed).
    """
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {ratios}")
    labeled = [(r.id, r.labels.get(score_name)) for r in records if r.labels.get(score_name) is not None]
    if len(labeled) < 10:
        raise ValueError(f"need at least 10 records labeled for {score_name!r}, found {len(labeled)}")

    ids = [rid for rid, _ in labeled]
    labels = [float(v) for _, v in labeled]
    strata = _build_strata(ids, labels)

    rng = np.random.default_rng([seed, zlib.crc32(score_name.encode("utf-8"))])
    split = SplitAssignment(score_name=score_name, seed=seed, ratios=tuple(ratios))
    carry = [0.0, 0.0, 0.0]  # diffuse rounding error so global sizes track the ratios
    for b in sorted(strata):
        members = sorted(strata[b])
        rng.shuffle(members)
        targets = [len(members) * r + c for r, c in zip(ratios, carry)]
        n_train, n_val, n_test = _apportion(targets, len(members))
        carry = [t - c for t, c in zip(targets, (n_train, n_val, n_test))]
        split.train_ids.extend(members[:n_train])
        split.val_ids.extend(members[n_train : n_train + n_val])
        split.test_ids.extend(members[n_train + n_val :])
    return split
