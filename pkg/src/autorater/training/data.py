"""Model-ready tensors for one (corpus, score) pair."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from autorater.corpus.processed import ProcessedCorpus
from autorater.corpus.splits import SplitAssignment


@dataclass
class ScoreData:
    """Aligned input tensors plus labels for one target score.

    ``inputs`` may hold any of: ``parametric`` (N, d) float32,
    ``token_ids``/``token_mask`` (N, L), ``image`` (N, 3, H, W) float32.
    Models pick the keys they consume via their ``input_keys``.
    """

    score_name: str
    ids: list[str]
    labels: torch.Tensor  # (N,) float32, NaN where missing
    inputs: dict[str, torch.Tensor]

    def __post_init__(self) -> None:
        self.index_of = {rid: i for i, rid in enumerate(self.ids)}

    def indices_for(self, id_list: list[str]) -> torch.Tensor:
        return torch.tensor([self.index_of[r] for r in id_list], dtype=torch.long)

    def gather(self, model, idx: torch.Tensor) -> dict[str, torch.Tensor]:
        return {k: self.inputs[k][idx] for k in model.input_keys}

    def split_indices(self, split: SplitAssignment) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        return (
            self.indices_for(split.train_ids),
            self.indices_for(split.val_ids),
            self.indices_for(split.test_ids),
        )


def prepare_score_data(
    corpus: ProcessedCorpus,
    score_name: str,
    tokenizer=None,
    token_length: int | None = None,
    with_images: bool = True,
) -> ScoreData:
    """Assemble tensors for a score. Interior montages serve the interior
    score, exterior montages every other score."""
    inputs: dict[str, torch.Tensor] = {
        "parametric": torch.from_numpy(np.ascontiguousarray(corpus.parametric, dtype=np.float32))
    }
    if tokenizer is not None:
        ids, mask = tokenizer.encode_batch([t.text for t in corpus.texts], length=token_length)
        inputs["token_ids"] = ids
        inputs["token_mask"] = mask
    if with_images:
        images = corpus.images_for_score(score_name)
        if images is not None:
            inputs["image"] = torch.from_numpy(np.ascontiguousarray(images.transpose(0, 3, 1, 2), dtype=np.float32))
    return ScoreData(
        score_name=score_name,
        ids=list(corpus.ids),
        labels=torch.from_numpy(np.ascontiguousarray(corpus.labels[score_name], dtype=np.float32)),
        inputs=inputs,
    )
