"""Fusion regressor: concatenated unimodal embeddings, one dense ReLU head.

The 100-d penultimate embeddings of the selected pretrained unimodal nets
are concatenated in the fixed order (parametric, text, image) and mapped
to the score by a freshly initialized dense layer. Unimodal score heads
are unused; all copied weights fine-tune jointly during training.
"""

from __future__ import annotations

import copy

import torch
from torch import nn

from autorater.models.common import seeded

MODALITY_ORDER = ("parametric", "text", "image")

# Display names for every model family, matching the reporting convention.
FUSION_NAMES = {
    ("parametric", "text"): "Par_Text-MML",
    ("parametric", "image"): "Par_Img-MML",
    ("text", "image"): "Img_Text-MML",
    ("parametric", "text", "image"): "Par_Text_Img-MML",
}


def canonical_modalities(modalities) -> tuple[str, ...]:
    mods = tuple(m for m in MODALITY_ORDER if m in set(modalities))
    unknown = set(modalities) - set(MODALITY_ORDER)
    if unknown:
        raise ValueError(f"unknown modalities {sorted(unknown)}")
    return mods


def model_display_name(modalities) -> str:
    mods = canonical_modalities(modalities)
    if len(mods) == 1:
        return mods[0]
    return FUSION_NAMES[mods]


class FusionNet(nn.Module):
    modality = "fusion"

    def __init__(self, subnets: dict[str, nn.Module], init_seed: int = 0, head_bias: float = 5.0, copy_subnets: bool = True):
        """Assemble a fusion model from pretrained unimodal nets.

        ``subnets`` maps modality name to a trained net exposing
        ``embed``/``embedding_dim``. Networks are deep-copied by default so
        the sources stay untouched; the head starts fresh with its bias at
        ``head_bias`` (typically the training-set mean score).
        """
        super().__init__()
        self.modalities = canonical_modalities(subnets.keys())
        if len(self.modalities) < 2:
            raise ValueError("fusion needs at least two modalities")
        ordered = {m: (copy.deepcopy(subnets[m]) if copy_subnets else subnets[m]) for m in self.modalities}
        self.subnets = nn.ModuleDict(ordered)
        self.joint_dim = sum(net.embedding_dim for net in ordered.values())
        with seeded(init_seed):
            self.head = nn.Linear(self.joint_dim, 1)
        with torch.no_grad():
            self.head.bias.fill_(head_bias)

    @property
    def input_keys(self) -> tuple[str, ...]:
        keys: list[str] = []
        for m in self.modalities:
            keys.extend(self.subnets[m].input_keys)
        return tuple(keys)

    def joint_embedding(self, **inputs: torch.Tensor) -> torch.Tensor:
        parts = []
        for m in self.modalities:
            net = self.subnets[m]
            kwargs = {}
            for key in net.input_keys:
                if key not in inputs:
                    raise ValueError(f"missing input {key!r} for modality {m!r}")
                kwargs[key] = inputs[key]
            parts.append(net.embed(**kwargs))
        return torch.cat(parts, dim=-1)

    def forward(self, **inputs: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        joint = self.joint_embedding(**inputs)
        score = torch.relu(self.head(joint)).squeeze(-1)
        return joint, score

    def forward_from_parts(
        self,
        parametric: torch.Tensor | None = None,
        text_embedded: torch.Tensor | None = None,
        token_mask: torch.Tensor | None = None,
        image: torch.Tensor | None = None,
    ) -> tuple[torch.Tensor, torch.Tensor]:
        """Forward with the text path fed token embeddings instead of ids.

        Attribution entry point: gradients can flow into ``parametric``,
        ``text_embedded``, and ``image`` simultaneously.
        """
        parts = []
        for m in self.modalities:
            net = self.subnets[m]
            if m == "parametric":
                parts.append(net.embed(parametric))
            elif m == "text":
                parts.append(net.embed_from_embedded(text_embedded, token_mask))
            else:
                parts.append(net.embed(image))
        joint = torch.cat(parts, dim=-1)
        score = torch.relu(self.head(joint)).squeeze(-1)
        return joint, score
