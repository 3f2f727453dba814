"""Image regressor: conv backbone, self-attention over spatial tokens, head.

The backbone reduces an H x W x 3 montage by a total spatial stride of 32
into a 512-channel feature map (9 x 14 x 512 for the production 290 x 448
exterior montage). Spatial positions become tokens; single-head
dot-product attention with a 32-d scoring space mixes them; the flattened
result runs through dense 1024, dropout 0.2, dense 100 (the fusion
embedding), and a ReLU score head.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
from torch import nn

from autorater.models.common import seeded

FEATURE_CHANNELS = 512
SPATIAL_STRIDE = 32
ATTENTION_LATENT = 32


@dataclass
class ImageNetConfig:
    input_hw: tuple[int, int] = (290, 448)
    dense1: int = 1024
    dense2: int = 100
    dropout_p: float = 0.2
    latent_dim: int = ATTENTION_LATENT

    @property
    def grid_hw(self) -> tuple[int, int]:
        return self.input_hw[0] // SPATIAL_STRIDE, self.input_hw[1] // SPATIAL_STRIDE

    @property
    def token_count(self) -> int:
        gh, gw = self.grid_hw
        return gh * gw

    def to_json(self) -> dict:
        return {
            "input_hw": list(self.input_hw),
            "dense1": self.dense1,
            "dense2": self.dense2,
            "dropout_p": self.dropout_p,
            "latent_dim": self.latent_dim,
        }


def spatial_tokens(feature_map: torch.Tensor) -> torch.Tensor:
    """Flatten a (B, C, H', W') map to (B, H'*W', C) tokens, row-major."""
    b, c, h, w = feature_map.shape
    return feature_map.permute(0, 2, 3, 1).reshape(b, h * w, c)


def tokens_to_map(tokens: torch.Tensor, grid_hw: tuple[int, int]) -> torch.Tensor:
    """Inverse of :func:`spatial_tokens`."""
    b, n, c = tokens.shape
    h, w = grid_hw
    if n != h * w:
        raise ValueError(f"{n} tokens cannot fill a {h}x{w} grid")
    return tokens.reshape(b, h, w, c).permute(0, 3, 1, 2)


class SelfAttention(nn.Module):
    """Single-head dot-product attention; queries/keys project to a small
    scoring space while values keep the full channel width."""

    def __init__(self, model_dim: int = FEATURE_CHANNELS, latent_dim: int = ATTENTION_LATENT, init_seed: int = 0):
        super().__init__()
        if latent_dim > model_dim:
            raise ValueError("latent_dim must not exceed model_dim")
        self.model_dim = model_dim
        self.latent_dim = latent_dim
        with seeded(init_seed):
            self.wq = nn.Linear(model_dim, latent_dim, bias=False)
            self.wk = nn.Linear(model_dim, latent_dim, bias=False)
            self.wv = nn.Linear(model_dim, model_dim, bias=False)

    def attention_weights(self, tokens: torch.Tensor) -> torch.Tensor:
        q = self.wq(tokens)
        k = self.wk(tokens)
        scores = q @ k.transpose(-2, -1) / math.sqrt(self.latent_dim)
        return torch.softmax(scores, dim=-1)

    def forward(self, tokens: torch.Tensor) -> torch.Tensor:
        return self.attention_weights(tokens) @ self.wv(tokens)


class StubConvBackbone(nn.Module):
    """Five stride-2 conv blocks ending at 512 channels.

    Kernel-2 stride-2 convolutions give exact floor division by 2 per
    block, matching the pretrained extractor's floor-division-by-32
    output grid at any input size.
    """

    trainable = True
    out_channels = FEATURE_CHANNELS
    stride = SPATIAL_STRIDE

    def __init__(self, widths: tuple[int, ...] = (16, 32, 64, 128, FEATURE_CHANNELS), init_seed: int = 0):
        super().__init__()
        if widths[-1] != FEATURE_CHANNELS or len(widths) != 5:
            raise ValueError("stub backbone needs 5 blocks ending at 512 channels")
        layers = []
        c_in = 3
        with seeded(init_seed):
            for c_out in widths:
                layers += [nn.Conv2d(c_in, c_out, kernel_size=2, stride=2), nn.ReLU()]
                c_in = c_out
            self.features = nn.Sequential(*layers)

    def forward(self, images: torch.Tensor) -> torch.Tensor:
        return self.features(images)


class PretrainedConvBackboneAdapter(nn.Module):
    """Feature extractor of a pretrained 16-layer convolutional classifier.

    Requires ``torchvision``; the extractor's final pooling stage already
    yields 512 channels at stride 32.
    """

    trainable = True
    out_channels = FEATURE_CHANNELS
    stride = SPATIAL_STRIDE

    def __init__(self, weights: str | None = "DEFAULT"):
        super().__init__()
        try:
            from torchvision.models import vgg16
        except ImportError as exc:
            raise ImportError("PretrainedConvBackboneAdapter needs the 'torchvision' package") from exc
        self.features = vgg16(weights=weights).features

    def forward(self, images: torch.Tensor) -> torch.Tensor:
        return self.features(images)


class ImageNet(nn.Module):
    input_keys = ("image",)
    modality = "image"

    def __init__(
        self, backbone: nn.Module, config: ImageNetConfig | None = None, init_seed: int = 0, head_bias: float = 5.0
    ):
        super().__init__()
        self.config = config or ImageNetConfig()
        self.backbone = backbone
        flat_dim = self.config.token_count * FEATURE_CHANNELS
        with seeded(init_seed):
            self.attention = SelfAttention(FEATURE_CHANNELS, self.config.latent_dim, init_seed=init_seed)
            self.fc1 = nn.Linear(flat_dim, self.config.dense1)
            self.drop = nn.Dropout(self.config.dropout_p)
            self.fc2 = nn.Linear(self.config.dense1, self.config.dense2)
            self.head = nn.Linear(self.config.dense2, 1)
        with torch.no_grad():
            self.head.bias.fill_(head_bias)

    @property
    def embedding_dim(self) -> int:
        return self.config.dense2

    def freeze_backbone(self) -> None:
        for p in self.backbone.parameters():
            p.requires_grad_(False)

    def _check_shape(self, images: torch.Tensor) -> None:
        h, w = self.config.input_hw
        if images.ndim != 4 or images.shape[1] != 3 or images.shape[2] != h or images.shape[3] != w:
            raise ValueError(f"expected images shaped (B, 3, {h}, {w}), got {tuple(images.shape)}")

    def embed(self, image: torch.Tensor) -> torch.Tensor:
        self._check_shape(image)
        tokens = spatial_tokens(self.backbone(image))
        mixed = self.attention(tokens)
        h = torch.relu(self.fc1(mixed.reshape(mixed.shape[0], -1)))
        h = self.drop(h)
        return torch.relu(self.fc2(h))

    def forward(self, image: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        emb = self.embed(image)
        score = torch.relu(self.head(emb)).squeeze(-1)
        return emb, score
