"""Unimodal and fusion regressors over parametric, text, and image inputs."""

from autorater.models.common import seeded, squared_error_gradients, weights_hash
from autorater.models.parametric import ParametricNet, ParametricNetConfig
from autorater.models.textnet import (
    PretrainedTextEncoderAdapter,
    StubTextEncoder,
    StubTokenizer,
    TextHeadConfig,
    TextNet,
)
from autorater.models.imagenet import (
    ImageNet,
    ImageNetConfig,
    PretrainedConvBackboneAdapter,
    SelfAttention,
    StubConvBackbone,
    spatial_tokens,
)
from autorater.models.fusion import FUSION_NAMES, FusionNet, model_display_name

__all__ = [
    "seeded",
    "squared_error_gradients",
    "weights_hash",
    "ParametricNet",
    "ParametricNetConfig",
    "TextNet",
    "TextHeadConfig",
    "StubTokenizer",
    "StubTextEncoder",
    "PretrainedTextEncoderAdapter",
    "ImageNet",
    "ImageNetConfig",
    "SelfAttention",
    "StubConvBackbone",
    "PretrainedConvBackboneAdapter",
    "spatial_tokens",
    "FusionNet",
    "FUSION_NAMES",
    "model_display_name",
]
