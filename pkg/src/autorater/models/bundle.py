"""Persisted trained models: one directory per bundle in a registry.

Layout::

    <registry>/<bundle_id>/
        config.json    architecture, score, modalities, background texts
        weights.bin    state dict + background tensors (tensor container)
        metrics.json   test R^2 and run statistics
        vocab.json     stub tokenizer vocabulary (text-bearing bundles)
        schema.json    parametric schema used at training time

Bundles are self-contained: loading reconstructs the network, tokenizer,
schema, compose configuration, and attribution backgrounds without the
original corpus.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn

from autorater.corpus.images import ComposeConfig
from autorater.corpus.types import ParametricSchema
from autorater.models.fusion import FusionNet, model_display_name
from autorater.models.imagenet import ImageNet, ImageNetConfig, PretrainedConvBackboneAdapter, StubConvBackbone
from autorater.models.parametric import ParametricNet, ParametricNetConfig
from autorater.models.textnet import PretrainedTextEncoderAdapter, StubTextEncoder, StubTokenizer, TextHeadConfig, TextNet

CONFIG_FILE = "config.json"
WEIGHTS_FILE = "weights.bin"
METRICS_FILE = "metrics.json"
VOCAB_FILE = "vocab.json"
SCHEMA_FILE = "schema.json"


class BundleError(RuntimeError):
    pass


@dataclass
class ModelBundle:
    bundle_id: str
    family: str
    kind: str  # parametric | text | image | fusion
    score_name: str
    modalities: tuple[str, ...]
    model: nn.Module
    schema: ParametricSchema
    compose_config: ComposeConfig = field(default_factory=ComposeConfig)
    tokenizer: StubTokenizer | None = None
    metrics: dict = field(default_factory=dict)
    arch: dict = field(default_factory=dict)
    background: dict[str, np.ndarray] = field(default_factory=dict)
    background_texts: list[str] = field(default_factory=list)

    @property
    def display_name(self) -> str:
        return model_display_name(self.modalities)

    def image_kind(self) -> str:
        return "interior" if self.score_name == "interior" else "exterior"


def _state_to_numpy(model: nn.Module) -> dict[str, np.ndarray]:
    return {f"state/{k}": v.detach().cpu().numpy() for k, v in model.state_dict().items()}


def _numpy_to_state(tensors: dict[str, np.ndarray]) -> dict[str, torch.Tensor]:
    return {k[len("state/") :]: torch.from_numpy(v) for k, v in tensors.items() if k.startswith("state/")}


def build_model(arch: dict, tokenizer: StubTokenizer | None, init_seed: int = 0) -> nn.Module:
    """Instantiate a network from its architecture description."""
    kind = arch["kind"]
    if kind == "parametric":
        return ParametricNet(ParametricNetConfig(**arch["net"]), init_seed=init_seed)
    if kind == "text":
        enc_spec = arch["encoder"]
        if enc_spec["type"] == "stub":
            if tokenizer is None:
                raise BundleError("stub text encoder needs a tokenizer")
            encoder = StubTextEncoder(
                tokenizer, width=enc_spec["width"], blocks=enc_spec["blocks"], heads=enc_spec["heads"], init_seed=init_seed
            )
        else:
            encoder = PretrainedTextEncoderAdapter(enc_spec["checkpoint"], max_len=enc_spec.get("max_len", 256))
        return TextNet(encoder, TextHeadConfig(**arch["head"]), init_seed=init_seed)
    if kind == "image":
        bb_spec = arch["backbone"]
        if bb_spec["type"] == "stub":
            backbone = StubConvBackbone(widths=tuple(bb_spec["widths"]), init_seed=init_seed)
        else:
            backbone = PretrainedConvBackboneAdapter(weights=bb_spec.get("weights"))
        cfg = dict(arch["net"])
        cfg["input_hw"] = tuple(cfg["input_hw"])
        return ImageNet(backbone, ImageNetConfig(**cfg), init_seed=init_seed)
    if kind == "fusion":
        subnets = {m: build_model(sub, tokenizer, init_seed) for m, sub in arch["subnets"].items()}
        return FusionNet(subnets, init_seed=init_seed, head_bias=arch.get("head_bias", 5.0), copy_subnets=False)
    raise BundleError(f"unknown model kind {kind!r}")


def describe_model(model: nn.Module) -> dict:
    """Architecture description sufficient to rebuild the network."""
    if isinstance(model, ParametricNet):
        return {"kind": "parametric", "net": model.config.to_json()}
    if isinstance(model, TextNet):
        enc = model.encoder
        if isinstance(enc, StubTextEncoder):
            enc_spec = {"type": "stub", "width": enc.width, "blocks": len(enc.blocks), "heads": enc.blocks[0].attn.num_heads}
        else:
            enc_spec = {"type": "pretrained", "checkpoint": getattr(enc, "checkpoint", ""), "max_len": getattr(enc, "max_len", 256)}
        return {"kind": "text", "encoder": enc_spec, "head": model.head_config.to_json()}
    if isinstance(model, ImageNet):
        bb = model.backbone
        if isinstance(bb, StubConvBackbone):
            widths = [m.out_channels for m in bb.features if isinstance(m, nn.Conv2d)]
            bb_spec = {"type": "stub", "widths": widths}
        else:
            bb_spec = {"type": "pretrained", "weights": None}  # weights come from the container
        return {"kind": "image", "backbone": bb_spec, "net": model.config.to_json()}
    if isinstance(model, FusionNet):
        return {
            "kind": "fusion",
            "subnets": {m: describe_model(model.subnets[m]) for m in model.modalities},
            "head_bias": 0.0,
        }
    raise BundleError(f"cannot describe model type {type(model).__name__}")


def save_bundle(bundle: ModelBundle, registry_dir: str | Path) -> Path:
    from autorater.tensorio import write_tensors

    out = Path(registry_dir) / bundle.bundle_id
    out.mkdir(parents=True, exist_ok=True)
    arch = bundle.arch or describe_model(bundle.model)
    config = {
        "bundle_id": bundle.bundle_id,
        "family": bundle.family,
        "kind": bundle.kind,
        "score_name": bundle.score_name,
        "modalities": list(bundle.modalities),
        "arch": arch,
        "compose": {
            "exterior_tile_hw": list(bundle.compose_config.exterior_tile_hw),
            "interior_tile_hw": list(bundle.compose_config.interior_tile_hw),
            "exterior_resize": bundle.compose_config.exterior_resize,
        },
        "background_texts": bundle.background_texts,
    }
    (out / CONFIG_FILE).write_text(json.dumps(config, indent=2), encoding="utf-8")
    (out / METRICS_FILE).write_text(json.dumps(bundle.metrics, indent=2), encoding="utf-8")
    (out / SCHEMA_FILE).write_text(json.dumps(bundle.schema.to_json(), indent=2), encoding="utf-8")
    if bundle.tokenizer is not None:
        bundle.tokenizer.save(out / VOCAB_FILE)
    tensors = _state_to_numpy(bundle.model)
    for name, arr in bundle.background.items():
        tensors[f"background/{name}"] = np.asarray(arr)
    write_tensors(out / WEIGHTS_FILE, tensors)
    return out


def load_bundle(bundle_dir: str | Path) -> ModelBundle:
    from autorater.tensorio import read_tensors

    bundle_dir = Path(bundle_dir)
    try:
        config = json.loads((bundle_dir / CONFIG_FILE).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise BundleError(f"{bundle_dir} is not a bundle (missing {CONFIG_FILE})")
    metrics = {}
    if (bundle_dir / METRICS_FILE).exists():
        metrics = json.loads((bundle_dir / METRICS_FILE).read_text(encoding="utf-8"))
    schema = ParametricSchema.from_json(json.loads((bundle_dir / SCHEMA_FILE).read_text(encoding="utf-8")))
    tokenizer = StubTokenizer.load(bundle_dir / VOCAB_FILE) if (bundle_dir / VOCAB_FILE).exists() else None

    model = build_model(config["arch"], tokenizer)
    tensors = read_tensors(bundle_dir / WEIGHTS_FILE)
    model.load_state_dict(_numpy_to_state(tensors))
    model.eval()

    compose = ComposeConfig(
        exterior_tile_hw=tuple(config["compose"]["exterior_tile_hw"]),
        interior_tile_hw=tuple(config["compose"]["interior_tile_hw"]),
        exterior_resize=config["compose"]["exterior_resize"],
    )
    background = {k[len("background/") :]: v for k, v in tensors.items() if k.startswith("background/")}
    return ModelBundle(
        bundle_id=config["bundle_id"],
        family=config["family"],
        kind=config["kind"],
        score_name=config["score_name"],
        modalities=tuple(config["modalities"]),
        model=model,
        schema=schema,
        compose_config=compose,
        tokenizer=tokenizer,
        metrics=metrics,
        arch=config["arch"],
        background=background,
        background_texts=config.get("background_texts", []),
    )


def load_registry(registry_dir: str | Path) -> dict[str, ModelBundle]:
    """Load every bundle directory under the registry root."""
    registry_dir = Path(registry_dir)
    bundles = {}
    if not registry_dir.is_dir():
        raise BundleError(f"registry directory {registry_dir} does not exist")
    for child in sorted(registry_dir.iterdir()):
        if child.is_dir() and (child / CONFIG_FILE).exists():
            bundle = load_bundle(child)
            bundles[bundle.bundle_id] = bundle
    return bundles
