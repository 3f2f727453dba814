"""End-to-end experiment drivers: benchmark corpora, model factories, and
the unimodal-versus-fusion comparison suite.

The comparison protocol mirrors the evaluation design: all models
predicting one score share a single stratified split; every experiment
repeats over consecutive seeds; fusion models assemble from the unimodal
networks trained under the same seed and then fine-tune jointly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import torch

from autorater.corpus import (
    ComposeConfig,
    ParametricSchema,
    SplitAssignment,
    SyntheticSpec,
    build_schema,
    generate_synthetic_corpus,
    process_records,
    stratified_split,
)
from autorater.corpus.processed import ProcessedCorpus
from autorater.models import (
    FusionNet,
    ImageNet,
    ImageNetConfig,
    ParametricNet,
    ParametricNetConfig,
    StubConvBackbone,
    StubTextEncoder,
    StubTokenizer,
    TextNet,
    model_display_name,
)
from autorater.training import (
    ExperimentReport,
    RunResult,
    ScoreData,
    TrainConfig,
    prepare_score_data,
    train,
)

FUSION_COMBOS = (
    ("parametric", "text"),
    ("parametric", "image"),
    ("text", "image"),
    ("parametric", "text", "image"),
)


@dataclass
class BenchmarkConfig:
    """Desk-scale synthetic benchmark settings."""

    n: int = 2000
    shares: tuple[float, float, float, float] = (0.6, 0.25, 0.15, 0.0)
    score_name: str = "total"
    corpus_seed: int = 7
    split_seed: int = 0
    tile_hw: tuple[int, int] = (32, 48)
    # light stub encoders keep single-core runtimes inside the budget
    text_width: int = 64
    text_blocks: int = 1
    text_heads: int = 2
    image_widths: tuple[int, ...] = (8, 16, 32, 64, 512)
    unimodal: TrainConfig = field(default_factory=lambda: TrainConfig(lr0=1e-3, max_epochs=40, patience=8))
    fusion: TrainConfig = field(default_factory=lambda: TrainConfig(lr0=5e-4, max_epochs=12, patience=4))


@dataclass
class Benchmark:
    corpus: ProcessedCorpus
    schema: ParametricSchema
    split: SplitAssignment
    data: ScoreData
    tokenizer: StubTokenizer
    config: BenchmarkConfig
    truth: object | None = None


def build_benchmark(config: BenchmarkConfig | None = None) -> Benchmark:
    """Generate, preprocess, and split a synthetic benchmark corpus."""
    config = config or BenchmarkConfig()
    spec = SyntheticSpec(
        n=config.n,
        shares=config.shares,
        target_score=config.score_name,
        tile_hw=config.tile_hw,
    )
    records, truth = generate_synthetic_corpus(spec, seed=config.corpus_seed)
    schema = build_schema(records, taxonomy=spec.schema_taxonomy())
    compose = ComposeConfig(
        exterior_tile_hw=config.tile_hw,
        interior_tile_hw=config.tile_hw,
        exterior_resize=config.tile_hw[1],
    )
    kind = "interior" if config.score_name == "interior" else "exterior"
    corpus = process_records(records, schema, compose, kinds=(kind,))
    split = stratified_split(records, config.score_name, seed=config.split_seed)
    train_texts = [corpus.texts[corpus.index_of[rid]].text for rid in split.train_ids]
    tokenizer = StubTokenizer.build(train_texts)
    data = prepare_score_data(corpus, config.score_name, tokenizer=tokenizer)
    return Benchmark(corpus=corpus, schema=schema, split=split, data=data, tokenizer=tokenizer, config=config, truth=truth)


def make_parametric(bench: Benchmark, seed: int) -> ParametricNet:
    return ParametricNet(ParametricNetConfig(input_dim=bench.schema.encoded_dim), init_seed=seed)


def make_text(bench: Benchmark, seed: int) -> TextNet:
    cfg = bench.config
    encoder = StubTextEncoder(
        bench.tokenizer, width=cfg.text_width, blocks=cfg.text_blocks, heads=cfg.text_heads, init_seed=seed
    )
    return TextNet(encoder, init_seed=seed)


def make_image(bench: Benchmark, seed: int) -> ImageNet:
    cfg = bench.config
    h, w = cfg.tile_hw
    return ImageNet(
        StubConvBackbone(widths=cfg.image_widths, init_seed=seed),
        ImageNetConfig(input_hw=(2 * h, 2 * w)),
        init_seed=seed,
    )


UNIMODAL_FACTORIES = {"parametric": make_parametric, "text": make_text, "image": make_image}


def train_mean_score(bench: Benchmark) -> float:
    idx = bench.data.indices_for(bench.split.train_ids)
    return float(bench.data.labels[idx].mean())


def run_comparison_suite(
    bench: Benchmark,
    n_repeats: int = 10,
    modalities: tuple[str, ...] = ("parametric", "text", "image"),
    combos: tuple[tuple[str, ...], ...] = FUSION_COMBOS,
    verbose: bool = False,
    on_result=None,
) -> dict[str, ExperimentReport]:
    """Train unimodal models and fusion models over repeated seeds.

    Returns a report per model name. Fusions reuse the unimodal networks
    trained at the same seed as their pretrained sources. ``on_result``
    (model_name, seed, RunResult, model) fires after every run, e.g. to
    keep the best checkpoint.
    """
    cfg = bench.config
    runs: dict[str, list[RunResult]] = {}
    head_bias = train_mean_score(bench)

    def finish(name: str, seed: int, result: RunResult, model) -> None:
        runs.setdefault(name, []).append(result)
        if on_result is not None:
            on_result(name, seed, result, model)
        if verbose:
            print(f"[seed {seed}] {name}: test R2 {result.test_r2:.3f}", flush=True)

    for i in range(n_repeats):
        seed = cfg.unimodal.seed + i
        trained: dict[str, torch.nn.Module] = {}
        for modality in modalities:
            model = UNIMODAL_FACTORIES[modality](bench, seed)
            run_cfg = _with(cfg.unimodal, seed=seed, target_score=cfg.score_name)
            result = train(model, bench.data, bench.split, run_cfg)
            trained[modality] = model
            finish(modality, seed, result, model)
        for combo in combos:
            if not set(combo) <= set(modalities):
                continue
            fusion = FusionNet({m: trained[m] for m in combo}, init_seed=seed, head_bias=head_bias)
            run_cfg = _with(cfg.fusion, seed=seed, target_score=cfg.score_name)
            result = train(fusion, bench.data, bench.split, run_cfg)
            finish(model_display_name(combo), seed, result, fusion)

    reports = {}
    for name, results in runs.items():
        r2s = np.array([r.test_r2 for r in results])
        reports[name] = ExperimentReport(
            model_name=name,
            score_name=cfg.score_name,
            n_repeats=len(results),
            mean_r2=float(r2s.mean()),
            std_r2=float(r2s.std()),
            stderr_r2=float(r2s.std() / math.sqrt(len(results))),
            runs=results,
        )
    return reports


def _with(config: TrainConfig, **overrides) -> TrainConfig:
    import dataclasses

    return dataclasses.replace(config, **overrides)


def make_bundle(
    model,
    corpus: ProcessedCorpus,
    split: SplitAssignment,
    score_name: str,
    bundle_id: str,
    family: str,
    tokenizer: StubTokenizer | None = None,
    metrics: dict | None = None,
    background_seed: int = 0,
    n_background: int = 100,
    n_background_images: int = 20,
):
    """Package a trained model with schema, tokenizer, and attribution
    backgrounds sampled from the training split."""
    from autorater.models.bundle import ModelBundle

    kind = getattr(model, "modality", "fusion")
    modalities = model.modalities if kind == "fusion" else (kind,)

    rng = np.random.default_rng(background_seed)
    train_ids = list(split.train_ids)
    sample = list(rng.choice(train_ids, size=min(n_background, len(train_ids)), replace=False))
    rows = [corpus.index_of[rid] for rid in sample]

    background: dict[str, np.ndarray] = {}
    background_texts: list[str] = []
    if "parametric" in modalities:
        background["parametric"] = corpus.parametric[rows].astype(np.float32)
    if "text" in modalities:
        background_texts = [corpus.texts[i].text for i in rows]
    if "image" in modalities:
        images = corpus.images_for_score(score_name)
        background["image"] = images[rows[:n_background_images]].astype(np.float32)

    return ModelBundle(
        bundle_id=bundle_id,
        family=family,
        kind=kind,
        score_name=score_name,
        modalities=tuple(modalities),
        model=model,
        schema=corpus.schema,
        compose_config=corpus.compose_config,
        tokenizer=tokenizer if "text" in modalities else None,
        metrics=metrics or {},
        background=background,
        background_texts=background_texts,
    )


def build_demo_registry(
    out_dir,
    n: int = 120,
    corpus_seed: int = 11,
    tile_hw: tuple[int, int] = (32, 48),
    train_epochs: int = 8,
    family: str = "demo",
    scores: tuple[str, ...] = ("total", "critics", "performance", "safety", "interior"),
):
    """Train a small registry on a synthetic corpus: per score, one
    parametric bundle (briefly trained) and one tri-modal fusion bundle.

    Intended for service contract tests and the what-if UI demo; quality
    is secondary to having live, explainable bundles for every score.
    """
    from pathlib import Path

    from autorater.models.bundle import save_bundle

    spec = SyntheticSpec(n=n, tile_hw=tile_hw)
    records, _ = generate_synthetic_corpus(spec, seed=corpus_seed)
    schema = build_schema(records, taxonomy=spec.schema_taxonomy())
    compose = ComposeConfig(exterior_tile_hw=tile_hw, interior_tile_hw=tile_hw, exterior_resize=tile_hw[1])
    corpus = process_records(records, schema, compose)
    tokenizer = StubTokenizer.build([t.text for t in corpus.texts])

    out_dir = Path(out_dir)
    h, w = tile_hw
    for score in scores:
        split = stratified_split(records, score, seed=0)
        data = prepare_score_data(corpus, score, tokenizer=tokenizer)
        cfg = TrainConfig(lr0=1e-3, max_epochs=train_epochs, patience=train_epochs, target_score=score, seed=0)

        par = ParametricNet(ParametricNetConfig(input_dim=schema.encoded_dim), init_seed=0)
        par_run = train(par, data, split, cfg)
        save_bundle(
            make_bundle(par, corpus, split, score, f"{score}-parametric", family,
                        tokenizer=tokenizer, metrics={"test_r2": par_run.test_r2}),
            out_dir,
        )

        text = TextNet(StubTextEncoder(tokenizer, width=32, blocks=1, heads=2, init_seed=0), init_seed=0)
        image = ImageNet(
            StubConvBackbone(widths=(8, 16, 32, 64, 512), init_seed=0),
            ImageNetConfig(input_hw=(2 * h, 2 * w)),
            init_seed=0,
        )
        fusion = FusionNet({"parametric": par, "text": text, "image": image}, init_seed=0,
                           head_bias=float(data.labels[data.indices_for(split.train_ids)].mean()))
        fusion_cfg = _with(cfg, max_epochs=2, patience=2)
        fusion_run = train(fusion, data, split, fusion_cfg)
        save_bundle(
            make_bundle(fusion, corpus, split, score, f"{score}-par_text_img", family,
                        tokenizer=tokenizer, metrics={"test_r2": fusion_run.test_r2}),
            out_dir,
        )
    return out_dir
