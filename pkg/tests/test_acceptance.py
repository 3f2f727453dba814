"""Acceptance gate: one test per criterion, each at its stated tolerance.

Quantitative targets reproduce the qualitative behavior of the system on
a synthetic benchmark at desk scale; the pass/fail line for each
criterion is printed by the conftest report hook.
"""

import dataclasses

import numpy as np
import pytest
import torch
from torch import nn

from autorater.corpus import (
    SyntheticSpec,
    build_schema,
    generate_synthetic_corpus,
    process_records,
    serialize_text,
    stratified_split,
)
from autorater.corpus.images import ComposeConfig
from autorater.experiments import (
    BenchmarkConfig,
    build_benchmark,
    build_demo_registry,
    run_comparison_suite,
)
from autorater.interpret import (
    aggregate_regions,
    exact_shapley,
    expected_gradients,
    local_accuracy_gap,
    local_accuracy_tolerance,
    shap_image,
    shap_parametric,
    shap_text,
)
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
    spatial_tokens,
)
from autorater.models.common import finite_difference_check
from autorater.training import (
    EarlyStopper,
    TrainConfig,
    prepare_score_data,
    r_squared,
    train,
)


# --------------------------------------------------------------------------- A1
def test_a1_shape_chain_paper_configuration():
    """290x448x3 montage -> 9x14x512 map -> 126x512 tokens -> 64512 flat."""
    backbone = StubConvBackbone(init_seed=0)
    net = ImageNet(backbone, ImageNetConfig(input_hw=(290, 448)), init_seed=0)
    image = torch.rand(1, 3, 290, 448)
    fmap = backbone(image)
    assert tuple(fmap.shape) == (1, 512, 9, 14)
    tokens = spatial_tokens(fmap)
    assert tuple(tokens.shape) == (1, 126, 512)
    mixed = net.attention(tokens)
    flat = mixed.reshape(1, -1)
    assert flat.shape[1] == 64512
    assert net.fc1.weight.shape == (1024, 64512)
    assert net.fc2.weight.shape == (100, 1024)
    net.eval()
    emb, score = net(image)
    assert emb.shape == (1, 100)
    assert float(score) >= 0.0
    # the interior montage shares the same grid
    assert tuple(backbone(torch.rand(1, 3, 300, 448)).shape) == (1, 512, 9, 14)


# --------------------------------------------------------------------------- A2
def test_a2_gradient_checks_all_nets():
    """Central finite differences vs autograd, >=20 params, rel err <= 1e-4."""
    gen = torch.Generator().manual_seed(424242)

    def rand(*shape):
        return torch.rand(*shape, generator=gen, dtype=torch.float64)

    tok = StubTokenizer.build(["a top premium pick", "but a plain ride", "quiet cabin trim"])
    ids, mask = tok.encode_batch(["a top pick but plain"])
    nets_inputs = []

    par = ParametricNet(ParametricNetConfig(input_dim=5, hidden1=6, hidden2=4, dropout_p=0.0), init_seed=0)
    nets_inputs.append((par, {"parametric": rand(1, 5)}))

    text = TextNet(StubTextEncoder(tok, width=16, blocks=1, heads=2, init_seed=1), init_seed=1)
    nets_inputs.append((text, {"token_ids": ids, "token_mask": mask}))

    image = ImageNet(
        StubConvBackbone(widths=(4, 8, 16, 32, 512), init_seed=2),
        ImageNetConfig(input_hw=(32, 32), dense1=16, dense2=8),
        init_seed=2,
    )
    nets_inputs.append((image, {"image": rand(1, 3, 32, 32)}))

    par_f = ParametricNet(ParametricNetConfig(input_dim=5, hidden1=6, hidden2=4, dropout_p=0.0), init_seed=3)
    text_f = TextNet(StubTextEncoder(tok, width=16, blocks=1, heads=2, init_seed=3), init_seed=3)
    image_f = ImageNet(
        StubConvBackbone(widths=(4, 8, 16, 32, 512), init_seed=3),
        ImageNetConfig(input_hw=(32, 32), dense1=16, dense2=8),
        init_seed=3,
    )
    fusion = FusionNet({"parametric": par_f, "text": text_f, "image": image_f}, init_seed=3, head_bias=4.0)
    nets_inputs.append(
        (
            fusion,
            {
                "parametric": rand(1, 5),
                "token_ids": ids,
                "token_mask": mask,
                "image": rand(1, 3, 32, 32),
            },
        )
    )

    for net, inputs in nets_inputs:
        worst = finite_difference_check(net.double(), inputs, label=4.5, n_params=22, seed=0, rel_tol=1e-4)
        assert worst <= 1e-4, type(net).__name__


# --------------------------------------------------------------------------- A3
def test_a3_shap_oracle_agreement():
    """Expected gradients vs exact coalition enumeration on 20 random MLPs
    (single hidden tanh layer; the smooth near-additive regime where the
    two attribution definitions coincide), plus exact linear agreement."""
    lin = nn.Linear(4, 1).double()
    with torch.no_grad():
        lin.weight.copy_(torch.tensor([[1.5, -2.0, 0.25, 3.0]]))
        lin.bias.fill_(0.4)
    rng = np.random.default_rng(99)
    background = rng.random((5, 4))
    x = rng.random(4)
    res = expected_gradients(lambda p: lin(p).squeeze(-1), background, x, samples=2000, seed=0, dtype=torch.float64)
    w = np.array([1.5, -2.0, 0.25, 3.0])
    phi_lin = exact_shapley(lambda X: X @ w + 0.4, background, x)
    np.testing.assert_allclose(res.phi, phi_lin, atol=1e-6)

    for trial in range(20):
        rng = np.random.default_rng(trial)
        d = int(rng.integers(4, 11))
        torch.manual_seed(trial)
        net = nn.Sequential(nn.Linear(d, 64), nn.Tanh(), nn.Linear(64, 1)).double().eval()

        def f_np(X):
            with torch.no_grad():
                return net(torch.from_numpy(np.asarray(X, float))).squeeze(-1).numpy()

        bg = rng.random((1, d))
        x = rng.random(d)
        phi_true = exact_shapley(f_np, bg, x)
        res = expected_gradients(lambda p: net(p).squeeze(-1), bg, x, samples=2000, seed=trial, dtype=torch.float64)
        scale = np.abs(phi_true).max()
        assert scale > 0
        big = np.abs(phi_true) > 0.05 * scale
        rel = np.abs(res.phi[big] - phi_true[big]) / np.abs(phi_true[big])
        assert rel.max() <= 0.05, f"trial {trial}: worst rel err {rel.max():.4f}"


# --------------------------------------------------------------------------- A4
@pytest.fixture(scope="module")
def desk_models():
    """Briefly trained desk-scale models of all three modalities."""
    spec = SyntheticSpec(n=160, shares=(0.45, 0.3, 0.25, 0.0), tile_hw=(32, 48))
    records, _ = generate_synthetic_corpus(spec, seed=21)
    schema = build_schema(records, taxonomy=spec.schema_taxonomy())
    compose = ComposeConfig(exterior_tile_hw=(32, 48), interior_tile_hw=(32, 48), exterior_resize=48)
    corpus = process_records(records, schema, compose, kinds=("exterior",))
    tok = StubTokenizer.build([t.text for t in corpus.texts])
    split = stratified_split(records, "total", seed=0)
    data = prepare_score_data(corpus, "total", tokenizer=tok)
    cfg = TrainConfig(lr0=1e-3, max_epochs=10, patience=10, seed=0)

    par = ParametricNet(ParametricNetConfig(input_dim=schema.encoded_dim), init_seed=0)
    train(par, data, split, cfg)
    text = TextNet(StubTextEncoder(tok, width=32, blocks=1, heads=2, init_seed=0), init_seed=0)
    train(text, data, split, cfg)
    image = ImageNet(StubConvBackbone(widths=(8, 16, 32, 64, 512), init_seed=0), ImageNetConfig(input_hw=(64, 96)), init_seed=0)
    train(image, data, split, dataclasses.replace(cfg, max_epochs=6, patience=6))
    return corpus, tok, par, text, image


def test_a4_local_accuracy_100_instances(desk_models):
    """|sum(phi) - (f(x) - E_bg f)| <= 0.01 * max(1, |f(x)|) everywhere."""
    corpus, tok, par, text, image = desk_models
    checked = 0

    bg_vecs = corpus.parametric[:60].astype(np.float64)
    for i in range(40):
        res = shap_parametric(par, bg_vecs, corpus.parametric[60 + i].astype(np.float64), samples=1200, seed=i)
        assert local_accuracy_gap(res) <= local_accuracy_tolerance(res), f"parametric instance {i}"
        checked += 1

    bg_texts = [t.text for t in corpus.texts[:40]]
    for i in range(30):
        res, _ = shap_text(text, bg_texts, corpus.texts[60 + i], samples=2000, seed=i)
        assert local_accuracy_gap(res) <= local_accuracy_tolerance(res), f"text instance {i}"
        checked += 1

    bg_imgs = corpus.exterior[:20].astype(np.float64)
    for i in range(30):
        res, _ = shap_image(image, bg_imgs, corpus.exterior[60 + i].astype(np.float64), samples=300, seed=i)
        assert local_accuracy_gap(res) <= local_accuracy_tolerance(res), f"image instance {i}"
        checked += 1

    assert checked == 100


# --------------------------------------------------------------------------- A5
@pytest.mark.slow
def test_a5_synthetic_ablation_ordering():
    """Unimodal ordering parametric > text > image (gaps >= 0.03) and the
    tri-modal fusion beating the best unimodal by >= 0.05, over 10 repeats
    on the pinned synthetic benchmark (n=2000, shares 0.6/0.25/0.15/0)."""
    bench = build_benchmark(BenchmarkConfig(n=2000, shares=(0.6, 0.25, 0.15, 0.0), corpus_seed=7, split_seed=0))
    reports = run_comparison_suite(bench, n_repeats=10, verbose=True)

    par = reports["parametric"].mean_r2
    text = reports["text"].mean_r2
    image = reports["image"].mean_r2
    trimodal = reports["Par_Text_Img-MML"].mean_r2
    print(
        f"\nA5 means: parametric={par:.3f} text={text:.3f} image={image:.3f} "
        f"Par_Text_Img-MML={trimodal:.3f}",
        flush=True,
    )
    assert par > text + 0.03, (par, text)
    assert text > image + 0.03, (text, image)
    best_unimodal = max(par, text, image)
    assert trimodal >= best_unimodal + 0.05, (trimodal, best_unimodal)


# --------------------------------------------------------------------------- A6
def test_a6_training_protocol():
    # scripted sequence: [1.0, 0.9, twenty stale epochs] stops at epoch 22
    stopper = EarlyStopper(patience=20)
    verdicts = [stopper.update(v) for v in [1.0, 0.9] + [0.9] * 20]
    assert verdicts[-1] == "stop" and "stop" not in verdicts[:-1]
    assert stopper.best_epoch == 1
    assert len(verdicts) == 22

    # best-epoch weights are the evaluated weights (hash equality)
    spec = SyntheticSpec(n=80, shares=(1.0, 0.0, 0.0, 0.0))
    records, _ = generate_synthetic_corpus(spec, seed=2)
    schema = build_schema(records, taxonomy=spec.schema_taxonomy())
    corpus = process_records(records, schema, kinds=())
    split = stratified_split(records, "total", seed=0)
    data = prepare_score_data(corpus, "total", with_images=False)
    result = train(
        ParametricNet(ParametricNetConfig(input_dim=schema.encoded_dim), init_seed=0),
        data,
        split,
        TrainConfig(max_epochs=8, patience=3, seed=0),
    )
    assert result.eval_weights_hash == result.best_weights_hash
    assert result.best_epoch == int(np.argmin(result.val_losses))

    # each split's stratum composition mirrors the corpus within +-2pp
    big_records, _ = generate_synthetic_corpus(SyntheticSpec(n=1000, shares=(1.0, 0, 0, 0)), seed=3)
    big_split = stratified_split(big_records, "total", seed=4)
    bins: dict[int, set[str]] = {}
    for r in big_records:
        bins.setdefault(int(round(r.labels.total)), set()).add(r.id)
    for part in (big_split.train_ids, big_split.val_ids, big_split.test_ids):
        part_set = set(part)
        for b, ids in bins.items():
            if len(ids) < 10:
                continue
            corpus_share = len(ids) / len(big_records)
            part_share = len(ids & part_set) / len(part)
            assert abs(part_share - corpus_share) <= 0.02, (
                f"stratum {b}: {part_share:.3f} in a split vs {corpus_share:.3f} in corpus"
            )

    # split determinism
    again = stratified_split(big_records, "total", seed=4)
    assert again.train_ids == big_split.train_ids
    assert again.val_ids == big_split.val_ids
    assert again.test_ids == big_split.test_ids


# --------------------------------------------------------------------------- A7
def test_a7_r_squared_unit_values():
    assert abs(r_squared([1.0, 2.0, 4.0], [1.0, 2.0, 4.0]) - 1.0) <= 1e-12
    labels = [0.0, 1.0, 2.0, 3.0]
    assert abs(r_squared([1.5] * 4, labels) - 0.0) <= 1e-12
    assert abs(r_squared([0.5, 1.5, 1.5, 2.5], labels) - 0.8) <= 1e-12


# --------------------------------------------------------------------------- A8
@pytest.mark.slow
def test_a8_attribution_localization():
    """Planted image motif localizes to the front quadrant and the planted
    'top' keyword attributes positively, in >= 9/10 seeds each."""
    image_hits = 0
    for seed in range(10):
        spec = SyntheticSpec(n=200, shares=(0.0, 0.0, 1.0, 0.0), tile_hw=(32, 48))
        records, _ = generate_synthetic_corpus(spec, seed=100 + seed)
        schema = build_schema(records, taxonomy=spec.schema_taxonomy())
        compose = ComposeConfig(exterior_tile_hw=(32, 48), interior_tile_hw=(32, 48), exterior_resize=48)
        corpus = process_records(records, schema, compose, kinds=("exterior",))
        split = stratified_split(records, "total", seed=seed)
        data = prepare_score_data(corpus, "total")
        net = ImageNet(
            StubConvBackbone(widths=(8, 16, 32, 64, 512), init_seed=seed),
            ImageNetConfig(input_hw=(64, 96)),
            init_seed=seed,
        )
        train(net, data, split, TrainConfig(lr0=1e-3, max_epochs=30, patience=30, seed=seed))
        bg = corpus.exterior[:16].astype(np.float64)
        test_rows = [corpus.index_of[rid] for rid in split.test_ids[:8]]
        aggs = [
            shap_image(net, bg, corpus.exterior[row].astype(np.float64), samples=200, seed=row)[1]
            for row in test_rows
        ]
        merged = aggregate_regions(aggs)
        ranked = sorted(merged.entries.items(), key=lambda kv: -kv[1])
        if ranked[0][0] == "front" and ranked[0][1] > ranked[1][1]:
            image_hits += 1
    print(f"\nA8 image localization: {image_hits}/10 seeds", flush=True)
    assert image_hits >= 9

    text_hits = 0
    for seed in range(10):
        spec = SyntheticSpec(n=150, shares=(0.0, 1.0, 0.0, 0.0))
        records, _ = generate_synthetic_corpus(spec, seed=200 + seed)
        schema = build_schema(records, taxonomy=spec.schema_taxonomy())
        corpus = process_records(records, schema, kinds=())
        split = stratified_split(records, "total", seed=seed)
        tok = StubTokenizer.build([corpus.texts[corpus.index_of[r]].text for r in split.train_ids])
        data = prepare_score_data(corpus, "total", tokenizer=tok, with_images=False)
        net = TextNet(StubTextEncoder(tok, width=32, blocks=1, heads=2, init_seed=seed), init_seed=seed)
        train(net, data, split, TrainConfig(lr0=1e-3, max_epochs=15, patience=15, seed=seed))
        bg = [corpus.texts[corpus.index_of[r]].text for r in split.train_ids[:30]]
        phis = []
        for rid in split.test_ids:
            stext = corpus.texts[corpus.index_of[rid]]
            if " top " not in f" {stext.text} ":
                continue
            res, seg = shap_text(net, bg, stext, samples=500, seed=corpus.index_of[rid])
            phis.extend(t["phi"] for t in seg.tokens if t["token"] == "top")
        if phis and np.mean(phis) > 0:
            text_hits += 1
    print(f"A8 keyword attribution: {text_hits}/10 seeds", flush=True)
    assert text_hits >= 9


# --------------------------------------------------------------------------- A9
def test_a9_service_contract(tmp_path):
    """Schema round-trip, determinism, 422 field paths, and local accuracy
    in the explain payload, with no UI built."""
    from fastapi.testclient import TestClient

    from autorater.service import create_app

    registry = build_demo_registry(tmp_path / "registry", n=80, train_epochs=4, scores=("total", "safety"))
    app = create_app(registry)
    with TestClient(app) as client:
        schema = client.get("/schema").json()
        body = {"bundle": "demo", "parametric": {}}
        for f in schema["features"]:
            body["parametric"][f["name"]] = (
                (f["numeric_min"] + f["numeric_max"]) / 2 if f["kind"] == "numeric" else f["vocabulary"][0]
            )
        r1 = client.post("/predict", json=body)
        assert r1.status_code == 200
        r2 = client.post("/predict", json=body)
        assert r1.content == r2.content  # byte-identical duplicates

        bad = {"bundle": "demo", "parametric": {**body["parametric"], "mystery_feature": 1}}
        resp = client.post("/predict", json=bad)
        assert resp.status_code == 422
        assert resp.json()["error"]["code"] == "unknown_feature"
        assert resp.json()["error"]["field"] == "parametric.mystery_feature"

        explain = client.post("/explain", json={**body, "score": "total"}).json()
        gap = abs(explain["attribution_total"] - (explain["prediction"] - explain["expected_value"]))
        assert gap <= 0.01 * max(1.0, abs(explain["prediction"]))

        bundles = client.get("/bundles").json()["bundles"]
        assert len(bundles) == 4
