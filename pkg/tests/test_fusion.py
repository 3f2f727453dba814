import pytest
import torch

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

DESK_HW = (64, 96)


@pytest.fixture(scope="module")
def subnets():
    tok = StubTokenizer.build(["a premium top pick", "but a rough ride"])
    return {
        "parametric": ParametricNet(ParametricNetConfig(input_dim=6), init_seed=0),
        "text": TextNet(StubTextEncoder(tok, width=32, blocks=1, heads=2, init_seed=1), init_seed=1),
        "image": ImageNet(
            StubConvBackbone(widths=(4, 8, 16, 32, 512), init_seed=2), ImageNetConfig(input_hw=DESK_HW), init_seed=2
        ),
    }, tok


def batch_inputs(tok, n=2):
    ids, mask = tok.encode_batch(["a top pick"] * n)
    return {
        "parametric": torch.rand(n, 6),
        "token_ids": ids,
        "token_mask": mask,
        "image": torch.rand(n, 3, *DESK_HW),
    }


def test_joint_width_scales_with_modalities(subnets):
    nets, tok = subnets
    assert FusionNet({k: nets[k] for k in ("parametric", "text")}).joint_dim == 200
    assert FusionNet(nets).joint_dim == 300


def test_display_names():
    assert model_display_name(("parametric",)) == "parametric"
    assert model_display_name(("parametric", "text")) == "Par_Text-MML"
    assert model_display_name(("image", "parametric")) == "Par_Img-MML"
    assert model_display_name(("image", "text")) == "Img_Text-MML"
    assert model_display_name(("text", "image", "parametric")) == "Par_Text_Img-MML"


def test_single_modality_rejected(subnets):
    nets, _ = subnets
    with pytest.raises(ValueError, match="two modalities"):
        FusionNet({"parametric": nets["parametric"]})


def test_assemble_copies_subnet_weights_bitwise(subnets):
    nets, _ = subnets
    fusion = FusionNet(nets, init_seed=9)
    for modality in ("parametric", "text", "image"):
        source = dict(nets[modality].state_dict())
        copied = dict(fusion.subnets[modality].state_dict())
        assert source.keys() == copied.keys()
        for key in source:
            assert torch.equal(source[key], copied[key]), (modality, key)


def test_assemble_leaves_sources_untouched(subnets):
    nets, tok = subnets
    fusion = FusionNet(nets, init_seed=0)
    with torch.no_grad():
        fusion.subnets["parametric"].fc1.weight.add_(1.0)
    assert not torch.equal(fusion.subnets["parametric"].fc1.weight, nets["parametric"].fc1.weight)


def test_embeddings_match_sources_after_assemble(subnets):
    nets, tok = subnets
    fusion = FusionNet(nets, init_seed=3)
    fusion.eval()
    inputs = batch_inputs(tok)
    for net in nets.values():
        net.eval()
    joint, _ = fusion(**inputs)
    manual = torch.cat(
        [
            nets["parametric"].embed(inputs["parametric"]),
            nets["text"].embed(inputs["token_ids"], inputs["token_mask"]),
            nets["image"].embed(inputs["image"]),
        ],
        dim=-1,
    )
    torch.testing.assert_close(joint, manual)


def test_head_applies_relu_over_manual_concat(subnets):
    """Score equals ReLU(w . concatenated embeddings + b) computed by hand."""
    nets, tok = subnets
    fusion = FusionNet(nets, init_seed=4, head_bias=0.0)
    fusion.eval()
    inputs = batch_inputs(tok, n=3)
    joint, score = fusion(**inputs)
    expected = torch.relu(joint @ fusion.head.weight[0] + fusion.head.bias)
    torch.testing.assert_close(score, expected)
    assert (score >= 0).all()


def test_declaration_order_does_not_change_outputs(subnets):
    nets, tok = subnets
    inputs = batch_inputs(tok)
    a = FusionNet({"image": nets["image"], "parametric": nets["parametric"], "text": nets["text"]}, init_seed=7)
    b = FusionNet({"parametric": nets["parametric"], "text": nets["text"], "image": nets["image"]}, init_seed=7)
    a.eval()
    b.eval()
    ja, sa = a(**inputs)
    jb, sb = b(**inputs)
    torch.testing.assert_close(ja, jb)
    torch.testing.assert_close(sa, sb)
    assert a.modalities == b.modalities == ("parametric", "text", "image")


def test_missing_modality_input_rejected(subnets):
    nets, tok = subnets
    fusion = FusionNet(nets)
    inputs = batch_inputs(tok)
    del inputs["image"]
    with pytest.raises(ValueError, match="missing input 'image'"):
        fusion(**inputs)


def test_head_bias_initialized_to_mean(subnets):
    nets, _ = subnets
    fusion = FusionNet(nets, head_bias=6.25)
    assert float(fusion.head.bias) == pytest.approx(6.25)


def test_zero_joint_vector_scores_relu_of_bias(subnets):
    nets, _ = subnets
    fusion = FusionNet(nets, head_bias=-1.0)
    score = torch.relu(fusion.head(torch.zeros(1, fusion.joint_dim))).squeeze(-1)
    assert float(score) == 0.0
    fusion2 = FusionNet(nets, head_bias=2.5)
    score2 = torch.relu(fusion2.head(torch.zeros(1, fusion2.joint_dim))).squeeze(-1)
    assert float(score2) == pytest.approx(2.5)
