import pytest
import torch

from entropy_lab.model import MAX_PARAMS, CharLM, ModelConfig


def small_cfg(vocab: int = 41) -> ModelConfig:
    return ModelConfig(vocab_size=vocab, dim=32, n_layers=1, n_heads=2, context=24)


def test_forward_shape():
    model = CharLM(small_cfg())
    x = torch.randint(41, (3, 24))
    assert model(x).shape == (3, 24, 41)


def test_shorter_sequences_allowed():
    model = CharLM(small_cfg())
    assert model(torch.randint(41, (2, 5))).shape == (2, 5, 41)


def test_sequence_longer_than_context_rejected():
    model = CharLM(small_cfg())
    with pytest.raises(ValueError, match="context"):
        model(torch.randint(41, (1, 25)))


def test_dim_heads_mismatch_rejected():
    with pytest.raises(ValueError, match="divisible"):
        ModelConfig(vocab_size=41, dim=30, n_heads=4)


def test_default_scale_fits_parameter_budget():
    model = CharLM(ModelConfig(vocab_size=60))
    assert model.param_count() <= MAX_PARAMS


def test_oversized_model_rejected():
    with pytest.raises(ValueError, match="budget"):
        CharLM(ModelConfig(vocab_size=60, dim=256, n_layers=8, n_heads=4))


def test_seeded_init_is_deterministic():
    torch.manual_seed(7)
    a = CharLM(small_cfg())
    torch.manual_seed(7)
    b = CharLM(small_cfg())
    for pa, pb in zip(a.parameters(), b.parameters()):
        assert torch.equal(pa, pb)


def test_causality():
    """Changing a later input never changes an earlier position's logits."""
    torch.manual_seed(0)
    model = CharLM(small_cfg())
    model.eval()
    x = torch.randint(41, (1, 10))
    y = x.clone()
    y[0, 7] = (y[0, 7] + 1) % 41
    with torch.no_grad():
        la, lb = model(x), model(y)
    assert torch.equal(la[0, :7], lb[0, :7])
    assert not torch.equal(la[0, 7:], lb[0, 7:])
