import json

import pytest
import torch

from entropy_lab.data import synthetic_corpus
from entropy_lab.generate import generate_jsonl, load_checkpoint, sample
from entropy_lab.model import ModelConfig
from entropy_lab.train import TrainConfig, train


@pytest.fixture(scope="module")
def checkpoint(tmp_path_factory):
    text = synthetic_corpus(6_000, seed=2)
    cfg = TrainConfig(lam=0.25, steps=25, batch_size=8, lr=3e-3, seed=3, min_corpus_tokens=1_000)
    base = ModelConfig(vocab_size=0, dim=32, n_layers=1, n_heads=2, context=32)
    path = tmp_path_factory.mktemp("ck") / "ck.pt"
    train(text, base, cfg, path)
    return path


def test_checkpoint_roundtrip(checkpoint):
    ck = load_checkpoint(checkpoint)
    assert ck.lam == 0.25
    assert ck.val_perplexity > 1.0
    assert len(ck.config_digest) == 64
    assert len(ck.vocab) > 10


def test_sample_count_and_length(checkpoint):
    ck = load_checkpoint(checkpoint)
    texts = sample(ck, n=3, max_new_tokens=40, temperature=0.7, seed=0)
    assert len(texts) == 3
    assert all(len(t) == 40 for t in texts)


def test_sample_deterministic_per_seed(checkpoint):
    ck = load_checkpoint(checkpoint)
    a = sample(ck, 4, 30, 0.7, seed=11)
    b = sample(ck, 4, 30, 0.7, seed=11)
    c = sample(ck, 4, 30, 0.7, seed=12)
    assert a == b
    assert a != c


def test_generate_jsonl_bytes_identical_per_seed(checkpoint, tmp_path):
    p1 = generate_jsonl(checkpoint, tmp_path / "a.jsonl", n=5, max_new_tokens=30, seed=7)
    p2 = generate_jsonl(checkpoint, tmp_path / "b.jsonl", n=5, max_new_tokens=30, seed=7)
    assert p1.read_bytes() == p2.read_bytes()


def test_generate_jsonl_layout(checkpoint, tmp_path):
    path = generate_jsonl(
        checkpoint, tmp_path / "s.jsonl", n=4, max_new_tokens=25, temperature=0.8, seed=5
    )
    lines = path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 5
    meta = json.loads(lines[0])["meta"]
    assert meta["schema"] == "entropy-lab-samples/1"
    assert meta["lambda"] == 0.25
    assert meta["seed"] == 5
    assert meta["temperature"] == 0.8
    assert meta["n"] == 4
    for i, line in enumerate(lines[1:]):
        doc = json.loads(line)
        assert doc["id"].endswith(f"-{i:04d}")
        assert isinstance(doc["text"], str) and doc["text"]


def test_generate_zero_samples_writes_metadata_only(checkpoint, tmp_path):
    path = generate_jsonl(checkpoint, tmp_path / "empty.jsonl", n=0, seed=1)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 1
    assert json.loads(lines[0])["meta"]["n"] == 0


def test_generate_validates_arguments(checkpoint, tmp_path):
    with pytest.raises(ValueError, match="nonnegative"):
        generate_jsonl(checkpoint, tmp_path / "x.jsonl", n=-1)
    ck = load_checkpoint(checkpoint)
    with pytest.raises(ValueError, match="temperature"):
        sample(ck, 1, 5, 0.0, seed=0)
    with pytest.raises(ValueError, match="prompt"):
        sample(ck, 1, 5, 0.7, seed=0, prompt="")


def test_prompt_not_included_in_output(checkpoint):
    ck = load_checkpoint(checkpoint)
    prompt = "the "
    texts = sample(ck, 2, 10, 0.7, seed=3, prompt=prompt)
    assert all(len(t) == 10 for t in texts)


def test_temperature_changes_samples(checkpoint):
    ck = load_checkpoint(checkpoint)
    cold = sample(ck, 3, 40, 0.2, seed=6)
    hot = sample(ck, 3, 40, 2.0, seed=6)
    assert cold != hot


def test_loaded_model_in_eval_mode(checkpoint):
    ck = load_checkpoint(checkpoint)
    assert not ck.model.training
    x = torch.randint(len(ck.vocab), (1, 8))
    with torch.no_grad():
        assert torch.equal(ck.model(x), ck.model(x))
