"""Sampling from a checkpoint into scoring-ready JSONL.

The output file opens with one metadata line (an object without a
"text" key, which the scoring tool's ingest skips) followed by one
document object per sample. Sampling is batched and driven by a single
seeded generator, so a given (checkpoint, arguments, seed) triple
always produces byte-identical output. n = 0 writes the metadata line
and nothing else.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import torch
import torch.nn.functional as F

from .data import Vocab
from .model import CharLM, ModelConfig

SAMPLES_SCHEMA = "entropy-lab-samples/1"


@dataclass(frozen=True)
class Checkpoint:
    model: CharLM
    vocab: Vocab
    lam: float
    config_digest: str
    val_perplexity: float
    mean_output_entropy: float


def load_checkpoint(path: str | Path) -> Checkpoint:
    blob = torch.load(path, map_location="cpu", weights_only=False)
    cfg = ModelConfig(**blob["model_config"])
    model = CharLM(cfg)
    model.load_state_dict(blob["model_state"])
    model.eval()
    return Checkpoint(
        model=model,
        vocab=Vocab(tuple(blob["vocab"])),
        lam=blob["train_config"]["lam"],
        config_digest=blob["config_digest"],
        val_perplexity=blob["val_perplexity"],
        mean_output_entropy=blob["mean_output_entropy"],
    )


@torch.no_grad()
def sample(
    ckpt: Checkpoint,
    n: int,
    max_new_tokens: int,
    temperature: float,
    seed: int,
    prompt: str = "\n",
) -> list[str]:
    """Draw n continuations of `prompt`, all in one batch."""
    if temperature <= 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    if not prompt:
        raise ValueError("prompt must be at least one character")
    if n == 0:
        return []
    model, vocab = ckpt.model, ckpt.vocab
    gen = torch.Generator().manual_seed(seed)
    idx = vocab.encode(prompt).repeat(n, 1)
    for _ in range(max_new_tokens):
        window = idx[:, -model.cfg.context :]
        logits = model(window)[:, -1, :] / temperature
        probs = F.softmax(logits, dim=-1)
        nxt = torch.multinomial(probs, 1, generator=gen)
        idx = torch.cat([idx, nxt], dim=1)
    return [vocab.decode(row) for row in idx[:, len(prompt) :]]


def generate_jsonl(
    checkpoint_path: str | Path,
    out_path: str | Path,
    n: int,
    max_new_tokens: int = 256,
    temperature: float = 0.7,
    seed: int = 0,
    prompt: str = "\n",
) -> Path:
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    ckpt = load_checkpoint(checkpoint_path)
    texts = sample(ckpt, n, max_new_tokens, temperature, seed, prompt)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    meta = {
        "meta": {
            "schema": SAMPLES_SCHEMA,
            "lambda": ckpt.lam,
            "seed": seed,
            "temperature": temperature,
            "n": n,
            "max_new_tokens": max_new_tokens,
            "checkpoint_digest": ckpt.config_digest,
        }
    }
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(meta, sort_keys=True) + "\n")
        for i, text in enumerate(texts):
            fh.write(json.dumps({"id": f"lam{ckpt.lam:g}-seed{seed}-{i:04d}", "text": text}) + "\n")
    return out_path
