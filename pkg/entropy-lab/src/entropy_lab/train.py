"""Training loop for one lambda value.

One call trains one model end to end: seeded init, AdamW over random
contiguous windows, a loud abort on any non-finite loss, held-out
evaluation, and a checkpoint stamped with a digest of its configuration.
Runs that share a seed share the initialization and the batch order no
matter what lambda is, so sweeps across lambda are paired comparisons.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import torch

from .data import Vocab, build_vocab, sample_batch, train_val_split, val_batches
from .losses import entropy_per_position, regularized_loss
from .model import CharLM, ModelConfig

CHECKPOINT_SCHEMA = "entropy-lab-checkpoint/1"
MIN_CORPUS_TOKENS = 100_000


class TrainingDiverged(RuntimeError):
    """Raised when the loss stops being finite; carries the step context."""


@dataclass(frozen=True)
class TrainConfig:
    lam: float
    steps: int = 600
    batch_size: int = 32
    lr: float = 3e-3
    seed: int = 3
    val_fraction: float = 0.1
    min_corpus_tokens: int = MIN_CORPUS_TOKENS

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"lambda must be nonnegative, got {self.lam}")
        if self.steps < 1:
            raise ValueError("steps must be positive")


@dataclass(frozen=True)
class TrainResult:
    lam: float
    steps: int
    final_loss: float
    final_ce: float
    val_perplexity: float
    mean_output_entropy: float
    checkpoint_path: str
    config_digest: str


def config_digest(model_cfg: ModelConfig, train_cfg: TrainConfig, vocab: Vocab) -> str:
    payload = json.dumps(
        {"model": asdict(model_cfg), "train": asdict(train_cfg), "vocab": vocab.chars},
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@torch.no_grad()
def evaluate(model: CharLM, val_ids: torch.Tensor, batch_size: int) -> tuple[float, float]:
    """(validation perplexity, mean predictive entropy in nats per position)
    over non-overlapping windows of the held-out split."""
    model.eval()
    ce_sum = 0.0
    ent_sum = 0.0
    n_pos = 0
    for x, y in val_batches(val_ids, model.cfg.context, batch_size):
        logits = model(x)
        _, ce, _ = regularized_loss(logits, y, 0.0)
        ce_sum += float(ce) * y.numel()
        ent_sum += float(entropy_per_position(logits).sum())
        n_pos += y.numel()
    model.train()
    if n_pos == 0:
        raise ValueError("validation split produced no complete windows")
    return math.exp(ce_sum / n_pos), ent_sum / n_pos


def train(
    text: str,
    model_cfg_base: ModelConfig | None,
    train_cfg: TrainConfig,
    checkpoint_path: str | Path,
    *,
    log_every: int = 0,
) -> TrainResult:
    """Train one model on `text` and save a checkpoint.

    `model_cfg_base` may carry vocab_size=0; the real vocabulary is
    always rebuilt from the corpus so checkpoint and text agree.
    """
    vocab = build_vocab(text)
    if len(text) < train_cfg.min_corpus_tokens:
        raise ValueError(
            f"corpus has {len(text)} tokens after tokenization, "
            f"need at least {train_cfg.min_corpus_tokens}"
        )
    base = model_cfg_base or ModelConfig(vocab_size=0)
    model_cfg = ModelConfig(
        vocab_size=len(vocab),
        dim=base.dim,
        n_layers=base.n_layers,
        n_heads=base.n_heads,
        context=base.context,
    )

    torch.manual_seed(train_cfg.seed)
    model = CharLM(model_cfg)
    opt = torch.optim.AdamW(model.parameters(), lr=train_cfg.lr)

    ids = vocab.encode(text)
    train_ids, val_ids = train_val_split(ids, train_cfg.val_fraction)
    gen = torch.Generator().manual_seed(train_cfg.seed + 1)

    loss = ce = ent = torch.tensor(0.0)
    for step in range(1, train_cfg.steps + 1):
        x, y = sample_batch(train_ids, model_cfg.context, train_cfg.batch_size, gen)
        logits = model(x)
        loss, ce, ent = regularized_loss(logits, y, train_cfg.lam)
        ce, ent = ce.detach(), ent.detach()
        if not torch.isfinite(loss):
            raise TrainingDiverged(
                f"non-finite loss at step {step}/{train_cfg.steps}: "
                f"loss={float(loss.detach())!r} ce={float(ce)!r} entropy={float(ent)!r} "
                f"lambda={train_cfg.lam} lr={train_cfg.lr} seed={train_cfg.seed}"
            )
        opt.zero_grad(set_to_none=True)
        loss.backward()
        opt.step()
        if log_every and step % log_every == 0:
            print(
                f"  step {step:5d}  loss {float(loss):+.4f}  ce {float(ce):.4f}  "
                f"entropy {float(ent):.4f}"
            )

    val_ppl, val_ent = evaluate(model, val_ids, train_cfg.batch_size)
    digest = config_digest(model_cfg, train_cfg, vocab)

    checkpoint_path = Path(checkpoint_path)
    checkpoint_path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(
        {
            "schema": CHECKPOINT_SCHEMA,
            "model_state": model.state_dict(),
            "model_config": asdict(model_cfg),
            "train_config": asdict(train_cfg),
            "vocab": vocab.chars,
            "config_digest": digest,
            "val_perplexity": val_ppl,
            "mean_output_entropy": val_ent,
        },
        checkpoint_path,
    )
    return TrainResult(
        lam=train_cfg.lam,
        steps=train_cfg.steps,
        final_loss=float(loss.detach()),
        final_ce=float(ce),
        val_perplexity=val_ppl,
        mean_output_entropy=val_ent,
        checkpoint_path=str(checkpoint_path),
        config_digest=digest,
    )
