"""Corpus handling: character vocabulary, batching, synthetic training text.

The lab trains character-level models, so a token is one character and
the vocabulary is the sorted set of characters that occur in the corpus.
The synthetic corpus is templated English-like prose with deliberately
varied punctuation and connective vocabulary so that a stylometric
baseline built from it has nonzero rates for every feature the scoring
tool measures; a corpus with no semicolons or hedging words would leave
most amplification ratios undefined downstream.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

import torch


@dataclass(frozen=True)
class Vocab:
    chars: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.chars)

    @property
    def stoi(self) -> dict[str, int]:
        return {c: i for i, c in enumerate(self.chars)}

    def encode(self, text: str) -> torch.Tensor:
        table = self.stoi
        try:
            return torch.tensor([table[c] for c in text], dtype=torch.long)
        except KeyError as e:
            raise ValueError(f"character {e.args[0]!r} not in vocabulary") from None

    def decode(self, ids) -> str:
        chars = self.chars
        return "".join(chars[int(i)] for i in ids)


def build_vocab(text: str) -> Vocab:
    return Vocab(tuple(sorted(set(text))))


def load_corpus(path: str | Path) -> str:
    return Path(path).read_text(encoding="utf-8")


def train_val_split(ids: torch.Tensor, val_fraction: float = 0.1) -> tuple[torch.Tensor, torch.Tensor]:
    """Contiguous split with the tail held out for validation."""
    if not 0.0 < val_fraction < 1.0:
        raise ValueError(f"val_fraction must be in (0, 1), got {val_fraction}")
    cut = len(ids) - max(1, int(len(ids) * val_fraction))
    return ids[:cut], ids[cut:]


def sample_batch(
    ids: torch.Tensor, context: int, batch_size: int, generator: torch.Generator
) -> tuple[torch.Tensor, torch.Tensor]:
    """Random contiguous windows; next-character targets."""
    if len(ids) < context + 1:
        raise ValueError(f"split of {len(ids)} chars is too short for context {context}")
    starts = torch.randint(len(ids) - context, (batch_size,), generator=generator)
    x = torch.stack([ids[s : s + context] for s in starts])
    y = torch.stack([ids[s + 1 : s + context + 1] for s in starts])
    return x, y


def val_batches(ids: torch.Tensor, context: int, batch_size: int):
    """Non-overlapping windows covering the validation split once."""
    n_windows = (len(ids) - 1) // context
    for i in range(0, n_windows, batch_size):
        hi = min(i + batch_size, n_windows)
        x = torch.stack([ids[j * context : (j + 1) * context] for j in range(i, hi)])
        y = torch.stack([ids[j * context + 1 : (j + 1) * context + 1] for j in range(i, hi)])
        yield x, y


# --------------------------------------------------------------------------
# Synthetic corpus

_NOUNS = (
    "garden", "river", "market", "engine", "ledger", "lantern", "meadow",
    "harbor", "workshop", "archive", "orchard", "landscape", "signal",
)
_ADJS = ("quiet", "bright", "narrow", "robust", "pale", "patient")
_VERBS = ("holds", "turns", "feeds", "crosses", "maps", "repairs", "measures")
_VERBS_INF = ("hold", "turn", "map", "repair", "measure", "navigate")
_HEDGES = ("might", "could", "perhaps", "maybe", "possibly")
_FORMAL = ("furthermore", "moreover", "consequently", "nevertheless", "thereby")


def _sentence(rng: random.Random) -> str:
    n = lambda: rng.choice(_NOUNS)
    a = lambda: rng.choice(_ADJS)
    v = lambda: rng.choice(_VERBS)
    vi = lambda: rng.choice(_VERBS_INF)
    roll = rng.random()
    if roll < 0.30:
        s = f"the {a()} {n()} {v()} the {n()}."
    elif roll < 0.42:
        s = f"the {n()} {v()} the {n()}; the {n()} waits."
    elif roll < 0.50:
        s = f"the rule is plain: the {n()} {v()} first."
    elif roll < 0.58:
        s = f"the {n()} (a {a()} one) {v()} the {n()}."
    elif roll < 0.66:
        s = f"we {rng.choice(_HEDGES)} {vi()} the {n()} before dark."
    elif roll < 0.70:
        s = f"{rng.choice(_FORMAL)}, the {n()} {v()} the {n()}."
    elif roll < 0.74:
        s = f"{rng.choice(('however', 'certainly', 'absolutely'))}, the {n()} {v()}."
    elif roll < 0.78:
        s = f"it's worth noting that the {n()} {v()}."
    elif roll < 0.81:
        s = f"we delve into the {a()} {n()}."
    elif roll < 0.84:
        s = f"{rng.choice(('arguably', 'essentially', 'fundamentally'))}, the {n()} is {a()}."
    elif roll < 0.87:
        s = f"in conclusion, the {n()} {v()} the {n()}."
    elif roll < 0.90:
        s = f"that being said, the {n()} {v()}."
    elif roll < 0.93:
        s = f"the {n()} waits — the {n()} does not."
    elif roll < 0.96:
        s = f"sorry, the {n()} is late again... the {n()} {v()}."
    else:
        s = f"we apologize; the {a()} {n()} could not {vi()} the {n()}."
    return s[0].upper() + s[1:]


def _block(rng: random.Random) -> str:
    n = lambda: rng.choice(_NOUNS)
    vi = lambda: rng.choice(_VERBS_INF)
    kind = rng.random()
    if kind < 0.4:
        lines = [f"# {n()} notes"]
        lines += [f"- {vi()} the {n()}" for _ in range(rng.randint(2, 3))]
    elif kind < 0.7:
        lines = [f"{i}. {vi()} the {n()}" for i in range(1, rng.randint(3, 4))]
    else:
        lines = [f"* {vi()} the {n()}" for _ in range(rng.randint(2, 3))]
    return "\n".join(lines)


def synthetic_corpus(min_chars: int = 400_000, seed: int = 0) -> str:
    """Deterministic templated prose, paragraph per line group, blank-line
    separated so the file maps cleanly onto one document per paragraph."""
    rng = random.Random(seed)
    parts: list[str] = []
    total = 0
    while total < min_chars:
        if rng.random() < 0.07:
            para = _block(rng)
        else:
            para = " ".join(_sentence(rng) for _ in range(rng.randint(3, 7)))
        parts.append(para)
        total += len(para) + 2
    return "\n\n".join(parts) + "\n"


def corpus_paragraphs(text: str) -> list[str]:
    return [p for p in (chunk.strip("\n") for chunk in text.split("\n\n")) if p.strip()]
