"""Synthetic corpus generator with planted, analytically known feature rates.

Documents are built from a neutral filler vocabulary (checked to trigger
no feature), then feature occurrences are planted by replacing or
annotating filler slots in ways that never change the whitespace token
count. A document therefore has exactly `tokens_per_doc` tokens and its
expected per-1000 frequency for feature f is exactly the configured
rate (deterministic mode plants exact counts; random mode draws
binomial counts whose mean is the configured rate).

Slot capacity is sized well above expected demand; running out raises
instead of silently biasing the rates.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import InputError
from .features import FeatureId

FILLER_VOCAB = (
    "apple", "bridge", "candle", "delta", "ember", "forest", "granite",
    "harbor", "island", "jungle", "kettle", "lantern", "meadow", "nickel",
    "orchid", "pillow", "quartz", "river", "stone", "timber", "umbrella",
    "violet", "walnut", "xenon", "yarrow", "zephyr", "basket", "copper",
    "dune", "engine", "fable", "garden", "hollow", "ivory", "jasper",
    "kernel", "ledger", "marble", "needle", "onyx",
)

_HEDGE_WORDS = ("might", "could", "possibly", "perhaps", "maybe")
_APOLOGY_WORDS = ("apologize", "sorry")
_FORMAL_WORDS = ("furthermore", "moreover", "consequently", "nevertheless", "thereby")

DEFAULT_RATES: dict[FeatureId, float] = {
    FeatureId.EM_DASH: 3.0,
    FeatureId.SEMICOLON: 4.0,
    FeatureId.COLON_MID: 3.0,
    FeatureId.ELLIPSIS: 2.0,
    FeatureId.PARENTHETICAL: 3.0,
    FeatureId.DELVE_INTO: 2.0,
    FeatureId.WORTH_NOTING: 2.0,
    FeatureId.IN_CONCLUSION: 2.0,
    FeatureId.THAT_BEING_SAID: 2.0,
    FeatureId.ARGUABLY: 2.0,
    FeatureId.ESSENTIALLY: 3.0,
    FeatureId.FUNDAMENTALLY: 2.0,
    FeatureId.NAVIGATE: 3.0,
    FeatureId.LANDSCAPE: 2.0,
    FeatureId.ROBUST: 3.0,
    FeatureId.HOWEVER_START: 2.0,
    FeatureId.CERTAINLY_START: 2.0,
    FeatureId.ABSOLUTELY_START: 2.0,
    FeatureId.NUMBERED_LIST: 4.0,  # planted in ascending pairs
    FeatureId.BULLET_POINT: 3.0,
    FeatureId.MARKDOWN_HEADER: 2.0,
    FeatureId.HEDGING: 6.0,
    FeatureId.APOLOGETIC: 2.0,
    FeatureId.FORMAL: 4.0,
}

_BINOMIAL_TRIALS = 20


@dataclass(frozen=True)
class SynthConfig:
    docs: int
    tokens_per_doc: int = 250
    rates: dict[FeatureId, float] = field(default_factory=lambda: dict(DEFAULT_RATES))
    seed: int = 42
    deterministic_counts: bool = False
    line_len: int = 12


def expected_frequency(cfg: SynthConfig, feature: FeatureId) -> float:
    """Planted per-1000 rate; exact per document in deterministic mode,
    the binomial mean otherwise."""
    rate = cfg.rates.get(feature, 0.0)
    if cfg.deterministic_counts:
        k = rate * cfg.tokens_per_doc / 1000.0
        if abs(k - round(k)) > 1e-9:
            raise InputError(
                f"deterministic mode needs integral per-doc counts; "
                f"{feature.value} rate {rate} gives {k} per doc"
            )
    return rate


def _event_count(cfg: SynthConfig, rng: random.Random, feature: FeatureId, per_event: int) -> int:
    rate = cfg.rates.get(feature, 0.0)
    if rate <= 0:
        return 0
    mean_occurrences = rate * cfg.tokens_per_doc / 1000.0
    mean_events = mean_occurrences / per_event
    if cfg.deterministic_counts:
        k = round(mean_events)
        if abs(mean_events - k) > 1e-9:
            raise InputError(
                f"deterministic mode needs integral event counts; "
                f"{feature.value} rate {rate} gives {mean_events} events per doc"
            )
        return k
    p = mean_events / _BINOMIAL_TRIALS
    if p > 1.0:
        raise InputError(f"{feature.value}: rate {rate} too high for binomial planting")
    return sum(1 for _ in range(_BINOMIAL_TRIALS) if rng.random() < p)


class _DocBuilder:
    def __init__(self, cfg: SynthConfig, rng: random.Random):
        self.cfg = cfg
        self.rng = rng

    def _claim(self, span: int, min_start: int = 0, keep_tail: int = 0) -> tuple[int, int]:
        """A run of `span` free adjacent slots inside one filler line."""
        for _ in range(200):
            li = self.rng.randrange(len(self.lines))
            line = self.lines[li]
            hi = len(line) - span - keep_tail
            if hi < min_start:
                continue
            start = self.rng.randint(min_start, hi)
            if all(not self.used[li][start + k] for k in range(span)):
                for k in range(span):
                    self.used[li][start + k] = True
                return li, start
        raise InputError("synthetic generator ran out of filler slots; lower the rates")

    def build(self) -> str:
        cfg, rng = self.cfg, self.rng

        events = {
            FeatureId.NUMBERED_LIST: _event_count(cfg, rng, FeatureId.NUMBERED_LIST, 2),
            FeatureId.BULLET_POINT: _event_count(cfg, rng, FeatureId.BULLET_POINT, 1),
            FeatureId.MARKDOWN_HEADER: _event_count(cfg, rng, FeatureId.MARKDOWN_HEADER, 1),
        }
        inline = {
            f: _event_count(cfg, rng, f, 1)
            for f in cfg.rates
            if f not in events
        }

        # groups stay contiguous at insertion so an ascending pair is
        # never split by another structural line
        structural_groups: list[list[list[str]]] = []
        w = lambda: rng.choice(FILLER_VOCAB)
        for _ in range(events[FeatureId.NUMBERED_LIST]):
            start = rng.randint(1, 40)
            structural_groups.append(
                [[f"{start}.", w(), w()], [f"{start + 1}.", w(), w()]]
            )
        for _ in range(events[FeatureId.BULLET_POINT]):
            structural_groups.append([["-", w(), w()]])
        for _ in range(events[FeatureId.MARKDOWN_HEADER]):
            structural_groups.append([["##", w(), w()]])

        structural_tokens = sum(len(l) for g in structural_groups for l in g)
        filler_budget = cfg.tokens_per_doc - structural_tokens
        if filler_budget < cfg.line_len * 4:
            raise InputError("tokens_per_doc too small for the configured structural rates")

        self.lines = []
        remaining = filler_budget
        while remaining > 0:
            ll = min(cfg.line_len, remaining)
            self.lines.append([rng.choice(FILLER_VOCAB) for _ in range(ll)])
            remaining -= ll
        self.used = [[False] * len(l) for l in self.lines]

        def put(li: int, idx: int, token: str) -> None:
            self.lines[li][idx] = token

        for _ in range(inline.get(FeatureId.WORTH_NOTING, 0)):
            li, s = self._claim(3)
            put(li, s, "it's"), put(li, s + 1, "worth"), put(li, s + 2, "noting")
        for _ in range(inline.get(FeatureId.THAT_BEING_SAID, 0)):
            li, s = self._claim(3)
            put(li, s, "that"), put(li, s + 1, "being"), put(li, s + 2, "said")
        for _ in range(inline.get(FeatureId.DELVE_INTO, 0)):
            li, s = self._claim(2)
            put(li, s, "delve"), put(li, s + 1, "into")
        for _ in range(inline.get(FeatureId.IN_CONCLUSION, 0)):
            li, s = self._claim(2)
            put(li, s, "in"), put(li, s + 1, "conclusion")

        for marker, fid in (
            ("However", FeatureId.HOWEVER_START),
            ("Certainly", FeatureId.CERTAINLY_START),
            ("Absolutely", FeatureId.ABSOLUTELY_START),
        ):
            for _ in range(inline.get(fid, 0)):
                # claim the marker slot and the slot before it: the
                # previous token gets a '.' so a sentence starts here
                li, s = self._claim(2, min_start=0)
                self.lines[li][s] = self.lines[li][s] + "."
                put(li, s + 1, marker)

        singles = {
            FeatureId.ARGUABLY: "arguably",
            FeatureId.ESSENTIALLY: "essentially",
            FeatureId.FUNDAMENTALLY: "fundamentally",
            FeatureId.NAVIGATE: "navigate",
            FeatureId.LANDSCAPE: "landscape",
            FeatureId.ROBUST: "robust",
            FeatureId.EM_DASH: "—",
        }
        for fid, token in singles.items():
            for _ in range(inline.get(fid, 0)):
                li, s = self._claim(1)
                put(li, s, token)
        for fid, words in (
            (FeatureId.HEDGING, _HEDGE_WORDS),
            (FeatureId.APOLOGETIC, _APOLOGY_WORDS),
            (FeatureId.FORMAL, _FORMAL_WORDS),
        ):
            for _ in range(inline.get(fid, 0)):
                li, s = self._claim(1)
                put(li, s, rng.choice(words))

        for _ in range(inline.get(FeatureId.SEMICOLON, 0)):
            li, s = self._claim(1)
            put(li, s, self.lines[li][s] + ";")
        for _ in range(inline.get(FeatureId.ELLIPSIS, 0)):
            li, s = self._claim(1)
            put(li, s, self.lines[li][s] + "...")
        for _ in range(inline.get(FeatureId.PARENTHETICAL, 0)):
            li, s = self._claim(1)
            put(li, s, "(" + self.lines[li][s] + ")")
        for _ in range(inline.get(FeatureId.COLON_MID, 0)):
            # keep one token after the colon on the same line
            li, s = self._claim(1, keep_tail=1)
            put(li, s, self.lines[li][s] + ":")

        gaps: dict[int, list[list[list[str]]]] = {}
        for group in structural_groups:
            gaps.setdefault(rng.randint(0, len(self.lines)), []).append(group)
        out: list[str] = []
        for i in range(len(self.lines) + 1):
            for group in gaps.get(i, ()):
                out.extend(" ".join(l) for l in group)
            if i < len(self.lines):
                out.append(" ".join(self.lines[i]))
        return "\n".join(out)


def generate_texts(cfg: SynthConfig) -> list[tuple[str, str]]:
    """[(doc_id, text)] with exactly cfg.tokens_per_doc tokens per text."""
    rng = random.Random(cfg.seed)
    for f in cfg.rates:
        expected_frequency(cfg, f)  # validates deterministic integrality
    out = []
    for i in range(cfg.docs):
        builder = _DocBuilder(cfg, rng)
        out.append((f"synth#{i:05d}", builder.build()))
    return out


def write_jsonl(cfg: SynthConfig, path) -> None:
    import json

    with open(path, "w", encoding="utf-8") as fh:
        for doc_id, text in generate_texts(cfg):
            fh.write(json.dumps({"id": doc_id, "text": text}, ensure_ascii=True) + "\n")
