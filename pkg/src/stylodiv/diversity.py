"""Corpus-level diversity metrics for a sample set.

Tokenization here is the textmodel whitespace split, lowercased, for
every metric. Self-BLEU-4 follows standard BLEU (orders 1-4, uniform
1/4 weights, clipped modified precision, brevity penalty against the
closest reference length) with each document scored against all other
documents jointly as references; zero precisions are floored at
epsilon = 1e-9 rather than smoothed upward.

repetition_rate and vocab_diversity are tool-defined measurements, not
reimplementations of any published variant:

* repetition_rate: per document, the fraction of 4-gram positions whose
  4-gram already occurred earlier in the same document; mean over
  documents; documents under 4 tokens contribute 0
* vocab_diversity: unique lowercased tokens / total tokens, whole set

distinct-n counts each document's n-grams without crossing document
boundaries: unique n-grams / total n-gram instances across the set.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from . import InputError
from .textmodel import Document

BLEU_EPS = 1e-9
_BLEU_ORDERS = (1, 2, 3, 4)


def _doc_tokens(docs: Sequence[Document]) -> list[list[str]]:
    return [[t.lower() for t in d.tokens()] for d in docs]


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _top_two(counts_per_doc: list[Counter]) -> dict[tuple, tuple[int, int, int]]:
    """Per n-gram: (best count, owner index, second-best count) over docs.

    Lets clipped counts against all-other-documents come out of one pass
    instead of re-merging references for every hypothesis.
    """
    best: dict[tuple, tuple[int, int, int]] = {}
    for i, counts in enumerate(counts_per_doc):
        for g, c in counts.items():
            cur = best.get(g)
            if cur is None:
                best[g] = (c, i, 0)
            elif c > cur[0]:
                best[g] = (c, i, cur[0])
            elif c > cur[2]:
                best[g] = (cur[0], cur[1], c)
    return best


def self_bleu4(docs: Sequence[Document]) -> float:
    """Mean BLEU-4 of each document against all others as references.

    A set of identical documents scores exactly 1.0; disjoint
    vocabularies bottom out at the epsilon floor.
    """
    if len(docs) < 2:
        raise InputError("self_bleu4: need at least 2 documents")
    token_lists = _doc_tokens(docs)
    lengths = [len(t) for t in token_lists]
    counts_by_n = {n: [_ngram_counts(t, n) for t in token_lists] for n in _BLEU_ORDERS}
    top_by_n = {n: _top_two(counts_by_n[n]) for n in _BLEU_ORDERS}

    scores: list[float] = []
    for i, tokens in enumerate(token_lists):
        c = lengths[i]
        if c == 0:
            scores.append(0.0)
            continue
        log_sum = 0.0
        for n in _BLEU_ORDERS:
            hyp = counts_by_n[n][i]
            total = max(c - n + 1, 0)
            clipped = 0
            if total:
                top = top_by_n[n]
                for g, cnt in hyp.items():
                    best_c, owner, second = top[g]
                    ref_max = best_c if owner != i else second
                    clipped += min(cnt, ref_max)
            p = clipped / total if total and clipped else BLEU_EPS
            log_sum += 0.25 * math.log(p)
        # brevity penalty against the closest reference length (ties to
        # the shorter one, as in standard BLEU)
        ref_len = min(
            (lengths[j] for j in range(len(docs)) if j != i),
            key=lambda r: (abs(r - c), r),
        )
        bp = 1.0 if c > ref_len else math.exp(1.0 - ref_len / c)
        scores.append(bp * math.exp(log_sum))
    return math.fsum(scores) / len(scores)


def distinct_n(docs: Sequence[Document], n: int) -> float | None:
    """Unique token n-grams / total n-gram instances, set-wide, with no
    n-gram crossing a document boundary. None when no document reaches
    n tokens."""
    if n < 1:
        raise InputError(f"distinct_n: n must be >= 1, got {n}")
    if not docs:
        raise InputError("distinct_n: empty sample set")
    seen: set[tuple] = set()
    total = 0
    for tokens in _doc_tokens(docs):
        for i in range(len(tokens) - n + 1):
            seen.add(tuple(tokens[i : i + n]))
            total += 1
    if total == 0:
        return None
    return len(seen) / total


def repetition_rate(docs: Sequence[Document]) -> float:
    """Mean per-document fraction of repeated 4-gram positions."""
    if not docs:
        raise InputError("repetition_rate: empty sample set")
    rates: list[float] = []
    for tokens in _doc_tokens(docs):
        positions = len(tokens) - 3
        if positions <= 0:
            rates.append(0.0)
            continue
        seen: set[tuple] = set()
        repeated = 0
        for i in range(positions):
            g = tuple(tokens[i : i + 4])
            if g in seen:
                repeated += 1
            else:
                seen.add(g)
        rates.append(repeated / positions)
    return math.fsum(rates) / len(rates)


def vocab_diversity(docs: Sequence[Document]) -> float:
    """Unique lowercased tokens over total tokens, whole set."""
    if not docs:
        raise InputError("vocab_diversity: empty sample set")
    seen: set[str] = set()
    total = 0
    for tokens in _doc_tokens(docs):
        total += len(tokens)
        seen.update(tokens)
    if total == 0:
        raise InputError("vocab_diversity: sample set has no tokens")
    return len(seen) / total


@dataclass(frozen=True, slots=True)
class DiversityReport:
    label: str
    doc_count: int
    token_count: int
    self_bleu4: float
    distinct_2: float | None
    distinct_3: float | None
    distinct_4: float | None
    repetition_rate: float
    vocab_diversity: float


def diversity_report(docs: Sequence[Document], *, label: str = "") -> DiversityReport:
    if len(docs) < 2:
        raise InputError("diversity_report: need at least 2 documents")
    return DiversityReport(
        label=label,
        doc_count=len(docs),
        token_count=sum(d.token_count for d in docs),
        self_bleu4=self_bleu4(docs),
        distinct_2=distinct_n(docs, 2),
        distinct_3=distinct_n(docs, 3),
        distinct_4=distinct_n(docs, 4),
        repetition_rate=repetition_rate(docs),
        vocab_diversity=vocab_diversity(docs),
    )
