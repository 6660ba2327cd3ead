"""Fixed 24-feature stylometric taxonomy and the extraction engine.

Five categories: punctuation habits, discourse markers, sentence-start
markers, structural formatting, and tonal word families. The taxonomy is
closed: extraction always reports all 24 features, and callers who want
fewer exclude features downstream (see the divergence module) rather
than redefining the taxonomy.

All frequencies are per 1,000 whitespace tokens; that is the one
canonical unit used everywhere in this package.

Detection rules (precision over recall, no morphological variants):

* em_dash        - count of U+2014 only; hyphens and en dashes never count
* semicolon      - count of ';'
* colon_mid      - ':' followed on the same line by >= 1 non-whitespace char
* ellipsis       - maximal runs of >= 3 '.' count once each, plus U+2026
* parenthetical  - matched '(' ')' pairs via a depth counter; unmatched
                   parens contribute nothing
* discourse / tonal words and phrases - case-insensitive, word boundary
  at both ends; multi-word phrases match across single spaces only
* sentence-start markers - a sentence's first token equals the marker
  after lowercasing and stripping trailing ',' '.' ':' ';'
* numbered_list  - a line of optional indent + integer + '.' or ')' + space
  is a candidate; one count per line inside any maximal run of consecutive
  candidate lines whose integers ascend by exactly 1, runs of length >= 2.
  A lone "1." counts zero. Blank or other lines break a run.
* bullet_point   - line starts with optional indent, then one of '•' '-'
  '*', then a space ('-' immediately followed by a digit is never a bullet)
* markdown_header - line starts at column 0 with 1-6 '#' then a space
  (indent is granted to list rules only)

Tonal word lists:
    hedging    = might, could, possibly, perhaps, maybe
    apologetic = apologize, sorry
    formal     = furthermore, moreover, consequently, nevertheless, thereby
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum

from . import InputError
from .textmodel import Document

TAXONOMY_VERSION = "24f-5cat/1"


class Category(str, Enum):
    PUNCTUATION = "punctuation"
    DISCOURSE = "discourse"
    SENTENCE_START = "sentence_start"
    STRUCTURAL = "structural"
    TONAL = "tonal"


class FeatureId(str, Enum):
    EM_DASH = "em_dash"
    SEMICOLON = "semicolon"
    COLON_MID = "colon_mid"
    ELLIPSIS = "ellipsis"
    PARENTHETICAL = "parenthetical"
    DELVE_INTO = "delve_into"
    WORTH_NOTING = "worth_noting"
    IN_CONCLUSION = "in_conclusion"
    THAT_BEING_SAID = "that_being_said"
    ARGUABLY = "arguably"
    ESSENTIALLY = "essentially"
    FUNDAMENTALLY = "fundamentally"
    NAVIGATE = "navigate"
    LANDSCAPE = "landscape"
    ROBUST = "robust"
    HOWEVER_START = "however_start"
    CERTAINLY_START = "certainly_start"
    ABSOLUTELY_START = "absolutely_start"
    NUMBERED_LIST = "numbered_list"
    BULLET_POINT = "bullet_point"
    MARKDOWN_HEADER = "markdown_header"
    HEDGING = "hedging"
    APOLOGETIC = "apologetic"
    FORMAL = "formal"


# Canonical feature order; also the deterministic tie-break everywhere.
FEATURE_ORDER: tuple[FeatureId, ...] = tuple(FeatureId)
FEATURE_INDEX: dict[FeatureId, int] = {f: i for i, f in enumerate(FEATURE_ORDER)}


@dataclass(frozen=True, slots=True)
class FeatureSpec:
    """Declarative detection rule; the engine dispatches on `kind`."""

    id: FeatureId
    category: Category
    kind: str  # char | colon_mid | ellipsis | paren_pairs | phrase |
    #            word_set | sentence_start | numbered | bullet | header
    pattern: object = None
    unit: str = "per_1000_tokens"


HEDGING_WORDS = ("might", "could", "possibly", "perhaps", "maybe")
APOLOGETIC_WORDS = ("apologize", "sorry")
FORMAL_WORDS = ("furthermore", "moreover", "consequently", "nevertheless", "thereby")

TAXONOMY: dict[FeatureId, FeatureSpec] = {
    s.id: s
    for s in (
        FeatureSpec(FeatureId.EM_DASH, Category.PUNCTUATION, "char", "—"),
        FeatureSpec(FeatureId.SEMICOLON, Category.PUNCTUATION, "char", ";"),
        FeatureSpec(FeatureId.COLON_MID, Category.PUNCTUATION, "colon_mid"),
        FeatureSpec(FeatureId.ELLIPSIS, Category.PUNCTUATION, "ellipsis"),
        FeatureSpec(FeatureId.PARENTHETICAL, Category.PUNCTUATION, "paren_pairs"),
        FeatureSpec(FeatureId.DELVE_INTO, Category.DISCOURSE, "phrase", "delve into"),
        FeatureSpec(FeatureId.WORTH_NOTING, Category.DISCOURSE, "phrase", "it's worth noting"),
        FeatureSpec(FeatureId.IN_CONCLUSION, Category.DISCOURSE, "phrase", "in conclusion"),
        FeatureSpec(FeatureId.THAT_BEING_SAID, Category.DISCOURSE, "phrase", "that being said"),
        FeatureSpec(FeatureId.ARGUABLY, Category.DISCOURSE, "phrase", "arguably"),
        FeatureSpec(FeatureId.ESSENTIALLY, Category.DISCOURSE, "phrase", "essentially"),
        FeatureSpec(FeatureId.FUNDAMENTALLY, Category.DISCOURSE, "phrase", "fundamentally"),
        FeatureSpec(FeatureId.NAVIGATE, Category.DISCOURSE, "phrase", "navigate"),
        FeatureSpec(FeatureId.LANDSCAPE, Category.DISCOURSE, "phrase", "landscape"),
        FeatureSpec(FeatureId.ROBUST, Category.DISCOURSE, "phrase", "robust"),
        FeatureSpec(FeatureId.HOWEVER_START, Category.SENTENCE_START, "sentence_start", "however"),
        FeatureSpec(FeatureId.CERTAINLY_START, Category.SENTENCE_START, "sentence_start", "certainly"),
        FeatureSpec(FeatureId.ABSOLUTELY_START, Category.SENTENCE_START, "sentence_start", "absolutely"),
        FeatureSpec(FeatureId.NUMBERED_LIST, Category.STRUCTURAL, "numbered"),
        FeatureSpec(FeatureId.BULLET_POINT, Category.STRUCTURAL, "bullet"),
        FeatureSpec(FeatureId.MARKDOWN_HEADER, Category.STRUCTURAL, "header"),
        FeatureSpec(FeatureId.HEDGING, Category.TONAL, "word_set", HEDGING_WORDS),
        FeatureSpec(FeatureId.APOLOGETIC, Category.TONAL, "word_set", APOLOGETIC_WORDS),
        FeatureSpec(FeatureId.FORMAL, Category.TONAL, "word_set", FORMAL_WORDS),
    )
}

assert len(TAXONOMY) == 24

CATEGORY_FEATURES: dict[Category, tuple[FeatureId, ...]] = {
    cat: tuple(f for f in FEATURE_ORDER if TAXONOMY[f].category is cat)
    for cat in Category
}

_SENTENCE_MARKERS = {
    "however": FeatureId.HOWEVER_START,
    "certainly": FeatureId.CERTAINLY_START,
    "absolutely": FeatureId.ABSOLUTELY_START,
}


_TOKEN_RE = re.compile(r"\w+")


def _build_word_tables() -> tuple[dict[str, FeatureId], list[tuple[FeatureId, str, re.Pattern[str]]]]:
    # Patterns that are a single \w+ word are counted through a token
    # counter: a \b-bounded word matches exactly where the word appears
    # as a maximal \w+ run, so the two formulations agree and the counter
    # needs only one scan per text. Multi-word phrases keep a bounded
    # regex, run only when a cheap substring screen says the phrase text
    # occurs at all. No pattern is a word-level substring of another, so
    # counting each independently equals a single shared-scan alternation.
    single: dict[str, FeatureId] = {}
    multi: list[tuple[FeatureId, str, re.Pattern[str]]] = []
    for s in TAXONOMY.values():
        if s.kind == "phrase":
            pats = [s.pattern]
        elif s.kind == "word_set":
            pats = list(s.pattern)
        else:
            continue
        for p in pats:
            if _TOKEN_RE.fullmatch(p):
                single[p] = s.id
            else:
                multi.append((s.id, p, re.compile(rf"\b{re.escape(p)}\b")))
    return single, multi


_SINGLE_WORDS, _MULTI_PHRASES = _build_word_tables()
_ELLIPSIS_RE = re.compile(r"\.{3,}")
_COLON_MID_RE = re.compile(r":(?=[^\n]*\S)")
_PAREN_RE = re.compile(r"[()]")
_NUMBERED_RE = re.compile(r"[ \t]*(\d+)[.)] ")
_BULLET_RE = re.compile(r"[ \t]*[•\-*] ")
_HEADER_RE = re.compile(r"#{1,6} ")

# Every line the structural rules can match starts with one of these;
# anything else skips all three regexes.
_LINE_START_CHARS = "0123456789•-*# \t"


@dataclass(frozen=True, slots=True)
class FeatureVector:
    """Per-1000-token frequencies plus the raw counts behind them.

    values and counts always carry all 24 FeatureIds. For a single
    document, values[f] == counts[f] * 1000 / token_count (0 when the
    document has no tokens). doc_count is 1 for extract() output and the
    number of pooled documents for aggregate() output.
    """

    values: dict[FeatureId, float]
    counts: dict[FeatureId, int]
    token_count: int
    doc_count: int


def _ascending_run_score(nums: list[int]) -> int:
    """Lines credited inside maximal ascending-by-1 subruns of length >= 2."""
    total = 0
    i = 0
    while i < len(nums):
        j = i
        while j + 1 < len(nums) and nums[j + 1] == nums[j] + 1:
            j += 1
        if j > i:
            total += j - i + 1
        i = j + 1
    return total


def _count_parens(text: str) -> int:
    depth = 0
    pairs = 0
    for ch in _PAREN_RE.findall(text):
        if ch == "(":
            depth += 1
        elif depth > 0:
            depth -= 1
            pairs += 1
    return pairs


def raw_counts(doc: Document) -> dict[FeatureId, int]:
    """All 24 raw feature counts for one document."""
    text = doc.text
    counts = dict.fromkeys(FEATURE_ORDER, 0)

    counts[FeatureId.EM_DASH] = text.count("—")
    counts[FeatureId.SEMICOLON] = text.count(";")
    if ":" in text:
        counts[FeatureId.COLON_MID] = len(_COLON_MID_RE.findall(text))
    ellipsis = text.count("…")
    if "..." in text:
        ellipsis += len(_ELLIPSIS_RE.findall(text))
    counts[FeatureId.ELLIPSIS] = ellipsis
    if "(" in text:
        counts[FeatureId.PARENTHETICAL] = _count_parens(text)

    low = text.lower()
    token_counts = Counter(_TOKEN_RE.findall(low))
    for word, fid in _SINGLE_WORDS.items():
        n = token_counts.get(word)
        if n:
            counts[fid] += n
    for fid, phrase, rx in _MULTI_PHRASES:
        if phrase in low:
            counts[fid] += len(rx.findall(low))

    if (
        "however" in token_counts
        or "certainly" in token_counts
        or "absolutely" in token_counts
    ):
        # Sentence segmentation is the expensive step. A sentence-start
        # hit requires the marker itself as a token (first_token strips
        # only trailing punctuation), so the screen can only skip
        # documents where every marker count is provably zero.
        for span in doc.sentences:
            fid = _SENTENCE_MARKERS.get(span.first_token)
            if fid is not None:
                counts[fid] += 1

    run: list[int] = []
    numbered = 0
    for line in text.split("\n"):
        head = line[:1]
        if head and head in _LINE_START_CHARS:
            m = _NUMBERED_RE.match(line)
            if m is not None:
                run.append(int(m.group(1)))
                continue
            if run:
                numbered += _ascending_run_score(run)
                run = []
            if _BULLET_RE.match(line):
                counts[FeatureId.BULLET_POINT] += 1
            elif _HEADER_RE.match(line):
                counts[FeatureId.MARKDOWN_HEADER] += 1
        elif run:
            numbered += _ascending_run_score(run)
            run = []
    if run:
        numbered += _ascending_run_score(run)
    counts[FeatureId.NUMBERED_LIST] = numbered

    return counts


def extract(doc: Document) -> FeatureVector:
    """FeatureVector of one document, frequencies per 1,000 tokens."""
    counts = raw_counts(doc)
    tk = doc.token_count
    if tk > 0:
        values = {f: c * 1000.0 / tk for f, c in counts.items()}
    else:
        values = dict.fromkeys(FEATURE_ORDER, 0.0)
    return FeatureVector(values=values, counts=counts, token_count=tk, doc_count=1)


def extract_text(doc_id: str, text: str) -> FeatureVector:
    return extract(Document(doc_id, text))


def aggregate(vectors: list[FeatureVector]) -> FeatureVector:
    """Token-weighted pooled vector: sum counts / sum tokens, per 1,000.

    Equivalent to the token-weighted mean of the per-document
    frequencies; never the unweighted mean of the inputs.
    """
    vectors = list(vectors)
    if not vectors:
        raise InputError("aggregate() needs at least one vector")
    counts = dict.fromkeys(FEATURE_ORDER, 0)
    tokens = 0
    docs = 0
    for v in vectors:
        tokens += v.token_count
        docs += v.doc_count
        for f, c in v.counts.items():
            counts[f] += c
    if tokens > 0:
        values = {f: c * 1000.0 / tokens for f, c in counts.items()}
    else:
        values = dict.fromkeys(FEATURE_ORDER, 0.0)
    return FeatureVector(values=values, counts=counts, token_count=tokens, doc_count=docs)


def max_over_docs(vectors: list[FeatureVector]) -> FeatureVector:
    """Elementwise maximum of per-document frequencies (and raw counts)."""
    vectors = list(vectors)
    if not vectors:
        raise InputError("max_over_docs() needs at least one vector")
    values = {f: max(v.values[f] for v in vectors) for f in FEATURE_ORDER}
    counts = {f: max(v.counts[f] for v in vectors) for f in FEATURE_ORDER}
    return FeatureVector(
        values=values,
        counts=counts,
        token_count=sum(v.token_count for v in vectors),
        doc_count=sum(v.doc_count for v in vectors),
    )


def doc_hit_rate(vectors: list[FeatureVector], feature: FeatureId) -> float:
    """Fraction of documents where the feature occurs at all."""
    vectors = list(vectors)
    if not vectors:
        raise InputError("doc_hit_rate() needs at least one vector")
    return sum(1 for v in vectors if v.values[feature] > 0) / len(vectors)
