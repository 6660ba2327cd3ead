"""Deterministic text decomposition: tokens, lines, sentence spans.

Every downstream count is defined in terms of this module, so the rules
are fixed and intentionally small:

* token: maximal run of non-whitespace characters
* line:  substring between newline characters
* sentence boundary: a run of '.', '!' or '?' followed by whitespace and
  then an uppercase letter or an opening quote/bracket, or followed by
  end of text; a blank line always terminates a sentence

There is no abbreviation dictionary beyond the uppercase-follower test,
so "Dr. Smith" splits after "Dr." by design; the taxonomy favors
precision of the rule over recall of edge cases.

Normalization, applied exactly once when a Document is built: CRLF
becomes LF, and the right single quote U+2019 becomes the ASCII
apostrophe. Nothing else is rewritten; offsets index the normalized
text as code points.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

_TERMINATOR_RE = re.compile(r"[.!?]+")
_BLANK_LINE_RE = re.compile(r"\n[ \t]*\n")
_FIRST_TOKEN_RE = re.compile(r"\S+")

# Openers that may follow a terminator and still begin a new sentence.
_OPENERS = frozenset("\"'“‘([{")

# Trailing characters stripped from a sentence's first token before any
# marker comparison ("However," -> "however").
_STRIP_TRAILING = ",.:;"


def normalize(text: str) -> str:
    """Apply the two fixed rewrites. Idempotent."""
    return text.replace("\r\n", "\n").replace("’", "'")


def tokenize(text: str) -> list[str]:
    return text.split()


def token_count(text: str) -> int:
    return len(text.split())


@dataclass(frozen=True, slots=True)
class SentenceSpan:
    """Half-open [start, end) code-point span of one sentence.

    The span is trimmed: text[start] and text[end - 1] are non-whitespace.
    first_token is the span's first whitespace-delimited token, lowercased,
    with trailing ',' '.' ':' ';' stripped.
    """

    start: int
    end: int
    first_token: str


def _boundaries(text: str) -> list[int]:
    """Cut positions: each index ends a sentence chunk (exclusive)."""
    cuts = set()
    n = len(text)
    for m in _TERMINATOR_RE.finditer(text):
        end = m.end()
        j = end
        while j < n and text[j].isspace():
            j += 1
        if j >= n:
            cuts.add(end)
        elif j > end:
            ch = text[j]
            if ch.isupper() or ch in _OPENERS:
                cuts.add(end)
        # terminator glued to non-whitespace ("e.g. value", "3.14"): no cut
    for m in _BLANK_LINE_RE.finditer(text):
        cuts.add(m.start())
    return sorted(cuts)


def split_sentences(text: str) -> list[SentenceSpan]:
    """Segment normalized text into sentence spans.

    The spans partition the non-whitespace content: every token of the
    input lands in exactly one span.
    """
    spans: list[SentenceSpan] = []
    prev = 0
    for cut in _boundaries(text) + [len(text)]:
        if cut <= prev:
            continue
        chunk = text[prev:cut]
        stripped = chunk.strip()
        if stripped:
            start = prev + (len(chunk) - len(chunk.lstrip()))
            end = start + len(stripped)
            m = _FIRST_TOKEN_RE.match(text, start)
            first = m.group().lower().rstrip(_STRIP_TRAILING) if m else ""
            spans.append(SentenceSpan(start, end, first))
        prev = cut
    return spans


def line_spans(text: str) -> list[tuple[int, int]]:
    """[start, end) spans of each line, newline excluded; covers all text."""
    spans = []
    start = 0
    while True:
        nl = text.find("\n", start)
        if nl == -1:
            spans.append((start, len(text)))
            return spans
        spans.append((start, nl))
        start = nl + 1


class Document:
    """A normalized text with lazily computed decomposition.

    Decomposition is pure and cached: repeated access yields identical
    results, and two Documents with byte-identical normalized text
    decompose identically.
    """

    __slots__ = ("id", "text", "token_count", "_sentences", "_lines")

    def __init__(self, doc_id: str, text: str):
        self.id = doc_id
        self.text = normalize(text)
        self.token_count = len(self.text.split())
        self._sentences: list[SentenceSpan] | None = None
        self._lines: list[tuple[int, int]] | None = None

    def tokens(self) -> list[str]:
        return self.text.split()

    @property
    def sentences(self) -> list[SentenceSpan]:
        if self._sentences is None:
            self._sentences = split_sentences(self.text)
        return self._sentences

    @property
    def lines(self) -> list[tuple[int, int]]:
        if self._lines is None:
            self._lines = line_spans(self.text)
        return self._lines

    def __repr__(self) -> str:  # pragma: no cover
        return f"Document(id={self.id!r}, tokens={self.token_count})"
