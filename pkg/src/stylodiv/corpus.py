"""Corpus ingestion, baseline statistics, and the baseline file format.

A baseline summarizes a reference corpus per feature:

* mu        - unweighted mean of per-document frequencies
* sigma     - population standard deviation (divide by n) of the same
* cv        - sigma / mu, present only when mu > 0
* mu_pooled - token-weighted pooled frequency, sum(counts) * 1000 / sum(tokens)

mu_pooled is the default denominator for amplification ratios; mu/sigma
feed stability diagnostics. Ingestion is streaming: document texts are
never all held in memory (a reservoir sample holds at most sample_limit
of them).

Baseline files are self-describing JSON, schema "stylodiv-baseline/1".
Floats are serialized in shortest round-trip decimal form (at most 17
significant digits), so write -> read -> write is byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from . import InputError, __version__
from .features import (
    FEATURE_ORDER,
    TAXONOMY_VERSION,
    FeatureId,
    FeatureVector,
    extract,
)
from .textmodel import Document

BASELINE_SCHEMA = "stylodiv-baseline/1"

# Stability gate on the per-document mean, in per-1000 units: features
# at or above MU_FLOOR should have a standard error no worse than
# SE_LIMIT (0.032 per 1,000 tokens) before the baseline is trusted.
MU_FLOOR = 0.1
SE_LIMIT = 0.032

INGEST_FORMATS = ("jsonl", "txt-dir", "txt-delim")


class DocumentStream:
    """Iterator of Documents that tracks skipped inputs and a content digest.

    `skipped` and `digest` are final only after full consumption.
    """

    def __init__(self, source: str, gen: Iterator[tuple[str, str]], hasher):
        self.source = source
        self.skipped = 0
        self.count = 0
        self._gen = gen
        self._hasher = hasher

    def __iter__(self) -> Iterator[Document]:
        for doc_id, text in self._gen:
            self.count += 1
            yield Document(doc_id, text)

    @property
    def digest(self) -> str:
        return self._hasher.hexdigest()


def _iter_jsonl(path: Path, stream: "DocumentStream", hasher):
    stem = path.name
    with open(path, "rb") as fh:
        for i, raw in enumerate(fh):
            hasher.update(raw)
            try:
                obj = json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError):
                stream.skipped += 1
                continue
            if not isinstance(obj, dict) or not isinstance(obj.get("text"), str):
                stream.skipped += 1
                continue
            doc_id = obj.get("id")
            yield (str(doc_id) if doc_id is not None else f"{stem}#{i}", obj["text"])


def _iter_txt_dir(path: Path, stream: "DocumentStream", hasher):
    files = sorted(p for p in path.iterdir() if p.is_file())
    for p in files:
        raw = p.read_bytes()
        hasher.update(p.name.encode("utf-8"))
        hasher.update(raw)
        try:
            yield (p.name, raw.decode("utf-8"))
        except UnicodeDecodeError:
            stream.skipped += 1


def _iter_txt_delim(path: Path, stream: "DocumentStream", hasher, delimiter: str):
    raw = path.read_bytes()
    hasher.update(raw)
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise InputError(f"{path}: not valid UTF-8: {e}") from None
    stem = path.name
    ordinal = 0
    part: list[str] = []
    for line in text.split("\n"):
        if line == delimiter:
            if any(s.strip() for s in part):
                yield (f"{stem}#{ordinal}", "\n".join(part))
                ordinal += 1
            part = []
        else:
            part.append(line)
    if any(s.strip() for s in part):
        yield (f"{stem}#{ordinal}", "\n".join(part))


def ingest(path: str | Path, fmt: str, delimiter: str = "----") -> DocumentStream:
    """Open a corpus for streaming. Formats:

    * jsonl:     one JSON object per line, "text" required, "id" optional;
                 malformed lines are skipped and counted
    * txt-dir:   one document per file, lexicographic filename order
    * txt-delim: one file split on an exact delimiter line
    """
    path = Path(path)
    if fmt not in INGEST_FORMATS:
        raise InputError(f"unknown ingest format {fmt!r}; expected one of {INGEST_FORMATS}")
    if fmt == "txt-dir":
        if not path.is_dir():
            raise InputError(f"{path}: not a readable directory")
    elif not path.is_file():
        raise InputError(f"{path}: not a readable file")
    hasher = hashlib.sha256()
    stream = DocumentStream(str(path), iter(()), hasher)
    if fmt == "jsonl":
        stream._gen = _iter_jsonl(path, stream, hasher)
    elif fmt == "txt-dir":
        stream._gen = _iter_txt_dir(path, stream, hasher)
    else:
        stream._gen = _iter_txt_delim(path, stream, hasher, delimiter)
    return stream


def reservoir_sample(docs: Iterable[Document], k: int, seed: int) -> list[Document]:
    """Uniform sample of k items, deterministic for a fixed seed and
    input order (algorithm R). Returns everything when the stream is
    shorter than k."""
    if k < 1:
        raise InputError(f"sample size must be >= 1, got {k}")
    rng = random.Random(seed)
    res: list[Document] = []
    for i, doc in enumerate(docs):
        if i < k:
            res.append(doc)
        else:
            j = rng.randint(0, i)
            if j < k:
                res[j] = doc
    return res


@dataclass(frozen=True, slots=True)
class FeatureStats:
    mu: float
    sigma: float
    cv: float | None
    mu_pooled: float
    count: int


@dataclass(frozen=True, slots=True)
class BaselineStats:
    corpus_label: str
    taxonomy_version: str
    doc_count: int
    token_count: int
    features: dict[FeatureId, FeatureStats]
    seed: int | None = None
    sample_limit: int | None = None
    skipped: int = 0
    build_timestamp: str | None = None
    input_digest: str | None = None


def extract_vectors(docs: Iterable[Document], workers: int = 1) -> list[FeatureVector]:
    """Per-document FeatureVectors, in input order.

    Extraction is pure, so the result is identical for any worker count;
    workers > 1 fans out over processes and reassembles in order.
    """
    if workers <= 1:
        return [extract(d) for d in docs]
    from .parallel import extract_parallel

    return extract_parallel(docs, workers)


def stats_from_vectors(
    vectors: list[FeatureVector],
    *,
    label: str,
    seed: int | None = None,
    sample_limit: int | None = None,
    skipped: int = 0,
    input_digest: str | None = None,
    build_timestamp: str | None = None,
) -> BaselineStats:
    if not vectors:
        raise InputError("no documents: cannot build a baseline from an empty corpus")
    n = len(vectors)
    total_tokens = sum(v.token_count for v in vectors)
    feats: dict[FeatureId, FeatureStats] = {}
    for f in FEATURE_ORDER:
        freqs = [v.values[f] for v in vectors]
        mu = math.fsum(freqs) / n
        sigma = math.sqrt(math.fsum((x - mu) ** 2 for x in freqs) / n)
        total = sum(v.counts[f] for v in vectors)
        pooled = total * 1000.0 / total_tokens if total_tokens else 0.0
        feats[f] = FeatureStats(
            mu=mu,
            sigma=sigma,
            cv=(sigma / mu) if mu > 0 else None,
            mu_pooled=pooled,
            count=total,
        )
    return BaselineStats(
        corpus_label=label,
        taxonomy_version=TAXONOMY_VERSION,
        doc_count=n,
        token_count=total_tokens,
        features=feats,
        seed=seed,
        sample_limit=sample_limit,
        skipped=skipped,
        input_digest=input_digest,
        build_timestamp=build_timestamp,
    )


def high_standard_error(stats: BaselineStats) -> list[FeatureId]:
    """Features whose mean is material (mu >= 0.1 per 1,000) but whose
    standard error sigma/sqrt(n) exceeds 0.032 per 1,000."""
    flagged = []
    root_n = math.sqrt(stats.doc_count)
    for f in FEATURE_ORDER:
        fs = stats.features[f]
        if fs.mu >= MU_FLOOR and fs.sigma / root_n > SE_LIMIT:
            flagged.append(f)
    return flagged


def build_baseline(
    stream: DocumentStream,
    *,
    label: str,
    sample_limit: int | None = None,
    seed: int = 42,
    workers: int = 1,
    build_timestamp: str | None = None,
) -> BaselineStats:
    """Stream a corpus into per-document vectors and summary statistics.

    With sample_limit set and more documents than the limit, a seeded
    reservoir keeps exactly sample_limit of them; the sample is
    deterministic for fixed seed and input order.
    """
    if sample_limit is not None:
        docs: Iterable[Document] = reservoir_sample(stream, sample_limit, seed)
        vectors = extract_vectors(docs, workers)
    else:
        vectors = extract_vectors(stream, workers)
    if not vectors:
        raise InputError(f"no documents ingested from {stream.source}")
    stats = stats_from_vectors(
        vectors,
        label=label,
        seed=seed,
        sample_limit=sample_limit,
        skipped=stream.skipped,
        input_digest=stream.digest,
        build_timestamp=build_timestamp,
    )
    flagged = high_standard_error(stats)
    if flagged:
        names = ", ".join(f.value for f in flagged)
        warnings.warn(
            f"baseline {label!r}: standard error above {SE_LIMIT} per 1,000 for "
            f"material features: {names}; consider more documents",
            RuntimeWarning,
            stacklevel=2,
        )
    return stats


def baseline_to_dict(stats: BaselineStats) -> dict:
    return {
        "schema": BASELINE_SCHEMA,
        "tool_version": __version__,
        "taxonomy_version": stats.taxonomy_version,
        "corpus_label": stats.corpus_label,
        "doc_count": stats.doc_count,
        "token_count": stats.token_count,
        "skipped": stats.skipped,
        "seed": stats.seed,
        "sample_limit": stats.sample_limit,
        "build_timestamp": stats.build_timestamp,
        "input_digest": stats.input_digest,
        "features": {
            f.value: {
                "mu": fs.mu,
                "sigma": fs.sigma,
                "cv": fs.cv,
                "mu_pooled": fs.mu_pooled,
                "count": fs.count,
            }
            for f, fs in stats.features.items()
        },
    }


def save_baseline(stats: BaselineStats, path: str | Path) -> None:
    from .reports import dump_json

    dump_json(baseline_to_dict(stats), path)


def baseline_from_dict(obj: dict, source: str = "<baseline>") -> BaselineStats:
    if not isinstance(obj, dict) or obj.get("schema") != BASELINE_SCHEMA:
        raise InputError(f"{source}: unsupported schema {obj.get('schema')!r}, expected {BASELINE_SCHEMA!r}")
    file_tax = obj.get("taxonomy_version")
    if file_tax != TAXONOMY_VERSION:
        raise InputError(
            f"{source}: taxonomy version mismatch: file has {file_tax!r}, tool expects {TAXONOMY_VERSION!r}"
        )
    raw_feats = obj.get("features")
    if not isinstance(raw_feats, dict):
        raise InputError(f"{source}: incomplete baseline: no features table")
    feats: dict[FeatureId, FeatureStats] = {}
    for f in FEATURE_ORDER:
        entry = raw_feats.get(f.value)
        if entry is None:
            raise InputError(f"{source}: incomplete baseline: missing feature {f.value!r}")
        feats[f] = FeatureStats(
            mu=float(entry["mu"]),
            sigma=float(entry["sigma"]),
            cv=None if entry.get("cv") is None else float(entry["cv"]),
            mu_pooled=float(entry["mu_pooled"]),
            count=int(entry["count"]),
        )
    return BaselineStats(
        corpus_label=str(obj.get("corpus_label", "")),
        taxonomy_version=file_tax,
        doc_count=int(obj["doc_count"]),
        token_count=int(obj["token_count"]),
        features=feats,
        seed=obj.get("seed"),
        sample_limit=obj.get("sample_limit"),
        skipped=int(obj.get("skipped", 0)),
        build_timestamp=obj.get("build_timestamp"),
        input_digest=obj.get("input_digest"),
    )


def load_baseline(path: str | Path) -> BaselineStats:
    path = Path(path)
    try:
        obj = json.loads(path.read_text("utf-8"))
    except OSError as e:
        raise InputError(f"{path}: cannot read baseline: {e}") from None
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise InputError(f"{path}: not a baseline file: {e}") from None
    return baseline_from_dict(obj, source=str(path))


@dataclass(frozen=True, slots=True)
class ValidationResult:
    """Test-retest agreement between two baselines of the same corpus."""

    r: float | None
    passed: bool | None  # None when degenerate
    degenerate: bool
    cv_high_a: int
    cv_high_b: int

    # agreement bar for mu vectors across two samples of one corpus
    R_PASS = 0.95


def validate_baseline(a: BaselineStats, b: BaselineStats) -> ValidationResult:
    """Pearson r across the 24 per-feature mu values of two baselines.

    r > 0.95 counts as stable extraction; zero variance on either side is
    degenerate and yields no verdict. Taxonomy mismatch is fatal.
    """
    if a.taxonomy_version != b.taxonomy_version:
        raise InputError(
            f"taxonomy version mismatch: {a.taxonomy_version!r} vs {b.taxonomy_version!r}"
        )
    from .stats import pearson

    mus_a = [a.features[f].mu for f in FEATURE_ORDER]
    mus_b = [b.features[f].mu for f in FEATURE_ORDER]
    res = pearson(mus_a, mus_b)
    cv_high_a = sum(1 for f in FEATURE_ORDER if (a.features[f].cv or 0) > 0.5)
    cv_high_b = sum(1 for f in FEATURE_ORDER if (b.features[f].cv or 0) > 0.5)
    if res.degenerate:
        return ValidationResult(None, None, True, cv_high_a, cv_high_b)
    return ValidationResult(res.statistic, res.statistic > ValidationResult.R_PASS, False, cv_high_a, cv_high_b)


@dataclass(frozen=True, slots=True)
class SampleSet:
    """A labeled collection of extracted documents (model outputs)."""

    label: str
    vectors: list[FeatureVector]
    token_count: int
    doc_count: int
    skipped: int = 0
    input_digest: str | None = None


def load_sample_set(
    path: str | Path,
    fmt: str,
    *,
    label: str | None = None,
    delimiter: str = "----",
    workers: int = 1,
) -> tuple[SampleSet, list[Document]]:
    """Ingest and extract a sample set; also returns the Documents for
    consumers that need raw text (diversity metrics)."""
    stream = ingest(path, fmt, delimiter)
    docs = list(stream)
    if not docs:
        raise InputError(f"no documents ingested from {stream.source}")
    vectors = extract_vectors(docs, workers)
    sample = SampleSet(
        label=label or Path(path).stem,
        vectors=vectors,
        token_count=sum(v.token_count for v in vectors),
        doc_count=len(vectors),
        skipped=stream.skipped,
        input_digest=stream.digest,
    )
    return sample, docs
