"""Process-pool fan-out for feature extraction.

Extraction is a pure function of the text, so parallel results are
reassembled in input order and are bit-identical to the serial path for
any worker count. Workers exchange compact tuples rather than
FeatureVectors to keep pickling off the hot path.
"""

from __future__ import annotations

import os
from multiprocessing import get_context
from typing import Iterable

from .features import FEATURE_ORDER, FeatureVector, extract, raw_counts
from .textmodel import Document

WORKERS_ENV = "STYLODIV_WORKERS"


def resolve_workers(requested: int | None) -> int:
    """Worker count: explicit argument, else STYLODIV_WORKERS, else 1."""
    if requested is None:
        env = os.environ.get(WORKERS_ENV)
        requested = int(env) if env else 1
    if requested < 1:
        from . import InputError

        raise InputError(f"worker count must be >= 1, got {requested}")
    return requested


def _extract_compact(item: tuple[str, str]) -> tuple[int, tuple[int, ...]]:
    doc = Document(item[0], item[1])
    counts = raw_counts(doc)
    return doc.token_count, tuple(counts[f] for f in FEATURE_ORDER)


def _rebuild(tk: int, packed: tuple[int, ...]) -> FeatureVector:
    counts = dict(zip(FEATURE_ORDER, packed))
    if tk > 0:
        values = {f: c * 1000.0 / tk for f, c in counts.items()}
    else:
        values = dict.fromkeys(FEATURE_ORDER, 0.0)
    return FeatureVector(values=values, counts=counts, token_count=tk, doc_count=1)


def extract_parallel(docs: Iterable[Document], workers: int) -> list[FeatureVector]:
    docs = list(docs)
    if not docs:
        return []
    # Extraction is CPU bound, so processes beyond the physical cores
    # only add fork and scheduling overhead; results are identical for
    # any pool size because the map preserves input order. A degenerate
    # pool of one is pure overhead, so it runs inline instead.
    pool_size = min(workers, os.cpu_count() or 1, len(docs))
    if pool_size == 1:
        return [extract(d) for d in docs]
    items = [(d.id, d.text) for d in docs]
    chunksize = max(1, len(items) // (pool_size * 4))
    ctx = get_context("fork")
    with ctx.Pool(pool_size) as pool:
        packed = pool.map(_extract_compact, items, chunksize=chunksize)
    return [_rebuild(tk, counts) for tk, counts in packed]
