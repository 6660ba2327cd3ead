#!/usr/bin/env python3
"""Extraction throughput benchmark on synthetic documents.

Generates a corpus once, then times extraction at several worker
counts. Numbers are wall-clock and host-dependent; the point is the
shape (docs/sec and scaling), not the absolute values.

Usage:
    python3 scripts/benchmark.py --docs 3000 --tokens 300 --workers 1,2,4,8
"""

from __future__ import annotations

import argparse
import time

from stylodiv.corpus import extract_vectors
from stylodiv.synth import SynthConfig, generate_texts
from stylodiv.textmodel import Document


def run(docs: int, tokens: int, workers: list[int], repeats: int) -> None:
    cfg = SynthConfig(docs=docs, tokens_per_doc=tokens, seed=5)
    t0 = time.perf_counter()
    corpus = [Document(i, t) for i, t in generate_texts(cfg)]
    print(f"corpus: {docs} docs x {tokens} tokens (generated in {time.perf_counter() - t0:.2f}s)")

    extract_vectors(corpus[: min(200, docs)])  # warm caches before timing
    print(f"{'workers':>8} {'best s':>8} {'docs/s':>10}")
    for w in workers:
        best = min(_timed(corpus, w) for _ in range(repeats))
        print(f"{w:>8} {best:>8.3f} {docs / best:>10,.0f}")


def _timed(corpus, workers: int) -> float:
    t0 = time.perf_counter()
    extract_vectors(corpus, workers=workers)
    return time.perf_counter() - t0


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--docs", type=int, default=3000)
    ap.add_argument("--tokens", type=int, default=300)
    ap.add_argument("--workers", default="1,2,4,8", help="comma-separated worker counts")
    ap.add_argument("--repeats", type=int, default=3, help="take the best of N runs")
    args = ap.parse_args()
    run(args.docs, args.tokens, [int(w) for w in args.workers.split(",")], args.repeats)


if __name__ == "__main__":
    main()
