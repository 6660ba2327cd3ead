"""Lambda sweep with external stylometric scoring.

The sweep trains one model per lambda (sequentially, shared seed so the
runs are paired), samples from each checkpoint, and then scores the
samples with the stylodiv command line tool: a divergence report
against a baseline built from the lab's own training corpus, and a
lexical diversity report. The scoring tool is always invoked as a
subprocess; this package reads only the JSON files it writes, never its
internals.

Per-lambda failures (divergence during training, scoring errors) are
caught and recorded in the results table, which is emitted for whatever
completed. When the grid contains at least two distinct lambdas, the
lowest and highest are also contrasted feature by feature (with the
default grid that is lambda 0 against lambda 5).
"""

from __future__ import annotations

import csv
import json
import shlex
import subprocess
from dataclasses import asdict, dataclass
from pathlib import Path

from .config import LabConfig
from .data import corpus_paragraphs, load_corpus
from .generate import generate_jsonl
from .model import ModelConfig
from .train import TrainConfig, train

RESULTS_SCHEMA = "entropy-lab-results/1"


@dataclass(frozen=True)
class LambdaOutcome:
    lam: float
    status: str  # "ok" or "failed"
    error: str | None = None
    val_perplexity: float | None = None
    mean_output_entropy: float | None = None
    samples_path: str | None = None
    distance_from_one: float | None = None
    distinct_4: float | None = None


@dataclass(frozen=True)
class SweepResult:
    outcomes: tuple[LambdaOutcome, ...]
    baseline_path: str
    table_path: str
    json_path: str
    features_table_path: str | None


def _run_cli(cmd: list[str]) -> None:
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        tail = (proc.stderr or proc.stdout).strip().splitlines()[-3:]
        raise RuntimeError(f"{' '.join(cmd[:2])} exited {proc.returncode}: {' | '.join(tail)}")


def write_corpus_jsonl(text: str, out_path: Path) -> int:
    """One document per paragraph of the training corpus."""
    paras = corpus_paragraphs(text)
    with open(out_path, "w", encoding="utf-8") as fh:
        for i, para in enumerate(paras):
            fh.write(json.dumps({"id": f"corpus-{i:05d}", "text": para}) + "\n")
    return len(paras)


def _score_samples(
    stylodiv: list[str], samples: Path, baseline: Path, out_dir: Path, tag: str
) -> tuple[float, float]:
    report = out_dir / f"report_{tag}.json"
    div = out_dir / f"diversity_{tag}.json"
    _run_cli(stylodiv + [
        "analyze", "--input", str(samples), "--baseline", str(baseline),
        "--label", tag, "--out", str(report),
    ])
    _run_cli(stylodiv + [
        "diversity", "--input", str(samples), "--label", tag, "--out", str(div),
    ])
    with open(report, encoding="utf-8") as fh:
        distance = json.load(fh)["aggregates"]["distance_from_one"]
    with open(div, encoding="utf-8") as fh:
        distinct_4 = json.load(fh)["distinct_4"]
    return float(distance), float(distinct_4)


def _write_table(path: Path, outcomes: list[LambdaOutcome]) -> None:
    cols = (
        "lambda", "status", "val_perplexity", "mean_output_entropy",
        "distance_from_one", "distinct_4", "samples_path", "error",
    )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for o in outcomes:
            w.writerow([
                f"{o.lam:g}", o.status,
                "" if o.val_perplexity is None else f"{o.val_perplexity:.6g}",
                "" if o.mean_output_entropy is None else f"{o.mean_output_entropy:.6g}",
                "" if o.distance_from_one is None else f"{o.distance_from_one:.6g}",
                "" if o.distinct_4 is None else f"{o.distinct_4:.6g}",
                o.samples_path or "", o.error or "",
            ])


def sweep_and_score(cfg: LabConfig, *, log=None) -> SweepResult:
    say = log or (lambda msg: print(msg, flush=True))
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stylodiv = shlex.split(cfg.stylodiv_cmd)

    text = load_corpus(cfg.corpus)
    corpus_jsonl = out_dir / "corpus.jsonl"
    n_docs = write_corpus_jsonl(text, corpus_jsonl)
    say(f"corpus: {len(text)} chars, {n_docs} documents")

    baseline = out_dir / "baseline.json"
    _run_cli(stylodiv + [
        "baseline", "--input", str(corpus_jsonl),
        "--out", str(baseline), "--label", "entropy-lab-corpus",
    ])
    say(f"baseline written to {baseline}")

    model_base = ModelConfig(
        vocab_size=0, dim=cfg.dim, n_layers=cfg.n_layers,
        n_heads=cfg.n_heads, context=cfg.context,
    )
    outcomes: list[LambdaOutcome] = []
    for lam in cfg.lambdas:
        tag = f"lam{lam:g}"
        try:
            tc = TrainConfig(
                lam=lam, steps=cfg.steps, batch_size=cfg.batch_size,
                lr=cfg.lr, seed=cfg.seed, min_corpus_tokens=cfg.min_corpus_tokens,
            )
            tr = train(text, model_base, tc, out_dir / f"checkpoint_{tag}.pt")
            say(
                f"{tag}: trained {tr.steps} steps, val perplexity {tr.val_perplexity:.3f}, "
                f"output entropy {tr.mean_output_entropy:.3f} nats"
            )
            samples = generate_jsonl(
                tr.checkpoint_path, out_dir / f"samples_{tag}.jsonl",
                n=cfg.samples, max_new_tokens=cfg.sample_len,
                temperature=cfg.temperature, seed=cfg.seed,
            )
            distance, distinct_4 = _score_samples(stylodiv, samples, baseline, out_dir, tag)
            say(f"{tag}: distance from 1 = {distance:.4f}, distinct-4 = {distinct_4:.4f}")
            outcomes.append(LambdaOutcome(
                lam=lam, status="ok",
                val_perplexity=tr.val_perplexity,
                mean_output_entropy=tr.mean_output_entropy,
                samples_path=str(samples),
                distance_from_one=distance, distinct_4=distinct_4,
            ))
        except Exception as e:  # recorded per lambda; the sweep continues
            say(f"{tag}: FAILED: {e}")
            outcomes.append(LambdaOutcome(lam=lam, status="failed", error=str(e)))

    features_table: str | None = None
    ok = [o for o in outcomes if o.status == "ok"]
    if len({o.lam for o in ok}) >= 2:
        low = min(ok, key=lambda o: o.lam)
        high = max(ok, key=lambda o: o.lam)
        features_path = out_dir / f"features_lam{low.lam:g}_vs_lam{high.lam:g}.csv"
        try:
            _run_cli(stylodiv + [
                "compare",
                "--base", str(low.samples_path), "--tuned", str(high.samples_path),
                "--baseline", str(baseline),
                "--base-label", f"lam{low.lam:g}", "--tuned-label", f"lam{high.lam:g}",
                "--seed", str(cfg.seed),
                "--out", str(out_dir / "compare_low_vs_high.json"),
                "--features-table", str(features_path),
            ])
            features_table = str(features_path)
            say(f"per-feature contrast written to {features_path}")
        except Exception as e:
            say(f"per-feature contrast FAILED: {e}")

    table_path = out_dir / "lab_results.csv"
    _write_table(table_path, outcomes)
    json_path = out_dir / "lab_results.json"
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "schema": RESULTS_SCHEMA,
                "config": asdict(cfg),
                "baseline": str(baseline),
                "features_table": features_table,
                "outcomes": [asdict(o) for o in outcomes],
            },
            fh, indent=2, sort_keys=True,
        )
        fh.write("\n")
    say(f"results table written to {table_path}")
    return SweepResult(
        outcomes=tuple(outcomes),
        baseline_path=str(baseline),
        table_path=str(table_path),
        json_path=str(json_path),
        features_table_path=features_table,
    )
