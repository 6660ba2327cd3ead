"""Acceptance gates for the entropy lab.

Each test prints one PASS/FAIL line. The expensive gates share a single
reduced-scale sweep over the default lambda grid {0, 0.1, 1, 5}: a
120k-character corpus (the documented 100k-token floor stays in force),
a two-layer model, 300 steps, and 100 samples per lambda, all on CPU.
Every lambda run shares one seed, so comparisons across the grid are
paired. Directional gates assert order only, never effect sizes.
"""

import json
import shutil
import subprocess
import time

import pytest
import torch
import torch.nn.functional as F

from entropy_lab.config import LabConfig
from entropy_lab.data import synthetic_corpus
from entropy_lab.losses import per_position_loss, regularized_loss
from entropy_lab.sweep import sweep_and_score

RUNTIME_BUDGET_SECONDS = 8 * 3600


def check(name: str, cond: bool, detail: str = ""):
    tag = "PASS" if cond else "FAIL"
    suffix = f" [{detail}]" if detail and not cond else ""
    print(f"ACCEPTANCE {tag}: {name}{suffix}")
    assert cond, f"{name}{suffix}"


@pytest.fixture(scope="session")
def sweep(tmp_path_factory):
    if shutil.which("stylodiv") is None:
        pytest.skip("stylodiv CLI not on PATH")
    tmp = tmp_path_factory.mktemp("acceptance")
    corpus = tmp / "corpus.txt"
    corpus.write_text(synthetic_corpus(120_000, seed=0), encoding="utf-8")
    cfg = LabConfig(
        corpus=str(corpus),
        out_dir=str(tmp / "runs"),
        lambdas=(0.0, 0.1, 1.0, 5.0),
        steps=300,
        batch_size=24,
        context=96,
        dim=96,
        n_layers=2,
        n_heads=4,
        lr=3e-3,
        temperature=0.7,
        samples=100,
        sample_len=256,
        seed=3,
    )
    t0 = time.perf_counter()
    result = sweep_and_score(cfg, log=lambda m: None)
    elapsed = time.perf_counter() - t0
    return cfg, result, elapsed


def test_lambda_zero_objective_is_plain_cross_entropy():
    gen = torch.Generator().manual_seed(0)
    logits = torch.randn(6, 48, 53, generator=gen)
    targets = torch.randint(53, (6, 48), generator=gen)
    plain_tok = F.cross_entropy(
        logits.reshape(-1, 53), targets.reshape(-1), reduction="none"
    ).view(targets.shape)
    per_tok_equal = torch.equal(per_position_loss(logits, targets, 0.0), plain_tok)
    loss, _, _ = regularized_loss(logits, targets, 0.0)
    scalar_equal = torch.equal(loss, F.cross_entropy(logits.reshape(-1, 53), targets.reshape(-1)))
    check(
        "lambda-zero objective equals cross-entropy term by term (exact)",
        per_tok_equal and scalar_equal,
        f"per_token={per_tok_equal} scalar={scalar_equal}",
    )


def test_all_grid_points_complete(sweep):
    _, result, _ = sweep
    statuses = {o.lam: o.status for o in result.outcomes}
    check(
        "default lambda grid trains, samples, and scores end to end",
        all(s == "ok" for s in statuses.values()) and len(statuses) == 4,
        f"statuses={statuses}",
    )


def test_validation_perplexity_nondecreasing_in_lambda(sweep):
    _, result, _ = sweep
    ppl = [o.val_perplexity for o in result.outcomes]
    ordered = all(b >= a for a, b in zip(ppl, ppl[1:]))
    check(
        "validation perplexity nondecreasing in lambda (paired seeds)",
        ordered,
        f"perplexities={[f'{p:.4f}' for p in ppl]}",
    )
    check("every perplexity exceeds 1", all(p > 1.0 for p in ppl), f"{ppl}")


def test_distinct_4_nondecreasing_in_lambda(sweep):
    _, result, _ = sweep
    d4 = [o.distinct_4 for o in result.outcomes]
    ordered = all(b >= a for a, b in zip(d4, d4[1:]))
    check(
        "distinct-4 of samples nondecreasing in lambda (paired seeds)",
        ordered,
        f"distinct_4={[f'{v:.4f}' for v in d4]}",
    )


def test_output_entropy_monotone_with_tolerance(sweep):
    _, result, _ = sweep
    ent = [o.mean_output_entropy for o in result.outcomes]
    inversions = [
        (a, b) for a, b in zip(ent, ent[1:]) if b < a
    ]
    within = all((a - b) / a <= 0.02 for a, b in inversions)
    check(
        "mean output entropy nondecreasing (at most one inversion within 2%)",
        len(inversions) <= 1 and within and all(e >= 0 for e in ent),
        f"entropies={[f'{e:.4f}' for e in ent]} inversions={inversions}",
    )
    by_lam = {o.lam: o.mean_output_entropy for o in result.outcomes}
    check(
        "entropy bonus raises output entropy (lambda 5 strictly above lambda 0)",
        by_lam[5.0] > by_lam[0.0],
        f"lam0={by_lam[0.0]:.4f} lam5={by_lam[5.0]:.4f}",
    )


def test_every_samples_file_scores_cleanly(sweep, tmp_path):
    _, result, _ = sweep
    failures = []
    for o in result.outcomes:
        rep = tmp_path / f"report_{o.lam:g}.json"
        div = tmp_path / f"div_{o.lam:g}.json"
        a = subprocess.run(
            ["stylodiv", "analyze", "--input", o.samples_path,
             "--baseline", result.baseline_path, "--out", str(rep)],
            capture_output=True, text=True,
        )
        d = subprocess.run(
            ["stylodiv", "diversity", "--input", o.samples_path, "--out", str(div)],
            capture_output=True, text=True,
        )
        if a.returncode != 0 or d.returncode != 0:
            failures.append((o.lam, a.returncode, d.returncode))
            continue
        report = json.loads(rep.read_text())
        diversity = json.loads(div.read_text())
        if "distance_from_one" not in report["aggregates"] or diversity["distinct_4"] is None:
            failures.append((o.lam, "missing fields", ""))
    check(
        "every generated JSONL yields divergence and diversity reports",
        not failures,
        f"failures={failures}",
    )


def test_low_vs_high_contrast_table_emitted(sweep):
    _, result, _ = sweep
    ok = result.features_table_path is not None
    rows = 0
    if ok:
        with open(result.features_table_path) as fh:
            rows = sum(1 for _ in fh)
    check(
        "lambda 0 versus lambda 5 per-feature table emitted",
        ok and rows == 25,
        f"path={result.features_table_path} rows={rows}",
    )


def test_sweep_runtime_within_budget(sweep):
    _, _, elapsed = sweep
    check(
        "reduced-step sweep finishes inside the CPU budget",
        elapsed < RUNTIME_BUDGET_SECONDS,
        f"elapsed={elapsed:.1f}s budget={RUNTIME_BUDGET_SECONDS}s",
    )
    print(f"  (sweep wall time: {elapsed:.1f}s)")
