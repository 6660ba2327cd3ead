"""Sweep orchestration against the real scoring tool.

These tests shell out to the actual stylodiv executable, exactly as the
sweep does in production; nothing here stubs the scorer. Scale is kept
tiny so the whole file runs in well under a minute.
"""

import csv
import json
import shutil
import subprocess

import pytest

import entropy_lab.sweep as sweep_mod
from entropy_lab.config import LabConfig
from entropy_lab.data import synthetic_corpus
from entropy_lab.sweep import sweep_and_score, write_corpus_jsonl

pytestmark = pytest.mark.skipif(
    shutil.which("stylodiv") is None, reason="stylodiv CLI not on PATH"
)


def small_config(tmp_path, lambdas=(0.0, 2.0), samples=6) -> LabConfig:
    corpus = tmp_path / "corpus.txt"
    corpus.write_text(synthetic_corpus(24_000, seed=6), encoding="utf-8")
    return LabConfig(
        corpus=str(corpus),
        out_dir=str(tmp_path / "runs"),
        lambdas=tuple(lambdas),
        steps=20,
        batch_size=8,
        context=48,
        dim=48,
        n_layers=1,
        n_heads=2,
        lr=3e-3,
        temperature=0.7,
        samples=samples,
        sample_len=100,
        seed=3,
        min_corpus_tokens=5_000,
    )


@pytest.fixture(scope="module")
def completed(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("sweep")
    cfg = small_config(tmp)
    quiet = lambda msg: None
    return cfg, sweep_and_score(cfg, log=quiet)


def test_all_lambdas_complete(completed):
    _, res = completed
    assert [o.status for o in res.outcomes] == ["ok", "ok"]
    for o in res.outcomes:
        assert o.val_perplexity > 1.0
        assert o.mean_output_entropy >= 0.0
        assert o.distance_from_one is not None
        assert o.distinct_4 is not None
        assert o.error is None


def test_results_table_shape(completed):
    _, res = completed
    with open(res.table_path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:4] == ["lambda", "status", "val_perplexity", "mean_output_entropy"]
    assert len(rows) == 3
    assert [r[0] for r in rows[1:]] == ["0", "2"]


def test_results_json_schema(completed):
    cfg, res = completed
    with open(res.json_path) as fh:
        blob = json.load(fh)
    assert blob["schema"] == "entropy-lab-results/1"
    assert blob["config"]["seed"] == cfg.seed
    assert len(blob["outcomes"]) == 2
    assert blob["features_table"] == res.features_table_path


def test_low_vs_high_feature_table(completed):
    _, res = completed
    assert res.features_table_path is not None
    with open(res.features_table_path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "feature"
    assert len(rows) == 25  # header + full taxonomy


def test_generated_files_pass_scoring_cli(completed, tmp_path):
    """Each samples file can be re-scored from scratch by the external tool."""
    _, res = completed
    for o in res.outcomes:
        out = tmp_path / f"re_{o.lam:g}.json"
        proc = subprocess.run(
            ["stylodiv", "analyze", "--input", o.samples_path,
             "--baseline", res.baseline_path, "--out", str(out)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert "aggregates" in json.loads(out.read_text())


def test_corpus_jsonl_writer(tmp_path):
    n = write_corpus_jsonl("alpha beta.\n\ngamma; delta.\n", tmp_path / "c.jsonl")
    lines = (tmp_path / "c.jsonl").read_text().splitlines()
    assert n == 2 and len(lines) == 2
    assert json.loads(lines[0]) == {"id": "corpus-00000", "text": "alpha beta."}


def test_failed_lambda_recorded_and_table_still_written(tmp_path, monkeypatch):
    cfg = small_config(tmp_path, lambdas=(0.0, 1.0))
    real_train = sweep_mod.train

    def sabotaged(text, base, tc, path, **kw):
        if tc.lam == 1.0:
            raise RuntimeError("synthetic stage failure")
        return real_train(text, base, tc, path, **kw)

    monkeypatch.setattr(sweep_mod, "train", sabotaged)
    res = sweep_and_score(cfg, log=lambda m: None)
    by_lam = {o.lam: o for o in res.outcomes}
    assert by_lam[0.0].status == "ok"
    assert by_lam[1.0].status == "failed"
    assert "synthetic stage failure" in by_lam[1.0].error
    with open(res.table_path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 3  # table emitted despite the failure
    assert res.features_table_path is None  # only one lambda completed
