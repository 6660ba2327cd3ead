"""Command line entry point.

Commands:

* baseline   summarize a reference corpus into a baseline file
* extract    feature vectors for a collection (aggregate and per document)
* analyze    amplification ratios of a collection against a baseline
* compare    contrast two collections against one baseline
* diversity  mode-collapse metrics for a collection
* ablate     feature-subset agreement across saved reports
* simulate   absorbing-state mechanism model, single run or sweep
* report     render saved reports into cross-model tables

Exit codes: 0 success, 2 bad input or arguments, 1 any other failure.
Outputs are deterministic: rerunning a command with the same inputs and
seed produces byte-identical files regardless of worker count.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import InputError, __version__
from .ablation import PRESETS, SubsetAnalysis, analyze_subset, subset_divergence, top_k_by_divergence
from .corpus import (
    INGEST_FORMATS,
    build_baseline,
    ingest,
    load_baseline,
    load_sample_set,
    save_baseline,
    validate_baseline,
)
from .divergence import (
    DEFAULT_DELTA,
    amplification,
    divergence_report,
    feature_table,
    pairwise_change,
    per_document_distances,
    significant_features,
)
from .diversity import diversity_report
from .features import FEATURE_ORDER, TAXONOMY_VERSION, FeatureId, aggregate
from .mechsim import SWEEP_AXES, MechanismParams, analytic_amplification, simulate, sweep
from .parallel import resolve_workers
from .reports import (
    ABLATION_SCHEMA,
    COMPARE_SCHEMA,
    REPORT_SCHEMA,
    SWEEP_SCHEMA,
    diversity_to_dict,
    dump_json,
    features_to_dict,
    load_json,
    render_ablation_table,
    render_analyze_text,
    render_compare_features,
    render_compare_summary,
    render_diversity_table,
    render_feature_table,
    render_heatmap,
    render_model_table,
    render_ratio_table,
    render_sweep,
    report_from_dict,
    report_to_dict,
    sep_for,
)
from .stats import bonferroni, permutation_test

DEFAULT_SEED = 42


@dataclass(frozen=True)
class RunConfig:
    """Resolved knobs shared by corpus-reading commands."""

    inputs: tuple[str, ...]
    out: str | None
    fmt: str
    workers: int
    seed: int
    delta: float
    sample_limit: int | None = None
    delimiter: str = "----"


def _corpus_args(p: argparse.ArgumentParser, *, name: str = "--input", required: bool = True) -> None:
    p.add_argument(name, required=required, help="corpus path")
    p.add_argument("--format", default="jsonl", choices=INGEST_FORMATS, help="corpus layout (default jsonl)")
    p.add_argument("--delimiter", default="----", help="document separator line for txt-delim (default ----)")


def _table_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--table-format", default="csv", choices=("csv", "tsv"), help="delimiter for table outputs")


def _parse_features(spec: str | None) -> frozenset[FeatureId]:
    if not spec:
        return frozenset()
    out = set()
    for name in spec.split(","):
        name = name.strip()
        if not name:
            continue
        try:
            out.add(FeatureId(name))
        except ValueError:
            valid = ", ".join(f.value for f in FEATURE_ORDER)
            raise InputError(f"unknown feature {name!r}; known features: {valid}") from None
    return frozenset(out)


def _parse_grid(spec: str) -> list[float]:
    try:
        values = [float(tok) for tok in spec.split(",") if tok.strip()]
    except ValueError:
        raise InputError(f"bad grid {spec!r}: expected comma-separated numbers") from None
    if not values:
        raise InputError("empty sweep grid")
    return values


def _write_text(path: str | Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _stamp(args) -> str | None:
    # off by default so reruns stay byte-identical
    if getattr(args, "stamp_time", False):
        return datetime.now(timezone.utc).isoformat(timespec="seconds")
    return None


# ---------------------------------------------------------------- commands


def cmd_baseline(args) -> int:
    workers = resolve_workers(args.workers)
    label = args.label or Path(args.input).stem
    stream = ingest(args.input, args.format, args.delimiter)
    stats = build_baseline(
        stream,
        label=label,
        sample_limit=args.sample_limit,
        seed=args.seed,
        workers=workers,
        build_timestamp=_stamp(args),
    )
    save_baseline(stats, args.out)
    print(
        f"baseline {label!r}: {stats.doc_count} docs, {stats.token_count} tokens, "
        f"{stats.skipped} skipped -> {args.out}"
    )
    if args.check:
        other = load_baseline(args.check)
        v = validate_baseline(stats, other)
        if v.degenerate:
            print("validation: degenerate (zero variance across feature means)")
            return 1
        verdict = "pass" if v.passed else "FAIL"
        print(
            f"validation vs {args.check}: r={v.r:.4f} ({verdict}, bar {v.R_PASS}); "
            f"high-cv features: {v.cv_high_a} here, {v.cv_high_b} there"
        )
        if not v.passed:
            return 1
    return 0


def cmd_extract(args) -> int:
    workers = resolve_workers(args.workers)
    sample, docs = load_sample_set(
        args.input, args.format, label=args.label, delimiter=args.delimiter, workers=workers
    )
    agg = aggregate(sample.vectors)
    if args.per_doc:
        with open(args.per_doc, "w", encoding="utf-8") as fh:
            for doc, vec in zip(docs, sample.vectors):
                row = {
                    "id": doc.id,
                    "token_count": vec.token_count,
                    "counts": {f.value: vec.counts[f] for f in FEATURE_ORDER},
                    "values": {f.value: vec.values[f] for f in FEATURE_ORDER},
                }
                fh.write(json.dumps(row, sort_keys=True, ensure_ascii=True) + "\n")
    if args.out:
        dump_json(
            features_to_dict(
                agg,
                label=sample.label,
                digests={"input": sample.input_digest},
                skipped=sample.skipped,
            ),
            args.out,
        )
    print(
        f"extracted {sample.label!r}: {sample.doc_count} docs, {sample.token_count} tokens, "
        f"{sample.skipped} skipped"
    )
    return 0


def _sig_against_docs(args, sample_vectors, workers: int):
    """Optional per-feature rank-sum tests against baseline documents."""
    if not args.baseline_docs:
        return None, None
    base_set, _ = load_sample_set(
        args.baseline_docs,
        args.baseline_docs_format,
        label="baseline-docs",
        delimiter=args.delimiter,
        workers=workers,
    )
    hits, pvals = significant_features(sample_vectors, base_set.vectors, alpha=args.alpha)
    return len(hits), pvals


def cmd_analyze(args) -> int:
    workers = resolve_workers(args.workers)
    baseline = load_baseline(args.baseline)
    sample, _ = load_sample_set(
        args.input, args.format, label=args.label, delimiter=args.delimiter, workers=workers
    )
    exclude = _parse_features(args.exclude)
    sig_count, pvals = _sig_against_docs(args, sample.vectors, workers)
    agg = aggregate(sample.vectors)
    rep = divergence_report(
        amplification(agg, baseline),
        delta=args.delta,
        exclude=exclude,
        label=sample.label,
        sig_feature_count=sig_count,
    )
    sys.stdout.write(render_analyze_text(rep))
    if args.out:
        dump_json(
            report_to_dict(
                rep,
                digests={"samples": sample.input_digest, "baseline": baseline.input_digest},
                doc_count=sample.doc_count,
                token_count=sample.token_count,
                feature_pvalues=pvals,
            ),
            args.out,
        )
    if args.table:
        _write_text(args.table, render_ratio_table(rep, sep_for(args.table_format)))
    return 0


def cmd_compare(args) -> int:
    workers = resolve_workers(args.workers)
    baseline = load_baseline(args.baseline)
    exclude = _parse_features(args.exclude)
    base_set, _ = load_sample_set(
        args.base, args.format, label=args.base_label, delimiter=args.delimiter, workers=workers
    )
    tuned_set, _ = load_sample_set(
        args.tuned, args.format, label=args.tuned_label, delimiter=args.delimiter, workers=workers
    )
    rep_base = divergence_report(
        amplification(aggregate(base_set.vectors), baseline),
        delta=args.delta, exclude=exclude, label=base_set.label,
    )
    rep_tuned = divergence_report(
        amplification(aggregate(tuned_set.vectors), baseline),
        delta=args.delta, exclude=exclude, label=tuned_set.label,
    )
    dist_base = per_document_distances(base_set.vectors, baseline, exclude=exclude)
    dist_tuned = per_document_distances(tuned_set.vectors, baseline, exclude=exclude)
    test = permutation_test(dist_base, dist_tuned, resamples=args.resamples, seed=args.seed)
    hits, pvals = significant_features(tuned_set.vectors, base_set.vectors, alpha=args.alpha)
    threshold = bonferroni(args.alpha, len(FEATURE_ORDER))
    change = pairwise_change(rep_base, rep_tuned)

    pct = "n/a" if change.pct_change is None else f"{change.pct_change:+.1f}%"
    print(
        f"{change.base_label} mean AR {change.base_mean_ar:.4f} -> "
        f"{change.tuned_label} mean AR {change.tuned_mean_ar:.4f} ({pct})"
    )
    print(
        f"distance-from-1 shift: p={test.p_value:.4g} "
        f"({test.method}, {args.resamples} resamples, seed {test.seed}"
        f"{', degenerate' if test.degenerate else ''})"
    )
    print(f"features shifted at alpha={args.alpha} (threshold {threshold:.5f}): {len(hits)}")

    sep = sep_for(args.table_format)
    if args.summary_table:
        _write_text(args.summary_table, render_compare_summary(change, test, sep))
    if args.features_table:
        _write_text(
            args.features_table,
            render_compare_features(rep_base, rep_tuned, pvals, threshold, sep),
        )
    if args.out:
        dump_json(
            {
                "schema": COMPARE_SCHEMA,
                "tool_version": __version__,
                "taxonomy_version": TAXONOMY_VERSION,
                "seed": args.seed,
                "alpha": args.alpha,
                "sig_threshold": threshold,
                "base": report_to_dict(
                    rep_base,
                    digests={"samples": base_set.input_digest, "baseline": baseline.input_digest},
                    doc_count=base_set.doc_count,
                    token_count=base_set.token_count,
                ),
                "tuned": report_to_dict(
                    rep_tuned,
                    digests={"samples": tuned_set.input_digest, "baseline": baseline.input_digest},
                    doc_count=tuned_set.doc_count,
                    token_count=tuned_set.token_count,
                ),
                "mean_ar_pct_change": change.pct_change,
                "distance_test": {
                    "statistic": test.statistic,
                    "p_value": test.p_value,
                    "method": test.method,
                    "n": list(test.n),
                    "seed": test.seed,
                    "resamples": args.resamples,
                    "degenerate": test.degenerate,
                },
                "feature_p_values": {f.value: pvals[f] for f in FEATURE_ORDER},
                "significant_features": sorted(f.value for f in hits),
            },
            args.out,
        )
    return 0


def cmd_diversity(args) -> int:
    workers = resolve_workers(args.workers)
    sample, docs = load_sample_set(
        args.input, args.format, label=args.label, delimiter=args.delimiter, workers=workers
    )
    rep = diversity_report(docs, label=sample.label)
    print(f"{rep.label!r}: {rep.doc_count} docs, {rep.token_count} tokens")
    print(f"self-BLEU-4        {rep.self_bleu4:.4f}")
    for n, v in ((2, rep.distinct_2), (3, rep.distinct_3), (4, rep.distinct_4)):
        print(f"distinct-{n}         {'n/a' if v is None else f'{v:.4f}'}")
    print(f"repetition rate    {rep.repetition_rate:.4f}")
    print(f"vocab diversity    {rep.vocab_diversity:.4f}")
    if args.out:
        dump_json(diversity_to_dict(rep, digests={"input": sample.input_digest}), args.out)
    if args.table:
        _write_text(args.table, render_diversity_table([rep], sep_for(args.table_format)))
    return 0


def _load_reports(paths: list[str]):
    reps = []
    for p in paths:
        reps.append(report_from_dict(load_json(p, REPORT_SCHEMA), source=p))
    return reps


def cmd_ablate(args) -> int:
    reports = _load_reports(args.reports)
    labels = [r.label for r in reports]
    if len(set(labels)) != len(labels):
        raise InputError(f"duplicate report labels: {sorted(labels)}")

    names: list[str]
    if args.subsets == "all":
        names = list(PRESETS)
    else:
        names = [s.strip() for s in args.subsets.split(",") if s.strip()]
        for name in names:
            if name not in PRESETS:
                raise InputError(f"unknown subset {name!r}; presets: {', '.join(PRESETS)}")
    subsets: dict[str, frozenset[FeatureId]] = {n: PRESETS[n] for n in names}
    if args.top_k:
        picked = top_k_by_divergence(feature_table(reports), args.top_k)
        subsets[f"top{args.top_k}"] = frozenset(picked)

    full_scores, _ = subset_divergence(reports, PRESETS["full"])
    entries: list[tuple[str, int, SubsetAnalysis]] = []
    detail: dict[str, dict] = {}
    for name, subset in subsets.items():
        scores, omitted = subset_divergence(reports, subset)
        analysis = analyze_subset(full_scores, scores)
        entries.append((name, len(subset), analysis))
        detail[name] = {
            "features": sorted(f.value for f in subset),
            "n_features": len(subset),
            "n_models": analysis.n_models,
            "spearman_rho": analysis.spearman_rho,
            "variance_captured_pct": analysis.variance_captured,
            "mae": analysis.mae,
            "degenerate": analysis.degenerate,
            "omitted_models": omitted,
            "scores": scores,
        }
    sep = sep_for(args.table_format)
    table = render_ablation_table(entries, sep)
    sys.stdout.write(table)
    if args.table:
        _write_text(args.table, table)
    if args.out:
        dump_json(
            {
                "schema": ABLATION_SCHEMA,
                "tool_version": __version__,
                "taxonomy_version": TAXONOMY_VERSION,
                "models": sorted(labels),
                "full_scores": full_scores,
                "subsets": detail,
            },
            args.out,
        )
    return 0


def cmd_simulate(args) -> int:
    params = MechanismParams(
        context_shift=args.context_shift,
        trigger_rate_formal=args.trigger_formal,
        trigger_rate_mixture=args.trigger_mixture,
        absorption=args.absorption,
        steps=args.steps,
        episodes=args.episodes,
        seed=args.seed,
    )
    if args.axis:
        grid = _parse_grid(args.grid)
        points = sweep(params, args.axis, grid)
        table = render_sweep(args.axis, points, sep_for(args.table_format))
        if args.table:
            _write_text(args.table, table)
        else:
            sys.stdout.write(table)
        if args.out:
            dump_json(
                {
                    "schema": SWEEP_SCHEMA,
                    "tool_version": __version__,
                    "seed": args.seed,
                    "axis": args.axis,
                    "params": {
                        "context_shift": params.context_shift,
                        "trigger_rate_formal": params.trigger_rate_formal,
                        "trigger_rate_mixture": params.trigger_rate_mixture,
                        "absorption": params.absorption,
                        "steps": params.steps,
                        "episodes": params.episodes,
                    },
                    "points": [
                        {
                            "axis_value": p.axis_value,
                            "amplification": p.amplification,
                            "mc_stderr": p.mc_stderr,
                            "analytic": p.analytic,
                            "mean_emissions": p.mean_emissions,
                        }
                        for p in points
                    ],
                },
                args.out,
            )
        return 0

    analytic = analytic_amplification(params)
    if args.analytic_only:
        print(f"analytic amplification: {analytic:.6g}")
        return 0
    outcome = simulate(params)
    print(
        f"simulated amplification {outcome.amplification:.4f} "
        f"(MC stderr {outcome.mc_stderr:.4f}, {params.episodes} episodes, seed {params.seed})"
    )
    print(f"analytic amplification {analytic:.4f}")
    print(
        f"emissions per episode: mean {outcome.mean_emissions:.4f}, "
        f"frequency {outcome.simulated_frequency:.4f} vs baseline {outcome.baseline_frequency:.4f} per 1,000"
    )
    if args.out:
        dump_json(
            {
                "schema": SWEEP_SCHEMA,
                "tool_version": __version__,
                "seed": params.seed,
                "axis": None,
                "params": {
                    "context_shift": params.context_shift,
                    "trigger_rate_formal": params.trigger_rate_formal,
                    "trigger_rate_mixture": params.trigger_rate_mixture,
                    "absorption": params.absorption,
                    "steps": params.steps,
                    "episodes": params.episodes,
                },
                "amplification": outcome.amplification,
                "analytic": analytic,
                "mc_stderr": outcome.mc_stderr,
                "mean_emissions": outcome.mean_emissions,
                "var_emissions": outcome.var_emissions,
                "simulated_frequency": outcome.simulated_frequency,
                "baseline_frequency": outcome.baseline_frequency,
            },
            args.out,
        )
    return 0


def cmd_report(args) -> int:
    reports = _load_reports(args.reports)
    sep = sep_for(args.table_format)
    ext = args.table_format
    model_table = render_model_table(reports, sep)
    sys.stdout.write(model_table)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_text(out / f"models.{ext}", model_table)
        _write_text(out / f"features.{ext}", render_feature_table(feature_table(reports), sep))
        _write_text(out / f"heatmap.{ext}", render_heatmap(reports, sep))
        print(f"wrote models.{ext}, features.{ext}, heatmap.{ext} to {out}", file=sys.stderr)
    return 0


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stylodiv",
        description="Stylometric divergence auditing for text collections.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("baseline", help="build baseline statistics from a reference corpus")
    _corpus_args(p)
    p.add_argument("--out", required=True, help="baseline JSON path")
    p.add_argument("--label", help="corpus label (default: input stem)")
    p.add_argument("--sample-limit", type=int, help="reservoir-sample at most this many documents")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--workers", type=int, help="extraction processes (default STYLODIV_WORKERS or 1)")
    p.add_argument("--stamp-time", action="store_true", help="record a build timestamp (breaks rerun byte-identity)")
    p.add_argument("--check", help="existing baseline JSON to validate against (exit 1 on disagreement)")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("extract", help="extract feature vectors from a collection")
    _corpus_args(p)
    p.add_argument("--out", help="aggregate feature-vector JSON path")
    p.add_argument("--per-doc", help="per-document JSONL path")
    p.add_argument("--label", help="collection label (default: input stem)")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("analyze", help="score a collection against a baseline")
    _corpus_args(p)
    p.add_argument("--baseline", required=True, help="baseline JSON from the baseline command")
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA, help="divergence tolerance (default 0.1)")
    p.add_argument("--exclude", help="comma-separated feature names to leave out")
    p.add_argument("--label", help="collection label (default: input stem)")
    p.add_argument("--out", help="report JSON path")
    p.add_argument("--table", help="per-feature table path")
    p.add_argument("--baseline-docs", help="baseline documents for per-feature rank-sum tests")
    p.add_argument("--baseline-docs-format", default="jsonl", choices=INGEST_FORMATS)
    p.add_argument("--alpha", type=float, default=0.05, help="family-wise significance level (default 0.05)")
    p.add_argument("--workers", type=int)
    _table_args(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("compare", help="contrast two collections against one baseline")
    p.add_argument("--base", required=True, help="reference collection path")
    p.add_argument("--tuned", required=True, help="contrast collection path")
    p.add_argument("--format", default="jsonl", choices=INGEST_FORMATS)
    p.add_argument("--delimiter", default="----")
    p.add_argument("--baseline", required=True)
    p.add_argument("--base-label", help="label for the reference collection")
    p.add_argument("--tuned-label", help="label for the contrast collection")
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.add_argument("--exclude", help="comma-separated feature names to leave out")
    p.add_argument("--resamples", type=int, default=10_000, help="permutation resamples (default 10000)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out", help="comparison JSON path")
    p.add_argument("--summary-table", help="one-row summary table path")
    p.add_argument("--features-table", help="per-feature before/after table path")
    p.add_argument("--workers", type=int)
    _table_args(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("diversity", help="mode-collapse metrics for a collection")
    _corpus_args(p)
    p.add_argument("--label")
    p.add_argument("--out", help="diversity JSON path")
    p.add_argument("--table", help="diversity table path")
    p.add_argument("--workers", type=int)
    _table_args(p)
    p.set_defaults(func=cmd_diversity)

    p = sub.add_parser("ablate", help="feature-subset agreement across saved reports")
    p.add_argument("--reports", nargs="+", required=True, help="three or more report JSON files")
    p.add_argument("--subsets", default="all", help="comma-separated preset names (default: all presets)")
    p.add_argument("--top-k", type=int, help="also analyze the k features with largest |mean AR - 1|")
    p.add_argument("--out", help="ablation JSON path")
    p.add_argument("--table", help="ablation table path")
    _table_args(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("simulate", help="absorbing-state mechanism model")
    p.add_argument("--context-shift", type=float, required=True, help="chance an episode starts structured")
    p.add_argument("--trigger-formal", type=float, required=True, help="per-step emission rate while structured")
    p.add_argument("--trigger-mixture", type=float, required=True, help="per-step emission rate otherwise")
    p.add_argument("--absorption", type=float, required=True, help="per-step persistence of the structured state")
    p.add_argument("--steps", type=int, default=512)
    p.add_argument("--episodes", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--axis", choices=SWEEP_AXES, help="sweep this parameter over --grid")
    p.add_argument("--grid", help="comma-separated sweep values")
    p.add_argument("--analytic-only", action="store_true", help="closed form only, no Monte Carlo")
    p.add_argument("--out", help="JSON output path")
    p.add_argument("--table", help="sweep table path (default: stdout)")
    _table_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="render saved reports into cross-model tables")
    p.add_argument("--reports", nargs="+", required=True, help="report JSON files")
    p.add_argument("--out-dir", help="directory for models/features/heatmap tables")
    _table_args(p)
    p.set_defaults(func=cmd_report)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "simulate" and args.axis and not args.grid:
        parser.error("--axis requires --grid")
    return args.func(args)


def main(argv=None) -> int:
    try:
        return run(argv)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:  # pragma: no cover
        return 130
    except Exception as e:  # noqa: BLE001 - CLI boundary
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
