"""Versioned file formats and table renderers.

Every JSON artifact is self-describing: a "schema" tag (name/version),
the tool and taxonomy versions, the seed when one was used, and sha256
digests of the inputs. Serialization is deterministic - sorted keys,
fixed separators, ASCII, shortest round-trip floats, trailing newline -
so identical runs produce byte-identical files.

Tables render as delimiter-separated text with a fixed column order and
%.6g floats; JSON artifacts keep full float precision.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

from . import InputError, __version__
from .ablation import SubsetAnalysis
from .corpus import SampleSet
from .divergence import (
    STATUS_DEFINED,
    AmplificationRatio,
    DivergenceReport,
    FeatureTableRow,
    PairwiseChange,
    divergence_report,
)
from .diversity import DiversityReport
from .features import FEATURE_ORDER, TAXONOMY, TAXONOMY_VERSION, FeatureId, FeatureVector
from .mechsim import SweepPoint
from .stats import TestResult

REPORT_SCHEMA = "stylodiv-report/1"
FEATURES_SCHEMA = "stylodiv-features/1"
DIVERSITY_SCHEMA = "stylodiv-diversity/1"
COMPARE_SCHEMA = "stylodiv-compare/1"
ABLATION_SCHEMA = "stylodiv-ablation/1"
SWEEP_SCHEMA = "stylodiv-sweep/1"


def dump_json(obj: dict, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=True) + "\n",
        encoding="utf-8",
    )


def load_json(path: str | Path, expected_schema: str) -> dict:
    path = Path(path)
    try:
        obj = json.loads(path.read_text("utf-8"))
    except OSError as e:
        raise InputError(f"{path}: cannot read: {e}") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise InputError(f"{path}: not a JSON document: {e}") from None
    got = obj.get("schema") if isinstance(obj, dict) else None
    if got != expected_schema:
        raise InputError(f"{path}: unsupported schema {got!r}, expected {expected_schema!r}")
    return obj


def _meta(seed: int | None = None, digests: dict[str, str | None] | None = None) -> dict:
    meta = {
        "tool_version": __version__,
        "taxonomy_version": TAXONOMY_VERSION,
    }
    if seed is not None:
        meta["seed"] = seed
    if digests:
        meta["input_digests"] = {k: v for k, v in digests.items() if v is not None}
    return meta


# ---------------------------------------------------------------- features


def features_to_dict(
    vec: FeatureVector,
    *,
    label: str,
    digests: dict[str, str | None] | None = None,
    skipped: int = 0,
) -> dict:
    return {
        "schema": FEATURES_SCHEMA,
        **_meta(digests=digests),
        "label": label,
        "doc_count": vec.doc_count,
        "token_count": vec.token_count,
        "skipped": skipped,
        "values": {f.value: vec.values[f] for f in FEATURE_ORDER},
        "counts": {f.value: vec.counts[f] for f in FEATURE_ORDER},
    }


def features_from_dict(obj: dict, source: str = "<features>") -> FeatureVector:
    values = obj.get("values", {})
    counts = obj.get("counts", {})
    for f in FEATURE_ORDER:
        if f.value not in values:
            raise InputError(f"{source}: incomplete feature vector: missing {f.value!r}")
    return FeatureVector(
        values={f: float(values[f.value]) for f in FEATURE_ORDER},
        counts={f: int(counts.get(f.value, 0)) for f in FEATURE_ORDER},
        token_count=int(obj["token_count"]),
        doc_count=int(obj["doc_count"]),
    )


# ------------------------------------------------------------------ report


def report_to_dict(
    rep: DivergenceReport,
    *,
    seed: int | None = None,
    digests: dict[str, str | None] | None = None,
    doc_count: int | None = None,
    token_count: int | None = None,
    feature_pvalues: dict[FeatureId, float] | None = None,
) -> dict:
    features = {}
    for f in FEATURE_ORDER:
        r = rep.ratios[f]
        features[f.value] = {
            "p_m": r.p_m,
            "p_c": r.p_c,
            "status": r.status,
            "ar": r.ar,
            "divergent": (f in rep.divergence_set) if r.status == STATUS_DEFINED else None,
        }
    out = {
        "schema": REPORT_SCHEMA,
        **_meta(seed=seed, digests=digests),
        "label": rep.label,
        "delta": rep.delta,
        "excluded": sorted(f.value for f in rep.excluded),
        "doc_count": doc_count,
        "token_count": token_count,
        "features": features,
        "aggregates": {
            "mean_ar": rep.mean_ar,
            "max_ar": rep.max_ar,
            "max_ar_feature": rep.max_ar_feature.value,
            "distance_from_one": rep.distance_from_one,
            "defined_count": rep.defined_count,
            "divergence_set": sorted(f.value for f in rep.divergence_set),
            "divergence_set_size": len(rep.divergence_set),
            "divergent_fraction": rep.divergent_fraction,
            "majority_divergent": rep.majority_divergent,
            "sig_feature_count": rep.sig_feature_count,
        },
    }
    if feature_pvalues is not None:
        out["feature_p_values"] = {f.value: feature_pvalues[f] for f in FEATURE_ORDER if f in feature_pvalues}
    return out


def report_from_dict(obj: dict, source: str = "<report>") -> DivergenceReport:
    """Rebuild a DivergenceReport from its file form.

    Aggregates are recomputed from the stored ratios and checked against
    the stored values, so a hand-edited file that no longer adds up is
    rejected rather than trusted.
    """
    feats = obj.get("features")
    if not isinstance(feats, dict):
        raise InputError(f"{source}: no features table")
    ratios: dict[FeatureId, AmplificationRatio] = {}
    for f in FEATURE_ORDER:
        entry = feats.get(f.value)
        if entry is None:
            raise InputError(f"{source}: incomplete report: missing feature {f.value!r}")
        ratios[f] = AmplificationRatio(
            feature=f,
            p_m=float(entry["p_m"]),
            p_c=float(entry["p_c"]),
            status=str(entry["status"]),
            ar=None if entry.get("ar") is None else float(entry["ar"]),
        )
    excluded = frozenset(FeatureId(name) for name in obj.get("excluded", []))
    agg = obj.get("aggregates", {})
    rep = divergence_report(
        ratios,
        delta=float(obj.get("delta", 0.1)),
        exclude=excluded,
        label=str(obj.get("label", "")),
        sig_feature_count=agg.get("sig_feature_count"),
    )
    stored_mean = agg.get("mean_ar")
    if stored_mean is not None and abs(stored_mean - rep.mean_ar) > 1e-9:
        raise InputError(
            f"{source}: stored mean_ar {stored_mean} disagrees with recomputed {rep.mean_ar}"
        )
    return rep


# --------------------------------------------------------------- diversity


def diversity_to_dict(
    rep: DiversityReport,
    *,
    digests: dict[str, str | None] | None = None,
) -> dict:
    return {
        "schema": DIVERSITY_SCHEMA,
        **_meta(digests=digests),
        "label": rep.label,
        "doc_count": rep.doc_count,
        "token_count": rep.token_count,
        "self_bleu4": rep.self_bleu4,
        "distinct_2": rep.distinct_2,
        "distinct_3": rep.distinct_3,
        "distinct_4": rep.distinct_4,
        "repetition_rate": rep.repetition_rate,
        "vocab_diversity": rep.vocab_diversity,
        "notes": "repetition_rate and vocab_diversity are tool-defined measurements",
    }


# ------------------------------------------------------------------ tables


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".6g")
    return str(x)


def _render(header: list[str], rows: Iterable[Iterable], sep: str) -> str:
    lines = [sep.join(header)]
    for row in rows:
        lines.append(sep.join(_fmt(c) for c in row))
    return "\n".join(lines) + "\n"


def sep_for(fmt: str) -> str:
    if fmt == "csv":
        return ","
    if fmt == "tsv":
        return "\t"
    raise InputError(f"unknown table format {fmt!r}, expected csv or tsv")


def render_model_table(reports: list[DivergenceReport], sep: str = ",") -> str:
    """One row per model: the cross-model summary view."""
    header = [
        "label", "mean_ar", "distance_from_one", "divergent_fraction",
        "divergence_set_size", "defined_count", "sig_feature_count",
        "max_ar", "max_ar_feature", "majority_divergent",
    ]
    rows = [
        (
            r.label, r.mean_ar, r.distance_from_one, r.divergent_fraction,
            len(r.divergence_set), r.defined_count, r.sig_feature_count,
            r.max_ar, r.max_ar_feature.value, r.majority_divergent,
        )
        for r in reports
    ]
    return _render(header, rows, sep)


def render_feature_table(rows: list[FeatureTableRow], sep: str = ",") -> str:
    """One row per feature: mean and peak AR across models."""
    header = ["feature", "category", "mean_ar", "peak_ar", "peak_model", "defined_in"]
    out = [
        (
            r.feature.value, TAXONOMY[r.feature].category.value,
            r.mean_ar, r.peak_ar, r.peak_label, r.defined_in,
        )
        for r in rows
    ]
    return _render(header, out, sep)


def render_ratio_table(rep: DivergenceReport, sep: str = ",") -> str:
    """Single-report per-feature view, taxonomy order."""
    header = ["feature", "category", "p_m", "p_c", "status", "ar", "divergent"]
    rows = []
    for f in FEATURE_ORDER:
        r = rep.ratios[f]
        if f in rep.excluded:
            continue
        divergent = (f in rep.divergence_set) if r.status == STATUS_DEFINED else None
        rows.append(
            (f.value, TAXONOMY[f].category.value, r.p_m, r.p_c, r.status, r.ar, divergent)
        )
    return _render(header, rows, sep)


def render_heatmap(reports: list[DivergenceReport], sep: str = ",") -> str:
    """Long format (model, feature, log10_ar), one row per model x
    defined feature; AR = 0 keeps its row with an empty log cell."""
    import math

    header = ["model", "feature", "log10_ar"]
    rows = []
    for rep in reports:
        for f in FEATURE_ORDER:
            r = rep.ratios[f]
            if r.status != STATUS_DEFINED or f in rep.excluded:
                continue
            log = math.log10(r.ar) if r.ar > 0 else None
            rows.append((rep.label, f.value, log))
    return _render(header, rows, sep)


def render_diversity_table(reports: list[DiversityReport], sep: str = ",") -> str:
    header = [
        "label", "self_bleu4", "distinct_2", "distinct_3", "distinct_4",
        "repetition_rate", "vocab_diversity", "doc_count", "token_count",
    ]
    rows = [
        (
            r.label, r.self_bleu4, r.distinct_2, r.distinct_3, r.distinct_4,
            r.repetition_rate, r.vocab_diversity, r.doc_count, r.token_count,
        )
        for r in reports
    ]
    return _render(header, rows, sep)


def render_ablation_table(entries: list[tuple[str, int, SubsetAnalysis]], sep: str = ",") -> str:
    """(subset name, subset size, analysis) rows."""
    header = ["subset", "n_features", "n_models", "spearman_rho", "variance_captured_pct", "mae", "degenerate"]
    rows = [
        (name, size, a.n_models, a.spearman_rho, a.variance_captured, a.mae, a.degenerate)
        for name, size, a in entries
    ]
    return _render(header, rows, sep)


def render_compare_summary(
    change: PairwiseChange,
    test: TestResult,
    sep: str = ",",
) -> str:
    header = [
        "base", "tuned", "base_mean_ar", "tuned_mean_ar", "pct_change",
        "p_value", "method", "n_base", "n_tuned", "seed",
    ]
    row = (
        change.base_label, change.tuned_label, change.base_mean_ar,
        change.tuned_mean_ar, change.pct_change, test.p_value, test.method,
        test.n[0], test.n[1], test.seed,
    )
    return _render(header, [row], sep)


def render_compare_features(
    base: DivergenceReport,
    tuned: DivergenceReport,
    pvalues: dict[FeatureId, float],
    threshold: float,
    sep: str = ",",
) -> str:
    """Per-feature before/after: ARs, frequency delta, rank-sum p."""
    header = [
        "feature", "base_ar", "tuned_ar", "ar_pct_change",
        "freq_change_per_1000", "p_value", "significant",
    ]
    rows = []
    for f in FEATURE_ORDER:
        rb, rt = base.ratios[f], tuned.ratios[f]
        pct = None
        if rb.ar is not None and rt.ar is not None and rb.ar > 0:
            pct = (rt.ar - rb.ar) / rb.ar * 100.0
        p = pvalues.get(f)
        rows.append(
            (
                f.value, rb.ar, rt.ar, pct, rt.p_m - rb.p_m, p,
                None if p is None else p < threshold,
            )
        )
    return _render(header, rows, sep)


def render_sweep(axis: str, points: list[SweepPoint], sep: str = ",") -> str:
    header = ["axis", "axis_value", "amplification", "mc_stderr", "analytic", "mean_emissions"]
    rows = [
        (axis, p.axis_value, p.amplification, p.mc_stderr, p.analytic, p.mean_emissions)
        for p in points
    ]
    return _render(header, rows, sep)


def render_analyze_text(rep: DivergenceReport) -> str:
    """Human-oriented stdout view: per-feature table sorted by AR
    descending, then the verdict block."""
    defined = [rep.ratios[f] for f in FEATURE_ORDER if rep.ratios[f].status == STATUS_DEFINED and f not in rep.excluded]
    defined.sort(key=lambda r: -r.ar)
    rest = [rep.ratios[f] for f in FEATURE_ORDER if rep.ratios[f].status != STATUS_DEFINED and f not in rep.excluded]
    lines = [f"{'feature':<18} {'sample':>10} {'baseline':>10} {'AR':>10}  flag"]
    for r in defined:
        flag = "DIVERGENT" if r.feature in rep.divergence_set else ""
        lines.append(f"{r.feature.value:<18} {r.p_m:>10.4f} {r.p_c:>10.4f} {r.ar:>10.4f}  {flag}")
    for r in rest:
        lines.append(f"{r.feature.value:<18} {r.p_m:>10.4f} {r.p_c:>10.4f} {'-':>10}  {r.status}")
    lines.append("")
    lines.append(
        f"mean AR {rep.mean_ar:.4f} | distance from 1 {rep.distance_from_one:.4f} | "
        f"divergent {len(rep.divergence_set)}/{rep.defined_count} "
        f"(fraction {rep.divergent_fraction:.3f}, delta {rep.delta})"
    )
    verdict = "MAJORITY-DIVERGENT" if rep.majority_divergent else "within tolerance for most features"
    lines.append(f"verdict: {verdict}")
    return "\n".join(lines) + "\n"
