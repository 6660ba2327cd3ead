"""Feature-subset ablation: how well do fewer features rank the models?

Given divergence results for a panel of models, a subset of features is
scored with the same aggregation as the full taxonomy (distance of the
subset mean AR from 1), and the subset ranking is compared to the full
ranking via Spearman rho, captured variance (100 * Pearson r^2 of the
paired scores), and mean absolute error of the scores.

Shipped presets: "paper-top10" (the published top-10 ranking this
package's taxonomy follows) and one preset per category. Category
presets follow the taxonomy's own category sizes (discourse has 10
features, tonal 3); summaries published elsewhere have grouped these
differently (8/8), so subset sizes here are authoritative for this tool.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import InputError
from .divergence import STATUS_DEFINED, DivergenceReport, FeatureTableRow
from .features import CATEGORY_FEATURES, FEATURE_INDEX, FEATURE_ORDER, Category, FeatureId

PRESETS: dict[str, frozenset[FeatureId]] = {
    "full": frozenset(FEATURE_ORDER),
    "paper-top10": frozenset(
        {
            FeatureId.MARKDOWN_HEADER,
            FeatureId.IN_CONCLUSION,
            FeatureId.DELVE_INTO,
            FeatureId.BULLET_POINT,
            FeatureId.LANDSCAPE,
            FeatureId.NUMBERED_LIST,
            FeatureId.NAVIGATE,
            FeatureId.ROBUST,
            FeatureId.FUNDAMENTALLY,
            FeatureId.HOWEVER_START,
        }
    ),
    **{cat.value: frozenset(CATEGORY_FEATURES[cat]) for cat in Category},
}


def subset_divergence(
    reports: list[DivergenceReport],
    subset: frozenset[FeatureId] | set[FeatureId],
) -> tuple[dict[str, float], list[str]]:
    """Per-model divergence scores restricted to a feature subset.

    Score = |mean AR over the subset's defined features - 1|. Models
    with no defined AR inside the subset are omitted and listed.
    """
    subset = frozenset(subset)
    if not subset:
        raise InputError("subset_divergence: empty subset")
    unknown = subset - set(FEATURE_ORDER)
    if unknown:
        raise InputError(f"subset_divergence: unknown features {sorted(f for f in unknown)}")
    scores: dict[str, float] = {}
    omitted: list[str] = []
    for rep in reports:
        ars = [
            r.ar
            for f, r in rep.ratios.items()
            if f in subset and f not in rep.excluded and r.status == STATUS_DEFINED
        ]
        if not ars:
            omitted.append(rep.label)
            continue
        scores[rep.label] = abs(math.fsum(ars) / len(ars) - 1.0)
    return scores, omitted


@dataclass(frozen=True, slots=True)
class SubsetAnalysis:
    n_models: int
    spearman_rho: float | None
    variance_captured: float | None  # percent, 100 * r^2
    mae: float
    degenerate: bool


def analyze_subset(full_scores: dict[str, float], subset_scores: dict[str, float]) -> SubsetAnalysis:
    """Agreement between full-taxonomy and subset scores on shared models.

    The identity subset returns (rho=1.0, variance=100.0, mae=0.0).
    Zero-variance score vectors leave the correlations degenerate; the
    MAE is still reported.
    """
    labels = [l for l in full_scores if l in subset_scores]
    if len(labels) < 3:
        raise InputError("analyze_subset: need at least 3 shared models for rank agreement")
    full = [full_scores[l] for l in labels]
    sub = [subset_scores[l] for l in labels]
    mae = math.fsum(abs(f - s) for f, s in zip(full, sub)) / len(labels)
    from .stats import pearson, spearman

    if full == sub:
        # identical score vectors agree perfectly even when degenerate
        return SubsetAnalysis(len(labels), 1.0, 100.0, mae, False)
    rho_res = spearman(full, sub)
    r_res = pearson(full, sub)
    degenerate = rho_res.degenerate or r_res.degenerate
    return SubsetAnalysis(
        n_models=len(labels),
        spearman_rho=rho_res.statistic,
        variance_captured=None if r_res.degenerate else 100.0 * r_res.statistic**2,
        mae=mae,
        degenerate=degenerate,
    )


def top_k_by_divergence(rows: list[FeatureTableRow], k: int) -> list[FeatureId]:
    """The k features with the largest mean |AR - 1| across models.

    Only features with a defined mean are ranked; ties break on the
    taxonomy's stable feature order.
    """
    ranked = [r for r in rows if r.mean_ar is not None]
    if k < 1 or k > len(ranked):
        raise InputError(f"top_k_by_divergence: k={k} outside 1..{len(ranked)}")
    ranked.sort(key=lambda r: (-abs(r.mean_ar - 1.0), FEATURE_INDEX[r.feature]))
    return [r.feature for r in ranked[:k]]
