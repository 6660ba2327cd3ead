"""Amplification ratios against a baseline and the divergence verdict.

For feature f with sample frequency p_m and baseline frequency p_c (both
per 1,000 tokens), the amplification ratio is AR = p_m / p_c, defined
only when p_c > 0. Zero-baseline features are never folded into a
pseudo-ratio: they carry an explicit status instead
(unsupported_baseline_zero when the sample still uses the feature,
both_zero when neither side does).

A feature diverges at tolerance delta when its AR falls outside the
closed interval [1 - delta, 1 + delta]; boundary values do not diverge.
A collection is flagged as majority-divergent when more than half of
the defined ARs diverge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import InputError
from .corpus import BaselineStats
from .features import FEATURE_ORDER, FeatureId, FeatureVector

DEFAULT_DELTA = 0.1

STATUS_DEFINED = "defined"
STATUS_UNSUPPORTED = "unsupported_baseline_zero"
STATUS_BOTH_ZERO = "both_zero"


@dataclass(frozen=True, slots=True)
class AmplificationRatio:
    feature: FeatureId
    p_m: float  # sample frequency, per 1,000 tokens
    p_c: float  # baseline frequency, per 1,000 tokens
    status: str
    ar: float | None  # present iff status == "defined"


def amplification_ratio(feature: FeatureId, p_m: float, p_c: float) -> AmplificationRatio:
    if p_m < 0 or p_c < 0:
        raise InputError(f"{feature.value}: negative frequency")
    if p_c > 0:
        return AmplificationRatio(feature, p_m, p_c, STATUS_DEFINED, p_m / p_c)
    status = STATUS_BOTH_ZERO if p_m == 0 else STATUS_UNSUPPORTED
    return AmplificationRatio(feature, p_m, p_c, status, None)


def amplification(
    sample: FeatureVector,
    baseline: BaselineStats,
    *,
    use_pooled: bool = True,
) -> dict[FeatureId, AmplificationRatio]:
    """ARs for all 24 features of a pooled sample vector against a baseline.

    The baseline side defaults to the token-weighted pooled frequency;
    use_pooled=False switches to the unweighted per-document mean.
    """
    out: dict[FeatureId, AmplificationRatio] = {}
    for f in FEATURE_ORDER:
        fs = baseline.features[f]
        p_c = fs.mu_pooled if use_pooled else fs.mu
        out[f] = amplification_ratio(f, sample.values[f], p_c)
    return out


@dataclass(frozen=True, slots=True)
class DivergenceReport:
    label: str
    delta: float
    ratios: dict[FeatureId, AmplificationRatio]
    excluded: frozenset[FeatureId]
    divergence_set: frozenset[FeatureId]
    defined_count: int
    divergent_fraction: float
    mean_ar: float
    max_ar: float
    max_ar_feature: FeatureId
    distance_from_one: float
    majority_divergent: bool
    sig_feature_count: int | None = None


def divergence_report(
    ratios: dict[FeatureId, AmplificationRatio],
    *,
    delta: float = DEFAULT_DELTA,
    exclude: frozenset[FeatureId] | set[FeatureId] = frozenset(),
    label: str = "",
    sig_feature_count: int | None = None,
) -> DivergenceReport:
    """Aggregate a ratio map into the divergence verdict.

    Excluded features take no part in any aggregate. All aggregates run
    over defined ARs only; having none is fatal (nothing to compare).
    """
    if not 0 < delta < 1:
        raise InputError(f"delta must be in (0, 1), got {delta}")
    exclude = frozenset(exclude)
    lo, hi = 1.0 - delta, 1.0 + delta
    defined: list[AmplificationRatio] = [
        r
        for f, r in ratios.items()
        if f not in exclude and r.status == STATUS_DEFINED
    ]
    if not defined:
        raise InputError("no defined amplification ratios: baseline supports none of the compared features")
    divergent = frozenset(r.feature for r in defined if r.ar < lo or r.ar > hi)
    mean_ar = math.fsum(r.ar for r in defined) / len(defined)
    max_r = defined[0]
    for r in defined[1:]:
        if r.ar > max_r.ar:
            max_r = r
    fraction = len(divergent) / len(defined)
    return DivergenceReport(
        label=label,
        delta=delta,
        ratios=dict(ratios),
        excluded=exclude,
        divergence_set=divergent,
        defined_count=len(defined),
        divergent_fraction=fraction,
        mean_ar=mean_ar,
        max_ar=max_r.ar,
        max_ar_feature=max_r.feature,
        distance_from_one=abs(mean_ar - 1.0),
        majority_divergent=fraction > 0.5,
        sig_feature_count=sig_feature_count,
    )


def analyze(
    sample: FeatureVector,
    baseline: BaselineStats,
    *,
    delta: float = DEFAULT_DELTA,
    exclude: frozenset[FeatureId] | set[FeatureId] = frozenset(),
    label: str = "",
    sig_feature_count: int | None = None,
) -> DivergenceReport:
    return divergence_report(
        amplification(sample, baseline),
        delta=delta,
        exclude=exclude,
        label=label,
        sig_feature_count=sig_feature_count,
    )


def per_document_distances(
    vectors: list[FeatureVector],
    baseline: BaselineStats,
    *,
    exclude: frozenset[FeatureId] | set[FeatureId] = frozenset(),
) -> list[float]:
    """Each document's own distance-from-one against the baseline.

    This is the per-output score used when two models are compared with
    a resampling test: n = document count per side.
    """
    exclude = frozenset(exclude)
    scores: list[float] = []
    for v in vectors:
        ars = []
        for f in FEATURE_ORDER:
            if f in exclude:
                continue
            p_c = baseline.features[f].mu_pooled
            if p_c > 0:
                ars.append(v.values[f] / p_c)
        if not ars:
            raise InputError("no defined amplification ratios for a document")
        scores.append(abs(math.fsum(ars) / len(ars) - 1.0))
    return scores


def significant_features(
    sample_vectors: list[FeatureVector],
    baseline_vectors: list[FeatureVector],
    *,
    alpha: float = 0.05,
) -> tuple[list[FeatureId], dict[FeatureId, float]]:
    """Features whose per-document frequency distribution shifts from the
    baseline's, rank-sum tested at the Bonferroni-corrected threshold
    alpha / 24. Needs per-document vectors on both sides, which baseline
    files do not carry; callers must supply the reference documents."""
    from .stats import bonferroni, mann_whitney

    threshold = bonferroni(alpha, len(FEATURE_ORDER))
    hits: list[FeatureId] = []
    pvals: dict[FeatureId, float] = {}
    for f in FEATURE_ORDER:
        a = [v.values[f] for v in sample_vectors]
        b = [v.values[f] for v in baseline_vectors]
        res = mann_whitney(a, b)
        pvals[f] = res.p_value
        if not res.degenerate and res.p_value < threshold:
            hits.append(f)
    return hits, pvals


@dataclass(frozen=True, slots=True)
class FeatureTableRow:
    feature: FeatureId
    mean_ar: float | None  # None when no model defines this feature
    peak_ar: float | None
    peak_label: str | None
    defined_in: int


def feature_table(reports: list[DivergenceReport]) -> list[FeatureTableRow]:
    """Cross-model per-feature view: mean and peak AR over the models
    where the feature is defined; rows with no support are marked."""
    if not reports:
        raise InputError("feature_table: no reports")
    rows: list[FeatureTableRow] = []
    for f in FEATURE_ORDER:
        ars: list[tuple[float, str]] = []
        for rep in reports:
            r = rep.ratios.get(f)
            if r is not None and r.status == STATUS_DEFINED and f not in rep.excluded:
                ars.append((r.ar, rep.label))
        if not ars:
            rows.append(FeatureTableRow(f, None, None, None, 0))
            continue
        mean = math.fsum(a for a, _ in ars) / len(ars)
        peak_ar, peak_label = ars[0]
        for a, lbl in ars[1:]:
            if a > peak_ar:
                peak_ar, peak_label = a, lbl
        rows.append(FeatureTableRow(f, mean, peak_ar, peak_label, len(ars)))
    return rows


@dataclass(frozen=True, slots=True)
class PairwiseChange:
    base_label: str
    tuned_label: str
    base_mean_ar: float
    tuned_mean_ar: float
    pct_change: float | None  # None if the base mean is 0


def pairwise_change(base: DivergenceReport, tuned: DivergenceReport) -> PairwiseChange:
    """Percent change of mean AR from a base model to a tuned variant."""
    pct = None
    if base.mean_ar != 0:
        pct = (tuned.mean_ar - base.mean_ar) / base.mean_ar * 100.0
    return PairwiseChange(
        base_label=base.label,
        tuned_label=tuned.label,
        base_mean_ar=base.mean_ar,
        tuned_mean_ar=tuned.mean_ar,
        pct_change=pct,
    )
