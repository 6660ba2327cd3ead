"""Nonparametric statistics: permutation test, rank correlations, Bonferroni.

Everything here is seed-deterministic and implemented directly (ranking,
permutation resampling, correlation algebra) so the test suite can check
it against an independent reference implementation; only scalar special
functions (the t CDF, erfc) come from scipy/math.

Conventions:
* all p-values are two-sided
* permutation p uses the add-one estimator
  p = (1 + #{|d_perm| >= |d_obs|}) / (1 + resamples)
* Spearman uses average ranks for ties; exact permutation null for
  n <= 10, t approximation above that
* degenerate inputs (zero variance, all-equal pools) are reported as
  degenerate rather than silently producing a number
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import stdtr  # t distribution CDF

from . import InputError

# Comparison slack for counting |d_perm| >= |d_obs| in resampling nulls;
# guards against float jitter flipping exact-tie comparisons.
_TIE_EPS = 1e-12

_PERM_BLOCK = 1024  # fixed block size so results never depend on scheduling


@dataclass(frozen=True, slots=True)
class TestResult:
    statistic: float | None
    p_value: float | None
    method: str  # permutation | mann_whitney | spearman_exact | spearman_t_approx | pearson
    n: tuple[int, ...]
    seed: int | None = None
    degenerate: bool = False


def bonferroni(alpha: float, m: int) -> float:
    """Corrected per-test threshold alpha / m."""
    if not 0 < alpha < 1:
        raise InputError(f"alpha must be in (0, 1), got {alpha}")
    if m < 1:
        raise InputError(f"number of tests must be >= 1, got {m}")
    return alpha / m


def rankdata(xs) -> np.ndarray:
    """Average ranks, 1-based; ties share the mean of their rank block."""
    xs = np.asarray(xs, dtype=float)
    order = np.argsort(xs, kind="stable")
    ranks = np.empty(len(xs), dtype=float)
    i = 0
    while i < len(xs):
        j = i
        while j + 1 < len(xs) and xs[order[j + 1]] == xs[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _corr(x: np.ndarray, y: np.ndarray) -> float | None:
    """Plain product-moment r; None when either side has zero variance."""
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        return None
    # sqrt of the product rather than product of sqrts: with a correctly
    # rounded sqrt, identical inputs then give exactly 1.0 (the three dot
    # products coincide and sqrt(s * s) == s). Fall back if the product
    # overflows, and clamp the 1-ulp excursions either form can produce.
    prod = sxx * syy
    denom = math.sqrt(prod) if math.isfinite(prod) else math.sqrt(sxx) * math.sqrt(syy)
    return max(-1.0, min(1.0, float(dx @ dy) / denom))


def _t_two_sided_p(r: float, n: int) -> float:
    df = n - 2
    denom = 1.0 - r * r
    if denom <= 0.0:
        return 0.0
    t = abs(r) * math.sqrt(df / denom)
    return float(2.0 * stdtr(df, -t))


def pearson(x, y) -> TestResult:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y):
        raise InputError("pearson: length mismatch")
    if len(x) < 3:
        raise InputError("pearson: need at least 3 points")
    r = _corr(x, y)
    if r is None:
        return TestResult(None, None, "pearson", (len(x),), degenerate=True)
    return TestResult(r, _t_two_sided_p(r, len(x)), "pearson", (len(x),))


def _exact_spearman_p(rx: np.ndarray, ry: np.ndarray, rho_obs: float) -> float:
    """Two-sided exact permutation p over all n! orderings of one side."""
    import itertools

    n = len(rx)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    denom = math.sqrt(float(dx @ dx)) * math.sqrt(float(dy @ dy))
    target = abs(rho_obs) - _TIE_EPS
    hits = 0
    total = 0
    chunk: list[tuple[int, ...]] = []
    for perm in itertools.permutations(range(n)):
        chunk.append(perm)
        if len(chunk) == 200_000:
            rhos = (dy[np.array(chunk)] @ dx) / denom
            hits += int(np.count_nonzero(np.abs(rhos) >= target))
            total += len(chunk)
            chunk = []
    if chunk:
        rhos = (dy[np.array(chunk)] @ dx) / denom
        hits += int(np.count_nonzero(np.abs(rhos) >= target))
        total += len(chunk)
    return hits / total


def spearman(x, y) -> TestResult:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y):
        raise InputError("spearman: length mismatch")
    if len(x) < 3:
        raise InputError("spearman: need at least 3 points")
    rx = rankdata(x)
    ry = rankdata(y)
    rho = _corr(rx, ry)
    n = len(x)
    if rho is None:
        method = "spearman_exact" if n <= 10 else "spearman_t_approx"
        return TestResult(None, None, method, (n,), degenerate=True)
    if n <= 10:
        return TestResult(rho, _exact_spearman_p(rx, ry, rho), "spearman_exact", (n,))
    return TestResult(rho, _t_two_sided_p(rho, n), "spearman_t_approx", (n,))


def permutation_test(a, b, resamples: int = 10_000, seed: int = 42) -> TestResult:
    """Two-sided label-permutation test on the difference of means."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise InputError("permutation_test: need at least 2 values per side")
    if resamples < 1000:
        raise InputError(f"permutation_test: resamples must be >= 1000, got {resamples}")
    pooled = np.concatenate([a, b])
    obs = float(a.mean() - b.mean())
    if np.all(pooled == pooled[0]):
        return TestResult(obs, 1.0, "permutation", (len(a), len(b)), seed=seed, degenerate=True)
    rng = np.random.Generator(np.random.PCG64(seed))
    na, n = len(a), len(pooled)
    target = abs(obs) - _TIE_EPS
    hits = 0
    done = 0
    # Fixed-size blocks: the draw sequence depends only on (seed, resamples),
    # never on how work is scheduled.
    while done < resamples:
        block = min(_PERM_BLOCK, resamples - done)
        idx = np.argsort(rng.random((block, n)), axis=1)
        perm = pooled[idx]
        deltas = perm[:, :na].mean(axis=1) - perm[:, na:].mean(axis=1)
        hits += int(np.count_nonzero(np.abs(deltas) >= target))
        done += block
    p = (1 + hits) / (1 + resamples)
    return TestResult(obs, p, "permutation", (len(a), len(b)), seed=seed)


def mann_whitney(a, b) -> TestResult:
    """Rank-sum test, normal approximation with tie correction and
    continuity correction; distribution-shift companion to the
    permutation test on means."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise InputError("mann_whitney: need at least 2 values per side")
    na, nb = len(a), len(b)
    pooled = np.concatenate([a, b])
    if np.all(pooled == pooled[0]):
        return TestResult(float(na * nb / 2.0), 1.0, "mann_whitney", (na, nb), degenerate=True)
    ranks = rankdata(pooled)
    u = float(ranks[:na].sum()) - na * (na + 1) / 2.0
    mean_u = na * nb / 2.0
    # tie correction on the variance
    _, tie_counts = np.unique(pooled, return_counts=True)
    tie_term = float(((tie_counts**3 - tie_counts)).sum())
    n = na + nb
    var_u = na * nb / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if var_u <= 0.0:
        return TestResult(u, 1.0, "mann_whitney", (na, nb), degenerate=True)
    z = (abs(u - mean_u) - 0.5) / math.sqrt(var_u)
    z = max(z, 0.0)
    p = float(math.erfc(z / math.sqrt(2.0)))
    return TestResult(u, min(p, 1.0), "mann_whitney", (na, nb))
