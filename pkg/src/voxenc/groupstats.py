"""Second-level statistics across subjects: Wilcoxon signed-rank per target,
Benjamini-Hochberg FDR across targets, and ROI aggregation.

The signed-rank test is exact (full null distribution of W+ built by dynamic
programming over rank subsets) up to EXACT_LIMIT subjects, and switches to a
normal approximation with tie and continuity corrections above that. Ranks
are doubled internally so midranks from ties stay integral.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import norm, rankdata

EXACT_LIMIT = 25


@dataclass
class StatMap:
    statistic: np.ndarray
    p_raw: np.ndarray
    significant: np.ndarray
    q: float
    undefined: np.ndarray


class DegenerateSample(ValueError):
    """All differences are zero; the test statistic is undefined."""


def _null_counts(doubled_ranks: tuple[int, ...]) -> np.ndarray:
    """Count sign assignments per doubled W+ value; counts[w] over w=0..sum."""
    total = sum(doubled_ranks)
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    acc = 0
    for r in doubled_ranks:
        counts[r : acc + r + 1] += counts[0 : acc + 1].copy()  # copy: ranges overlap
        acc += r
    return counts


@lru_cache(maxsize=64)
def _null_counts_tiefree(n: int) -> np.ndarray:
    return _null_counts(tuple(2 * k for k in range(1, n + 1)))


def wilcoxon_signed_rank(
    diffs: np.ndarray, alternative: str = "greater"
) -> tuple[float, float]:
    """Signed-rank test on per-subject differences.

    Zero differences are dropped first. Returns (W+, p). ``alternative`` is
    "greater" (positive shift) or "two_sided".
    """
    if alternative not in ("greater", "two_sided"):
        raise ValueError(f"unknown alternative {alternative!r}")
    d = np.asarray(diffs, dtype=np.float64)
    d = d[d != 0]
    n = d.size
    if n == 0:
        raise DegenerateSample("all differences are zero")
    if n < 5:
        raise ValueError(f"need >= 5 nonzero differences, got {n}")
    ranks = rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())

    if n <= EXACT_LIMIT:
        doubled = np.rint(2 * ranks).astype(int)
        if np.unique(doubled).size == n:  # no ties: cacheable 1..n distribution
            counts = _null_counts_tiefree(n)
        else:
            counts = _null_counts(tuple(sorted(doubled)))
        total = counts.sum()
        w2 = int(round(2 * w_plus))
        p_ge = counts[w2:].sum() / total
        if alternative == "greater":
            p = p_ge
        else:
            p_le = counts[: w2 + 1].sum() / total
            p = min(1.0, 2.0 * min(p_ge, p_le))
        return w_plus, float(p)

    # normal approximation with tie and continuity corrections
    mean = n * (n + 1) / 4.0
    tie_counts = np.unique(ranks, return_counts=True)[1]
    var = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(tie_counts**3 - tie_counts) / 48.0
    sd = np.sqrt(var)
    if alternative == "greater":
        z = (w_plus - mean - 0.5) / sd
        p = float(norm.sf(z))
    else:
        z = (w_plus - mean - np.sign(w_plus - mean) * 0.5) / sd
        p = float(min(1.0, 2.0 * norm.sf(abs(z))))
    return w_plus, p


def fdr_bh(p_values: np.ndarray, q: float = 0.05) -> np.ndarray:
    """Benjamini-Hochberg step-up: reject the k smallest p with p_(k) <= k q/m."""
    p = np.asarray(p_values, dtype=np.float64)
    m = p.size
    order = np.argsort(p, kind="stable")
    thresh = q * np.arange(1, m + 1) / m
    passing = np.flatnonzero(p[order] <= thresh)
    mask = np.zeros(m, dtype=bool)
    if passing.size:
        mask[order[: passing[-1] + 1]] = True
    return mask


def group_test(
    values: np.ndarray, alternative: str = "greater", q: float = 0.05
) -> StatMap:
    """Per-target Wilcoxon across subjects followed by BH correction.

    ``values`` is subjects x targets (scores or delta-R). Targets whose
    differences are all zero are flagged undefined and excluded from FDR.
    """
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    n_subjects, n_targets = values.shape
    if n_subjects < 5:
        raise ValueError(f"need >= 5 subjects, got {n_subjects}")
    stat = np.full(n_targets, np.nan)
    p_raw = np.full(n_targets, np.nan)
    undefined = np.zeros(n_targets, dtype=bool)
    for j in range(n_targets):
        try:
            stat[j], p_raw[j] = wilcoxon_signed_rank(values[:, j], alternative)
        except DegenerateSample:
            undefined[j] = True
    significant = np.zeros(n_targets, dtype=bool)
    live = ~undefined
    if live.any():
        significant[live] = fdr_bh(p_raw[live], q)
    return StatMap(statistic=stat, p_raw=p_raw, significant=significant, q=q, undefined=undefined)


def roi_mean(values: np.ndarray, roi: list[int]) -> float:
    """Arithmetic mean of per-target values over the ROI's indices."""
    if len(roi) == 0:
        raise ValueError("empty ROI")
    values = np.asarray(values, dtype=np.float64)
    idx = np.asarray(roi, dtype=np.intp)
    if idx.min() < 0 or idx.max() >= values.shape[-1]:
        raise ValueError(f"ROI index outside [0, {values.shape[-1]})")
    return float(values[..., idx].mean())
