"""Descriptive and inferential statistics for group comparison tables."""

from __future__ import annotations

import itertools
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass

import numpy as np

from .errors import EmptyGroup, EmptyInput

#: Sample-size bound (|a|+|b|) up to which Mann-Whitney p is computed exactly.
EXACT_LIMIT = 12

#: Cohen's d below this is negligible; Scott-Knott merges such clusters.
NEGLIGIBLE_D = 0.2


@dataclass
class GroupSummary:
    mean: float
    median: float
    trimmed_mean: float
    n: int


def descriptive(values: list[float]) -> GroupSummary:
    """Mean, median, and 10%-trimmed mean of a sample."""
    if len(values) == 0:
        raise EmptyInput("descriptive statistics need at least one value")
    arr = np.sort(np.asarray(values, dtype=np.float64))
    n = len(arr)
    k = int(math.floor(0.1 * n))
    trimmed = arr[k : n - k] if k > 0 else arr
    return GroupSummary(
        mean=float(arr.mean()),
        median=float(np.median(arr)),
        trimmed_mean=float(trimmed.mean()),
        n=n,
    )


def _midranks(pooled: np.ndarray) -> np.ndarray:
    """Ranks 1..N with ties replaced by the mean rank of the tied block."""
    order = np.argsort(pooled, kind="stable")
    ranks = np.empty(len(pooled), dtype=np.float64)
    i = 0
    while i < len(pooled):
        j = i
        while j + 1 < len(pooled) and pooled[order[j + 1]] == pooled[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _u_statistic(a: np.ndarray, b: np.ndarray) -> float:
    pooled = np.concatenate([a, b])
    ranks = _midranks(pooled)
    rank_sum_a = float(ranks[: len(a)].sum())
    return rank_sum_a - len(a) * (len(a) + 1) / 2.0


def _exact_p(a: np.ndarray, b: np.ndarray, u_obs: float) -> float:
    """Two-sided p from the full permutation distribution of U (handles ties)."""
    pooled = np.concatenate([a, b])
    n = len(a)
    ranks = _midranks(pooled)
    total = 0
    count_le = 0
    count_ge = 0
    eps = 1e-9
    for combo in itertools.combinations(range(len(pooled)), n):
        u = ranks[list(combo)].sum() - n * (n + 1) / 2.0
        total += 1
        if u <= u_obs + eps:
            count_le += 1
        if u >= u_obs - eps:
            count_ge += 1
    return min(1.0, 2.0 * min(count_le, count_ge) / total)


def _approx_p(a: np.ndarray, b: np.ndarray, u_obs: float) -> float:
    """Normal approximation with tie-corrected variance and continuity correction."""
    n, m = len(a), len(b)
    big_n = n + m
    pooled = np.concatenate([a, b])
    _, tie_counts = np.unique(pooled, return_counts=True)
    tie_term = float(((tie_counts**3) - tie_counts).sum())
    mu = n * m / 2.0
    var = n * m / 12.0 * ((big_n + 1) - tie_term / (big_n * (big_n - 1)))
    if var <= 0:
        return 1.0
    diff = u_obs - mu
    # Continuity correction shrinks |diff| by 0.5.
    z = (abs(diff) - 0.5) / math.sqrt(var)
    z = max(z, 0.0)
    p = 2.0 * (1.0 - 0.5 * (1.0 + math.erf(z / math.sqrt(2.0))))
    return min(1.0, p)


def mann_whitney(a: list[float], b: list[float]) -> dict[str, float]:
    """Mann-Whitney U with a two-sided p-value.

    Exact permutation p for small samples (|a|+|b| <= EXACT_LIMIT), otherwise the
    tie-corrected normal approximation with continuity correction.
    """
    if len(a) == 0 or len(b) == 0:
        raise EmptyInput("mann_whitney needs non-empty samples")
    arr_a = np.asarray(a, dtype=np.float64)
    arr_b = np.asarray(b, dtype=np.float64)
    u = _u_statistic(arr_a, arr_b)
    if len(a) + len(b) <= EXACT_LIMIT:
        p = _exact_p(arr_a, arr_b, u)
    else:
        p = _approx_p(arr_a, arr_b, u)
    return {"U": u, "p_two_sided": p}


def cliffs_delta(a: list[float], b: list[float]) -> float:
    """Pairwise-dominance effect size in [-1, 1], computed via sorted counts."""
    if len(a) == 0 or len(b) == 0:
        raise EmptyInput("cliffs_delta needs non-empty samples")
    sorted_b = sorted(b)
    greater = 0
    less = 0
    for x in a:
        greater += bisect_left(sorted_b, x)
        less += len(sorted_b) - bisect_right(sorted_b, x)
    return (greater - less) / (len(a) * len(b))


def _cohens_d(left: np.ndarray, right: np.ndarray) -> float:
    n_l, n_r = len(left), len(right)
    mean_gap = abs(float(left.mean()) - float(right.mean()))
    if n_l < 2 and n_r < 2:
        return math.inf if mean_gap > 0 else 0.0
    var_l = float(left.var(ddof=1)) if n_l > 1 else 0.0
    var_r = float(right.var(ddof=1)) if n_r > 1 else 0.0
    pooled = ((n_l - 1) * var_l + (n_r - 1) * var_r) / (n_l + n_r - 2)
    if pooled <= 0:
        return math.inf if mean_gap > 0 else 0.0
    return mean_gap / math.sqrt(pooled)


def scott_knott_esd(groups: dict[str, list[float]]) -> dict[str, int]:
    """Cluster group means into ranks separated by non-negligible effect sizes.

    Rank 1 is the cluster with the largest means.
    """
    if not groups:
        raise EmptyGroup("scott_knott_esd needs at least one group")
    arrays: dict[str, np.ndarray] = {}
    for name, values in groups.items():
        if len(values) == 0:
            raise EmptyGroup(f"group {name!r} is empty")
        arrays[name] = np.asarray(values, dtype=np.float64)

    ordered = sorted(arrays, key=lambda g: (-float(arrays[g].mean()), g))
    clusters = _partition(ordered, arrays)
    ranks: dict[str, int] = {}
    for rank, cluster in enumerate(clusters, start=1):
        for name in cluster:
            ranks[name] = rank
    return ranks


def _partition(ordered: list[str], arrays: dict[str, np.ndarray]) -> list[list[str]]:
    if len(ordered) <= 1:
        return [list(ordered)]
    pooled = np.concatenate([arrays[g] for g in ordered])
    grand_mean = float(pooled.mean())
    sizes = np.array([len(arrays[g]) for g in ordered])
    sums = np.array([float(arrays[g].sum()) for g in ordered])
    best_score = -1.0
    best_idx = 1
    for i in range(1, len(ordered)):
        n_l = int(sizes[:i].sum())
        n_r = int(sizes[i:].sum())
        mu_l = float(sums[:i].sum()) / n_l
        mu_r = float(sums[i:].sum()) / n_r
        score = n_l * (mu_l - grand_mean) ** 2 + n_r * (mu_r - grand_mean) ** 2
        if score > best_score:
            best_score = score
            best_idx = i
    left_names = ordered[:best_idx]
    right_names = ordered[best_idx:]
    left = np.concatenate([arrays[g] for g in left_names])
    right = np.concatenate([arrays[g] for g in right_names])
    if _cohens_d(left, right) >= NEGLIGIBLE_D:
        return _partition(left_names, arrays) + _partition(right_names, arrays)
    return [list(ordered)]
