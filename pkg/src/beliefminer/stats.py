"""Nonparametric statistics engine.

Spearman rank correlation with exact or t-approximated p-values,
Vargha-Delaney A12 effect size, a bootstrap difference-of-means test, and
Scott-Knott ranking built on the latter two. Everything is deterministic
given an explicit seed.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import statistics
import struct
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from math import fsum

import numpy as np
from scipy.stats import t as _student_t

EXACT_P_MAX_N = 8  # 8! = 40320 permutations, still enumerable
DEFAULT_BOOTSTRAP_ITERATIONS = 512
DEFAULT_A12_THRESHOLD = 0.56  # Vargha-Delaney "small" boundary
BOOTSTRAP_ALPHA = 0.05

_PERM_EPS = 1e-12  # guard band so float noise cannot drop tied permutations


@dataclass(frozen=True)
class SupportScore:
    """One Spearman correlation outcome."""

    rho: float
    p_value: float
    n: int
    belief_id: str | None = None
    release_ordinal: int | None = None

    def __post_init__(self) -> None:
        if not -1.0 <= self.rho <= 1.0:
            raise ValueError(f"rho out of range: {self.rho}")
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p_value out of range: {self.p_value}")
        if self.n < 2:
            raise ValueError("n must be >= 2")


@dataclass(frozen=True)
class Treatment:
    """A labeled sample entering Scott-Knott ranking."""

    label: str
    measurements: tuple[float, ...]

    def __init__(self, label: str, measurements) -> None:
        object.__setattr__(self, "label", label)
        object.__setattr__(self, "measurements", tuple(float(v) for v in measurements))
        if not self.measurements:
            raise ValueError(f"treatment {label!r} has no measurements")


@dataclass(frozen=True)
class GroupEntry:
    label: str
    median: float
    iqr: float


@dataclass(frozen=True)
class RankedGroup:
    """One Scott-Knott rank; rank 1 holds the lowest medians."""

    rank: int
    treatments: tuple[GroupEntry, ...]


def rank_with_ties(values: list[float]) -> list[float]:
    """1-based average ranks; tied values share the mean of their positions."""
    if not values:
        raise ValueError("cannot rank an empty list")
    n = len(values)
    order = sorted(range(n), key=values.__getitem__)
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and values[order[j + 1]] == values[order[i]]:
            j += 1
        average = (i + j + 2) / 2  # mean of 1-based positions i..j
        for k in range(i, j + 1):
            ranks[order[k]] = average
        i = j + 1
    return ranks


def _pearson(a: list[float], b: list[float]) -> float:
    n = len(a)
    mean_a = fsum(a) / n
    mean_b = fsum(b) / n
    da = [v - mean_a for v in a]
    db = [v - mean_b for v in b]
    num = fsum(x * y for x, y in zip(da, db))
    den = math.sqrt(fsum(x * x for x in da) * fsum(y * y for y in db))
    if den == 0.0:
        return 0.0
    return max(-1.0, min(1.0, num / den))


def _permutation_p(rank_x: list[float], rank_y: list[float], rho: float) -> float:
    """Two-sided exact p: share of y-rank permutations whose |rho| reaches
    the observed one (within a guard band well below rank-rho resolution)."""
    n = len(rank_x)
    mean_x = fsum(rank_x) / n
    mean_y = fsum(rank_y) / n
    dx = [v - mean_x for v in rank_x]
    dy = [v - mean_y for v in rank_y]
    den = math.sqrt(fsum(v * v for v in dx) * fsum(v * v for v in dy))
    threshold = abs(rho) - _PERM_EPS
    hits = 0
    total = 0
    for perm in itertools.permutations(dy):
        total += 1
        num = sum(a * b for a, b in zip(dx, perm))
        if abs(num / den) >= threshold:
            hits += 1
    return hits / total


def _t_approximation_p(rho: float, n: int) -> float:
    denominator = 1.0 - rho * rho
    if denominator <= 0.0:
        return 0.0
    t_stat = abs(rho) * math.sqrt((n - 2) / denominator)
    return float(2.0 * _student_t.sf(t_stat, n - 2))


def spearman(
    x: list[float],
    y: list[float],
    exact_p: bool = True,
    belief_id: str | None = None,
    release_ordinal: int | None = None,
) -> SupportScore:
    """Spearman correlation: Pearson over average ranks.

    A constant x or y vector yields rho = 0 and p = 1 by convention. The
    p-value is an exact permutation enumeration when exact_p and n <= 8,
    otherwise the two-sided Student-t approximation.
    """
    n = len(x)
    if n != len(y):
        raise ValueError("x and y must have equal length")
    if n < 2:
        raise ValueError("need at least 2 observations")
    if min(x) == max(x) or min(y) == max(y):
        return SupportScore(0.0, 1.0, n, belief_id, release_ordinal)
    rank_x = rank_with_ties(list(x))
    rank_y = rank_with_ties(list(y))
    rho = _pearson(rank_x, rank_y)
    if exact_p and n <= EXACT_P_MAX_N:
        p_value = _permutation_p(rank_x, rank_y, rho)
    else:
        p_value = _t_approximation_p(rho, n)
    return SupportScore(rho, p_value, n, belief_id, release_ordinal)


def a12(m: list[float], n: list[float]) -> float:
    """Vargha-Delaney A12: chance a random m value beats a random n value,
    ties counted half. Counts are exact integers, so a12(m,n) + a12(n,m)
    is exactly 1."""
    if not m or not n:
        raise ValueError("a12 requires two nonempty samples")
    sorted_n = sorted(n)
    greater = 0
    equal = 0
    for value in m:
        lo = bisect_left(sorted_n, value)
        hi = bisect_right(sorted_n, value)
        greater += lo
        equal += hi - lo
    return (greater + 0.5 * equal) / (len(m) * len(n))


def bootstrap_different(
    m: list[float],
    n: list[float],
    iterations: int = DEFAULT_BOOTSTRAP_ITERATIONS,
    seed: int = 0,
) -> bool:
    """Bootstrap difference-of-means test at significance 0.05.

    Both samples are redrawn from the pooled values (the null of a shared
    distribution); returns True when fewer than 5% of replicates reach the
    observed absolute mean difference.
    """
    if iterations < 100:
        raise ValueError("iterations must be >= 100")
    if not m or not n:
        raise ValueError("bootstrap requires two nonempty samples")
    m_arr = np.asarray(m, dtype=float)
    n_arr = np.asarray(n, dtype=float)
    observed = abs(float(m_arr.mean()) - float(n_arr.mean()))
    pooled = np.concatenate([m_arr, n_arr])
    rng = np.random.default_rng(seed)
    idx_m = rng.integers(0, pooled.size, size=(iterations, m_arr.size))
    idx_n = rng.integers(0, pooled.size, size=(iterations, n_arr.size))
    diffs = np.abs(pooled[idx_m].mean(axis=1) - pooled[idx_n].mean(axis=1))
    reached = int(np.count_nonzero(diffs >= observed))
    return reached / iterations < BOOTSTRAP_ALPHA


def derive_split_seed(seed: int, lower: list[float], upper: list[float]) -> int:
    """Stable per-split bootstrap seed from the global seed and the split's
    actual values, so identical splits reuse identical randomness no matter
    how the recursion reached them."""
    digest = hashlib.blake2b(digest_size=8)
    digest.update(int(seed).to_bytes(8, "little", signed=True))
    digest.update(struct.pack("<I", len(lower)))
    digest.update(struct.pack(f"<{len(lower)}d", *lower))
    digest.update(struct.pack(f"<{len(upper)}d", *upper))
    return int.from_bytes(digest.digest(), "little")


def split_is_distinct(
    lower: list[float],
    upper: list[float],
    seed: int,
    iterations: int = DEFAULT_BOOTSTRAP_ITERATIONS,
    a12_threshold: float = DEFAULT_A12_THRESHOLD,
) -> bool:
    """Scott-Knott keep-rule: the split stands only if the bootstrap calls
    the sides different AND the upper side wins with at least a small A12
    effect."""
    sub_seed = derive_split_seed(seed, lower, upper)
    if not bootstrap_different(lower, upper, iterations, sub_seed):
        return False
    return a12(upper, lower) >= a12_threshold


def quartiles(values: list[float]) -> tuple[float, float, float]:
    """(Q1, median, Q3) with inclusive linear interpolation."""
    if not values:
        raise ValueError("quartiles of an empty list")
    if len(values) == 1:
        v = float(values[0])
        return v, v, v
    q1, q2, q3 = statistics.quantiles(values, n=4, method="inclusive")
    return q1, q2, q3


def _best_split_index(chunk: list[Treatment]) -> int:
    """Boundary index (into chunk) maximizing the between-side mean shift
    E = (ms/ls)(mu_m - mu)^2 + (ns/ls)(mu_n - mu)^2 over pooled values."""
    pooled_total = fsum(v for t in chunk for v in t.measurements)
    pooled_count = sum(len(t.measurements) for t in chunk)
    grand_mean = pooled_total / pooled_count
    best_index = 1
    best_e = -math.inf
    left_sum = 0.0
    left_count = 0
    for index in range(1, len(chunk)):
        left_sum += fsum(chunk[index - 1].measurements)
        left_count += len(chunk[index - 1].measurements)
        right_sum = pooled_total - left_sum
        right_count = pooled_count - left_count
        mean_left = left_sum / left_count
        mean_right = right_sum / right_count
        e = (left_count / pooled_count) * (mean_left - grand_mean) ** 2 + (
            right_count / pooled_count
        ) * (mean_right - grand_mean) ** 2
        if e > best_e:
            best_e = e
            best_index = index
    return best_index


def scott_knott(
    treatments: list[Treatment],
    seed: int = 0,
    iterations: int = DEFAULT_BOOTSTRAP_ITERATIONS,
    a12_threshold: float = DEFAULT_A12_THRESHOLD,
) -> list[RankedGroup]:
    """Rank treatments into statistically distinct groups.

    Treatments are sorted by median (label breaks ties), then recursively
    split at the boundary maximizing the expected mean shift; each split
    survives only if split_is_distinct accepts it. Rank 1 is the lowest
    median group.
    """
    if not treatments:
        raise ValueError("scott_knott requires at least one treatment")
    ordered = sorted(
        treatments, key=lambda t: (statistics.median(t.measurements), t.label)
    )
    groups: list[list[Treatment]] = []

    def partition(chunk: list[Treatment]) -> None:
        if len(chunk) < 2:
            groups.append(chunk)
            return
        split_at = _best_split_index(chunk)
        lower = [v for t in chunk[:split_at] for v in t.measurements]
        upper = [v for t in chunk[split_at:] for v in t.measurements]
        if split_is_distinct(lower, upper, seed, iterations, a12_threshold):
            partition(chunk[:split_at])
            partition(chunk[split_at:])
        else:
            groups.append(chunk)

    partition(ordered)
    ranked: list[RankedGroup] = []
    for position, group in enumerate(groups, start=1):
        entries = []
        for treatment in group:
            values = list(treatment.measurements)
            q1, q2, q3 = quartiles(values)
            entries.append(GroupEntry(treatment.label, q2, q3 - q1))
        ranked.append(RankedGroup(rank=position, treatments=tuple(entries)))
    return ranked
