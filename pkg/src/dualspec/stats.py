"""Nonparametric comparison statistics for paired inspection costs."""

from __future__ import annotations

import bisect
import math
import statistics
from dataclasses import dataclass
from typing import Optional, Sequence

LESS = "less"
GREATER = "greater"
TWO_SIDED = "two-sided"

EXACT_MAX_N = 20


@dataclass(frozen=True)
class WilcoxonResult:
    p_value: float
    statistic: float  # sum of ranks of positive differences
    n: int  # non-zero differences
    method: str  # "exact", "normal" or "degenerate"

    @property
    def degenerate(self) -> bool:
        return self.method == "degenerate"


def midranks(values: Sequence[float]) -> list[float]:
    """1-based ranks with ties sharing their average rank."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def _exact_distribution(doubled_ranks: Sequence[int]) -> list[int]:
    """Number of sign assignments giving each value of 2*W+."""
    counts = [1]
    for r in doubled_ranks:
        nxt = counts + [0] * r
        for w, c in enumerate(counts):
            nxt[w + r] += c
        counts = nxt
    return counts


def wilcoxon_signed_rank(x: Sequence[float], y: Sequence[float], alternative: str = LESS) -> WilcoxonResult:
    """Paired Wilcoxon signed-rank test of ``x - y``.

    ``alternative="less"`` tests whether x tends to be smaller than y.  Zero
    differences are dropped.  Up to 20 non-zero differences the p-value comes
    from the exact permutation distribution of the (mid)ranks; beyond that a
    normal approximation with tie and continuity corrections is used.
    """
    if len(x) != len(y):
        raise ValueError(f"paired samples differ in length: {len(x)} vs {len(y)}")
    if not x:
        raise ValueError("samples must not be empty")
    if alternative not in (LESS, GREATER, TWO_SIDED):
        raise ValueError(f"unknown alternative {alternative!r}")
    diffs = [a - b for a, b in zip(x, y) if a != b]
    n = len(diffs)
    if n == 0:
        return WilcoxonResult(1.0, 0.0, 0, "degenerate")
    ranks = midranks([abs(d) for d in diffs])
    w_plus = sum((r for r, d in zip(ranks, diffs) if d > 0), 0.0)

    if n <= EXACT_MAX_N:
        doubled = [round(2 * r) for r in ranks]
        dist = _exact_distribution(doubled)
        total = 2 ** n
        w2 = round(2 * w_plus)
        p_le = sum(dist[: w2 + 1]) / total
        p_ge = sum(dist[w2:]) / total
        method = "exact"
    else:
        mean = n * (n + 1) / 4
        ties = {}
        for r in ranks:
            ties[r] = ties.get(r, 0) + 1
        var = n * (n + 1) * (2 * n + 1) / 24 - sum(t ** 3 - t for t in ties.values()) / 48
        sd = math.sqrt(var)
        norm = statistics.NormalDist()
        p_le = norm.cdf((w_plus - mean + 0.5) / sd)
        p_ge = 1 - norm.cdf((w_plus - mean - 0.5) / sd)
        method = "normal"

    if alternative == LESS:
        p = p_le
    elif alternative == GREATER:
        p = p_ge
    else:
        p = 2 * min(p_le, p_ge)
    return WilcoxonResult(min(1.0, max(0.0, p)), w_plus, n, method)


@dataclass(frozen=True)
class CliffsDelta:
    delta: float
    magnitude: str


def cliffs_magnitude(delta: float) -> str:
    d = abs(delta)
    if d < 0.147:
        return "insignificant"
    if d < 0.33:
        return "small"
    if d < 0.474:
        return "medium"
    return "large"


def cliffs_delta(x: Sequence[float], y: Sequence[float]) -> CliffsDelta:
    """Dominance of x over y: P(x > y) - P(x < y)."""
    if not x or not y:
        raise ValueError("samples must not be empty")
    ys = sorted(y)
    greater = less = 0
    for v in x:
        less += len(ys) - bisect.bisect_right(ys, v)
        greater += bisect.bisect_left(ys, v)
    delta = (greater - less) / (len(x) * len(y))
    return CliffsDelta(delta, cliffs_magnitude(delta))


@dataclass(frozen=True)
class Quartiles:
    min: float
    q1: float
    q2: float
    q3: float


def quartiles(values: Sequence[float]) -> Optional[Quartiles]:
    """Min and quartiles, interpolating linearly between order statistics."""
    if not values:
        return None
    if len(values) == 1:
        v = values[0]
        return Quartiles(v, v, v, v)
    q1, q2, q3 = statistics.quantiles(values, n=4, method="inclusive")
    return Quartiles(min(values), q1, q2, q3)
