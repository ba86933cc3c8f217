"""Suspiciousness metrics and tie-aware rankings."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from itertools import groupby
from typing import Sequence

from .spectra import Counts, SpectrumMatrix, element_kind, sort_key


class Metric(str, Enum):
    OCHIAI = "ochiai"
    JACCARD = "jaccard"
    KULCZYNSKI2 = "kulczynski2"
    ZOLTAR = "zoltar"
    MCCON = "mccon"
    MINUS = "minus"
    OP = "op"
    DRT = "drt"
    TARANTULA = "tarantula"
    WONG3 = "wong3"


METRICS = tuple(Metric)


class RankingError(ValueError):
    pass


def parse_metric(name: str) -> Metric:
    try:
        return Metric(name.lower())
    except ValueError:
        known = ", ".join(m.value for m in METRICS)
        raise ValueError(f"unknown metric {name!r} (known: {known})") from None


def _ratio(num: float, den: float) -> float:
    """``num / den`` with a zero denominator mapped to 0."""
    return num / den if den else 0.0


def ochiai(c: Counts, total: int) -> float:
    return _ratio(c.c_ef, math.sqrt((c.c_ef + c.c_nf) * (c.c_ef + c.c_ep)))


def jaccard(c: Counts, total: int) -> float:
    return _ratio(c.c_ef, c.c_ef + c.c_nf + c.c_ep)


def kulczynski2(c: Counts, total: int) -> float:
    return 0.5 * (_ratio(c.c_ef, c.c_ef + c.c_nf) + _ratio(c.c_ef, c.c_ef + c.c_ep))


def zoltar(c: Counts, total: int) -> float:
    if c.c_ef == 0:
        return 0.0
    return c.c_ef / (c.c_ef + c.c_nf + c.c_ep + 10000 * c.c_nf * c.c_ep / c.c_ef)


def mccon(c: Counts, total: int) -> float:
    return _ratio(c.c_ef * c.c_ef - c.c_nf * c.c_ep, (c.c_ef + c.c_nf) * (c.c_ef + c.c_ep))


def _fail_pass_ratios(c: Counts) -> tuple[float, float]:
    return _ratio(c.c_ef, c.c_ef + c.c_nf), _ratio(c.c_ep, c.c_ep + c.c_np)


def tarantula(c: Counts, total: int) -> float:
    fail, pass_ = _fail_pass_ratios(c)
    return _ratio(fail, fail + pass_)


def minus(c: Counts, total: int) -> float:
    fail, pass_ = _fail_pass_ratios(c)
    return _ratio(fail, fail + pass_) - _ratio(1 - fail, (1 - fail) + (1 - pass_))


def op(c: Counts, total: int) -> float:
    return c.c_ef - c.c_ep / (c.c_ep + c.c_np + 1)


def drt(c: Counts, total: int) -> float:
    return c.c_ef / (1 + _ratio(c.c_ep, total))


def wong3(c: Counts, total: int) -> float:
    ep = c.c_ep
    if ep <= 2:
        p = ep
    elif ep <= 10:
        p = 2 + 0.1 * (ep - 2)
    else:
        p = 2.8 + 0.001 * (ep - 10)
    return c.c_ef - p


FORMULAS = {
    Metric.OCHIAI: ochiai,
    Metric.JACCARD: jaccard,
    Metric.KULCZYNSKI2: kulczynski2,
    Metric.ZOLTAR: zoltar,
    Metric.MCCON: mccon,
    Metric.MINUS: minus,
    Metric.OP: op,
    Metric.DRT: drt,
    Metric.TARANTULA: tarantula,
    Metric.WONG3: wong3,
}


def score(metric, counts: Counts, total_tests: int) -> float:
    if not isinstance(metric, Metric):
        metric = parse_metric(metric)
    return float(FORMULAS[metric](counts, total_tests))


@dataclass(frozen=True)
class RankEntry:
    element: str
    score: float
    worst_case_position: int


@dataclass(frozen=True)
class RankedList:
    metric: Metric
    spectrum_kind: str
    entries: tuple

    def __len__(self) -> int:
        return len(self.entries)

    def position(self, element: str) -> int:
        for e in self.entries:
            if e.element == element:
                return e.worst_case_position
        raise KeyError(element)

    def tie_groups(self) -> list[list[RankEntry]]:
        return [list(g) for _, g in groupby(self.entries, key=lambda e: e.score)]


def worst_case_positions(scores: Sequence[float]) -> list[int]:
    """Position of each score when every tied element is inspected first."""
    order = sorted(scores, reverse=True)
    last = {}
    for i, s in enumerate(order, start=1):
        last[s] = i
    return [last[s] for s in scores]


def rank(matrix: SpectrumMatrix, elements: Sequence[str], metric) -> RankedList:
    """Rank ``elements`` by descending suspiciousness.

    Equal scores are listed in element-id order; their position is the
    worst case, counting the whole tie group.
    """
    if not isinstance(metric, Metric):
        metric = parse_metric(metric)
    if matrix.failing == 0:
        raise RankingError("ranking needs at least one failing test")
    formula = FORMULAS[metric]
    total = matrix.total_tests
    scored = [(e, float(formula(matrix.tally(e), total))) for e in elements]
    scored.sort(key=lambda es: (-es[1], sort_key(es[0])))
    positions = worst_case_positions([s for _, s in scored])
    kinds = {element_kind(e) for e, _ in scored}
    kind = kinds.pop() if len(kinds) == 1 else "mixed"
    entries = tuple(RankEntry(e, s, p) for (e, s), p in zip(scored, positions))
    return RankedList(metric, kind, entries)


def format_ranking(ranking: RankedList) -> str:
    lines = ["rank,element,score,worst_case_position"]
    for i, e in enumerate(ranking.entries, start=1):
        lines.append(f"{i},{e.element},{e.score:.6f},{e.worst_case_position}")
    return "\n".join(lines) + "\n"
