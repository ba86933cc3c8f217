"""Reference computations kept independent of the code under test."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

from dualspec.cfg import CUSE, DEF, PUSE


def path_duas(cfg) -> set[str]:
    """DUA ids found by walking every entry-to-exit path of an acyclic CFG.

    Along each path the latest definition of each variable is tracked; every
    use pairs with it, p-uses with the successor the path takes next.
    Parameters are defined at the entry node.
    """
    found: set[str] = set()

    def walk(node, last, path):
        blk = cfg.block(node)
        last = dict(last)
        for ev in blk.events:
            if ev.kind == DEF:
                last[ev.var] = node
            elif ev.kind == CUSE:
                found.add(f"dua:c:{last[ev.var]}:{node}:{ev.var}")
        succs = blk.successors
        for s in succs:
            assert s not in path, "oracle needs an acyclic CFG"
            for ev in blk.events:
                if ev.kind == PUSE:
                    found.add(f"dua:p:{last[ev.var]}:{node}:{s}:{ev.var}")
            walk(s, last, path + [s])

    walk(cfg.entry, {}, [cfg.entry])
    return found


def replay_duas(cfg, trace) -> set[str]:
    """DUAs exercised along one executed node sequence."""
    found, last = set(), {}
    for i, node in enumerate(trace):
        blk = cfg.block(node)
        nxt = trace[i + 1] if i + 1 < len(trace) else None
        for ev in blk.events:
            if ev.kind == DEF:
                last[ev.var] = node
            elif ev.kind == CUSE:
                found.add(f"dua:c:{last[ev.var]}:{node}:{ev.var}")
            elif ev.kind == PUSE and nxt is not None:
                found.add(f"dua:p:{last[ev.var]}:{node}:{nxt}:{ev.var}")
    return found


# -- metrics, written straight from the textbook formulas with exact arithmetic --


class _Guard:
    """Division helper: a zero denominator yields 0 and marks the case as guarded."""

    def __init__(self):
        self.hit = False

    def div(self, num, den):
        if den == 0:
            self.hit = True
            return Fraction(0)
        return Fraction(num) / Fraction(den)


def reference_metric(name: str, ef: int, nf: int, ep: int, np_: int):
    """(value, guarded) where guarded means some denominator vanished."""
    g = _Guard()
    total = ef + nf + ep + np_
    if name == "ochiai":
        den2 = (ef + nf) * (ef + ep)
        value = g.div(0, 0) if den2 == 0 else ef / math.sqrt(den2)
    elif name == "jaccard":
        value = g.div(ef, ef + nf + ep)
    elif name == "kulczynski2":
        value = (g.div(ef, ef + nf) + g.div(ef, ef + ep)) / 2
    elif name == "zoltar":
        value = g.div(0, 0) if ef == 0 else Fraction(ef) / (ef + nf + ep + Fraction(10000 * nf * ep, ef))
    elif name == "mccon":
        value = g.div(ef * ef - nf * ep, (ef + nf) * (ef + ep))
    elif name in ("tarantula", "minus"):
        f, p = g.div(ef, ef + nf), g.div(ep, ep + np_)
        value = g.div(f, f + p)
        if name == "minus":
            value -= g.div(1 - f, (1 - f) + (1 - p))
    elif name == "op":
        value = ef - Fraction(ep, ep + np_ + 1)
    elif name == "drt":
        value = ef / (1 + g.div(ep, total))
    elif name == "wong3":
        if ep <= 2:
            h = Fraction(ep)
        elif ep <= 10:
            h = 2 + Fraction(ep - 2, 10)
        else:
            h = Fraction(28, 10) + Fraction(ep - 10, 1000)
        value = ef - h
    else:
        raise KeyError(name)
    return value, g.hit


# -- statistics --


def enumerate_wilcoxon_less(x, y) -> float:
    """P(W+ <= observed) over all 2^n sign flips of the nonzero differences."""
    d = [a - b for a, b in zip(x, y) if a != b]
    mags = sorted(abs(v) for v in d)
    rank = {}
    for v in set(mags):
        idx = [i + 1 for i, m in enumerate(mags) if m == v]
        rank[v] = Fraction(sum(idx), len(idx))
    r = [rank[abs(v)] for v in d]
    observed = sum(ri for ri, v in zip(r, d) if v > 0)
    hits = 0
    for signs in itertools.product((0, 1), repeat=len(d)):
        if sum(ri for ri, s in zip(r, signs) if s) <= observed:
            hits += 1
    return hits / 2 ** len(d)


def brute_cliffs(x, y) -> Fraction:
    gt = sum(1 for a in x for b in y if a > b)
    lt = sum(1 for a in x for b in y if a < b)
    return Fraction(gt - lt, len(x) * len(y))
