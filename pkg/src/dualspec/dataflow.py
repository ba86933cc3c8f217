"""Static testing requirements: all-nodes, all-edges and all-uses."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

from . import spectra
from .cfg import CUSE, DEF, PUSE, Cfg

C_USE, P_USE = "c-use", "p-use"


@dataclass(frozen=True)
class Dua:
    """A definition-use association.

    ``use_node`` is the node holding the use; for p-uses that is the
    predicate node and ``target_node`` the successor taken.
    """

    kind: str
    var: str
    def_node: int
    def_line: int
    use_node: int
    use_line: int
    target_node: Optional[int] = None
    target_line: Optional[int] = None
    intra: bool = False  # def and use resolved inside one block

    @property
    def key(self) -> tuple:
        return (self.kind, self.def_node, self.use_node, self.target_node, self.var)

    @property
    def element_id(self) -> str:
        if self.kind == C_USE:
            return spectra.cuse_id(self.def_node, self.use_node, self.var)
        return spectra.puse_id(self.def_node, self.use_node, self.target_node, self.var)

    @property
    def lines(self) -> list[int]:
        """Source lines a developer reads for this DUA: def, use, branch target."""
        out = []
        for ln in (self.def_line, self.use_line, self.target_line):
            if ln is not None and ln not in out:
                out.append(ln)
        return out

    def __str__(self) -> str:
        if self.kind == C_USE:
            return f"({self.def_node}, {self.use_node}, {self.var})"
        return f"({self.def_node}, ({self.use_node},{self.target_node}), {self.var})"


@dataclass(frozen=True)
class RequirementSet:
    function: str
    nodes: tuple
    edges: tuple
    duas: tuple
    lines: tuple

    def dua_index(self) -> dict[str, Dua]:
        return {d.element_id: d for d in self.duas}

    def element_ids(self) -> list[str]:
        """Matrix columns: lines, nodes, edges, then DUAs."""
        return (
            [spectra.line_id(n) for n in self.lines]
            + [spectra.node_id(n) for n in self.nodes]
            + [spectra.edge_id(a, b) for a, b in self.edges]
            + [d.element_id for d in self.duas]
        )


class ReachingDefs(NamedTuple):
    in_: dict
    out: dict


def reaching_definitions(cfg: Cfg) -> ReachingDefs:
    """Forward may-analysis over (var, def_node, def_line) facts."""
    gen, killed_vars = {}, {}
    for blk in cfg.blocks:
        last = {}
        for ev in blk.events:
            if ev.kind == DEF:
                last[ev.var] = ev.line
        gen[blk.id] = frozenset((v, blk.id, ln) for v, ln in last.items())
        killed_vars[blk.id] = frozenset(last)

    preds = {n: cfg.predecessors(n) for n in cfg.nodes}
    in_ = {n: frozenset() for n in cfg.nodes}
    out = {n: gen[n] for n in cfg.nodes}
    worklist = list(cfg.nodes)
    while worklist:
        n = worklist.pop(0)
        facts = frozenset().union(*(out[p] for p in preds[n]))
        in_[n] = facts
        new_out = gen[n] | frozenset(f for f in facts if f[0] not in killed_vars[n])
        if new_out != out[n]:
            out[n] = new_out
            worklist.extend(s for s in cfg.successors(n) if s not in worklist)
    return ReachingDefs(in_, out)


def all_uses(cfg: Cfg, ba_dua_compat: bool = False) -> RequirementSet:
    """Nodes, edges and DUAs of an annotated CFG.

    A use preceded by a definition of the same variable inside its block is
    paired with that closest definition only; otherwise it is paired with
    every definition reaching the block entry.  With ``ba_dua_compat`` the
    DUAs whose definition and use live in one block are dropped.
    """
    rd = reaching_definitions(cfg)
    found: dict[tuple, Dua] = {}

    def add(dua: Dua) -> None:
        prev = found.get(dua.key)
        if prev is None:
            found[dua.key] = dua
        elif prev.intra and not dua.intra:
            found[dua.key] = replace(prev, intra=False)

    for blk in cfg.blocks:
        local = {}
        reaching = sorted(rd.in_[blk.id], key=lambda f: (f[1], f[2], f[0]))
        for ev in blk.events:
            if ev.kind == DEF:
                local[ev.var] = ev.line
                continue
            if ev.var in local:
                sources = [(blk.id, local[ev.var], True)]
            else:
                sources = [(d, ln, False) for v, d, ln in reaching if v == ev.var]
            for d, dl, intra in sources:
                if ev.kind == CUSE:
                    add(Dua(C_USE, ev.var, d, dl, blk.id, ev.line, intra=intra))
                elif ev.kind == PUSE:
                    for s in blk.successors:
                        add(Dua(P_USE, ev.var, d, dl, blk.id, ev.line, s, cfg.target_line(s), intra))

    duas = [d for d in found.values() if not (ba_dua_compat and d.intra)]
    lines = sorted(ln for b in cfg.blocks for ln in b.lines)
    return RequirementSet(cfg.function, tuple(cfg.nodes), tuple(cfg.edges), tuple(duas), tuple(lines))


def table_notation(reqs: RequirementSet) -> str:
    """Nodes, edges and DUAs as three labelled columns of triples."""
    out = ["all-nodes: " + " ".join(str(n) for n in reqs.nodes)]
    out.append("all-edges: " + " ".join(f"({a},{b})" for a, b in reqs.edges))
    out.append(f"all-uses ({len(reqs.duas)}):")
    out.extend(f"  {d}" for d in reqs.duas)
    return "\n".join(out) + "\n"
