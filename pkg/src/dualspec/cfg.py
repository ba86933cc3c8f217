"""Per-function control-flow graphs with definition/use annotations.

Blocks are numbered from 1 in source order.  A predicate (``if``/``while``
condition) always terminates its block, and a ``while`` condition always
starts a fresh block because it is the target of the back edge.  Blocks
without statements appear in three places only: the entry block when the
body is empty or opens with a loop (parameters need a node of their own), the
true branch of an ``if`` whose branches would otherwise both reach the same
successor, and the implicit end node reached when a predicate falls off the
end of the function.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from . import lang

DEF, CUSE, PUSE = "def", "cuse", "puse"


@dataclass(frozen=True)
class Event:
    kind: str
    var: str
    line: int


@dataclass(frozen=True)
class Block:
    id: int
    statements: tuple = ()
    events: tuple = ()
    predicate: Optional[lang.Statement] = None  # If/While whose condition ends the block
    true_succ: Optional[int] = None
    false_succ: Optional[int] = None
    next: Optional[int] = None
    returns: bool = False

    @property
    def lines(self) -> tuple:
        return tuple(s.line for s in self.statements)

    @property
    def first_line(self) -> Optional[int]:
        return self.statements[0].line if self.statements else None

    @property
    def successors(self) -> tuple:
        if self.predicate is not None:
            return (self.true_succ, self.false_succ)
        return () if self.next is None else (self.next,)

    @property
    def defs(self) -> list:
        return [(e.var, e.line) for e in self.events if e.kind == DEF]

    @property
    def cuses(self) -> list:
        return [(e.var, e.line) for e in self.events if e.kind == CUSE]

    @property
    def pred_puse(self) -> frozenset:
        return frozenset((e.var, e.line) for e in self.events if e.kind == PUSE)


@dataclass(frozen=True)
class Cfg:
    function: str
    signature_line: int
    blocks: tuple

    @property
    def entry(self) -> int:
        return 1

    @property
    def nodes(self) -> list[int]:
        return [b.id for b in self.blocks]

    def block(self, node: int) -> Block:
        return self.blocks[node - 1]

    @property
    def edges(self) -> list[tuple[int, int]]:
        """Edges in node order, true branch first."""
        return [(b.id, s) for b in self.blocks for s in b.successors]

    @property
    def exits(self) -> list[int]:
        return [b.id for b in self.blocks if not b.successors]

    def successors(self, node: int) -> tuple:
        return self.block(node).successors

    def predecessors(self, node: int) -> list[int]:
        return [a for a, b in self.edges if b == node]

    def node_of_line(self, line: int) -> int:
        for b in self.blocks:
            if line in b.lines:
                return b.id
        raise KeyError(f"line {line} is not executable")

    def target_line(self, node: int) -> Optional[int]:
        """First executable line reached on entering ``node``.

        Empty blocks defer to their single successor, so an empty branch
        projects onto the statement that follows it.
        """
        seen = set()
        while node is not None and node not in seen:
            seen.add(node)
            blk = self.block(node)
            if blk.statements:
                return blk.first_line
            node = blk.next
        return None


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


class _Builder:
    def __init__(self):
        self.stmts: list[list] = []
        self.links: list[dict] = []
        self.closed: list[bool] = []
        self.cur: Optional[int] = None
        self.pending: list[tuple[int, str]] = []

    def new_block(self) -> int:
        self.stmts.append([])
        self.links.append({})
        self.closed.append(False)
        idx = len(self.stmts) - 1
        for src, label in self.pending:
            self.links[src][label] = idx
        self.pending = []
        return idx

    def open_block(self) -> int:
        if self.cur is None:
            if not self.pending:
                raise lang.ImpxStaticError("unreachable statement")
            self.cur = self.new_block()
        return self.cur

    def fresh_block(self) -> int:
        """Start a block that nothing else may share (loop headers)."""
        if self.cur is not None:
            self.pending = [(self.cur, "next")]
            self.cur = None
        return self.open_block()

    def run(self, stmts) -> None:
        for stmt in stmts:
            self.stmt(stmt)

    def stmt(self, stmt) -> None:
        if isinstance(stmt, lang.If):
            pred = self.open_block()
            self.stmts[pred].append(stmt)
            self.cur = None
            self.pending = [(pred, "true")]
            self.run(stmt.then)
            then_out = self.pending if self.cur is None else [(self.cur, "next")]
            self.cur = None
            self.pending = [(pred, "false")]
            if stmt.orelse is not None:
                self.run(stmt.orelse)
            else_out = self.pending if self.cur is None else [(self.cur, "next")]
            if (pred, "true") in then_out and (pred, "false") in else_out:
                # Both branches would land on one successor: give the true edge its own node.
                self.pending = [(pred, "true")]
                empty = self.new_block()
                then_out = [(empty, "next")]
            self.cur = None
            self.pending = then_out + else_out
        elif isinstance(stmt, lang.While):
            head = self.fresh_block()
            self.stmts[head].append(stmt)
            self.cur = None
            self.pending = [(head, "true")]
            self.run(stmt.body)
            body_out = self.pending if self.cur is None else [(self.cur, "next")]
            for src, label in body_out:
                self.links[src][label] = head
            self.cur = None
            self.pending = [(head, "false")]
        else:
            blk = self.open_block()
            self.stmts[blk].append(stmt)
            if isinstance(stmt, lang.Return):
                self.cur = None
                self.pending = []

    def finish(self) -> None:
        if self.cur is None and any(label != "next" for _, label in self.pending):
            self.new_block()


def build_cfg(function: lang.Function) -> Cfg:
    """Build the (unannotated) control-flow graph of ``function``."""
    b = _Builder()
    b.cur = b.new_block()
    b.run(function.body)
    b.finish()
    blocks = []
    for idx, stmts in enumerate(b.stmts):
        links = b.links[idx]
        last = stmts[-1] if stmts else None
        nid = lambda k: None if k not in links else links[k] + 1  # noqa: E731
        if isinstance(last, (lang.If, lang.While)):
            blk = Block(idx + 1, tuple(stmts), predicate=last, true_succ=nid("true"), false_succ=nid("false"))
        else:
            blk = Block(idx + 1, tuple(stmts), next=nid("next"), returns=isinstance(last, lang.Return))
        blocks.append(blk)
    return Cfg(function.name, function.signature_line, tuple(blocks))


# ---------------------------------------------------------------------------
# Definitions and uses
# ---------------------------------------------------------------------------


def expr_events(expr, line: int, use: str = CUSE) -> list[Event]:
    """Reads and writes of ``expr`` in evaluation order.

    Array indexing evaluates the index before reading the array variable, so
    ``array[++i]`` yields use(i), def(i), use(array).
    """
    if isinstance(expr, lang.Num):
        return []
    if isinstance(expr, lang.Var):
        return [Event(use, expr.name, line)]
    if isinstance(expr, lang.ArrayLit):
        return [e for item in expr.items for e in expr_events(item, line, use)]
    if isinstance(expr, lang.NewArray):
        return expr_events(expr.size, line, use)
    if isinstance(expr, lang.Index):
        return expr_events(expr.index, line, use) + [Event(use, expr.array, line)]
    if isinstance(expr, lang.Unary):
        return expr_events(expr.operand, line, use)
    if isinstance(expr, lang.Binary):
        return expr_events(expr.left, line, use) + expr_events(expr.right, line, use)
    if isinstance(expr, lang.IncDec):
        return [Event(use, expr.name, line), Event(DEF, expr.name, line)]
    if isinstance(expr, lang.Call):
        return [e for arg in expr.args for e in expr_events(arg, line, use)]
    raise TypeError(expr)


def statement_events(stmt) -> list[Event]:
    line = stmt.line
    if isinstance(stmt, lang.VarDecl):
        return expr_events(stmt.init, line) + [Event(DEF, stmt.name, line)]
    if isinstance(stmt, lang.Assign):
        pre = [Event(CUSE, stmt.name, line)] if stmt.op != "=" else []
        return pre + expr_events(stmt.value, line) + [Event(DEF, stmt.name, line)]
    if isinstance(stmt, lang.ArrayStore):
        # The store reads the array reference (and the element for compound ops) after both operands.
        return (
            expr_events(stmt.index, line)
            + expr_events(stmt.value, line)
            + [Event(CUSE, stmt.array, line), Event(DEF, stmt.array, line)]
        )
    if isinstance(stmt, (lang.If, lang.While)):
        return expr_events(stmt.cond, line, PUSE)
    if isinstance(stmt, lang.Return):
        return expr_events(stmt.value, line)
    if isinstance(stmt, lang.ExprStmt):
        return expr_events(stmt.expr, line)
    raise TypeError(stmt)


def annotate_def_use(cfg: Cfg, function: lang.Function) -> Cfg:
    """Attach ordered def/c-use/p-use events to every block.

    Parameters are defined at the entry node, on the signature line.
    """
    blocks = []
    for blk in cfg.blocks:
        events = []
        if blk.id == cfg.entry:
            events += [Event(DEF, p.name, function.signature_line) for p in function.params]
        for stmt in blk.statements:
            events += statement_events(stmt)
        blocks.append(replace(blk, events=tuple(events)))
    return replace(cfg, blocks=tuple(blocks))


def function_cfg(function: lang.Function) -> Cfg:
    return annotate_def_use(build_cfg(function), function)


def dump(cfg: Cfg) -> str:
    """Textual CFG: one line per node, then one per edge."""

    def fmt(pairs) -> str:
        return "{" + ",".join(f"{v}@{ln}" for v, ln in pairs) + "}"

    out = []
    for b in cfg.blocks:
        lines = ",".join(str(n) for n in b.lines)
        out.append(f"node {b.id}: lines={{{lines}}} def={fmt(b.defs)} cuse={fmt(b.cuses)}")
    for a, s in cfg.edges:
        puse = sorted(cfg.block(a).pred_puse, key=lambda p: (p[1], p[0]))
        out.append(f"edge {a} -> {s}: puse={fmt(puse)}")
    return "\n".join(out) + "\n"
