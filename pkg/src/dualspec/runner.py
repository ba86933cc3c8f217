"""Instrumented interpretation of IMPX test cases.

The interpreter walks the control-flow graph of each function, so node and
edge coverage fall out of the traversal.  For the function under test it also
keeps, per activation, the node and line of the last definition of every
variable; a c-use marks its DUA at the moment of the read, and the p-uses of
a predicate are marked once the outgoing edge is known.  Because DUAs are
marked eagerly, a run that faults keeps everything it covered up to the
fault.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

from . import lang, spectra
from .cfg import PUSE, Cfg, function_cfg
from .dataflow import RequirementSet

ERROR = "ERROR"
DEFAULT_BUDGET = 1_000_000
MAX_DEPTH = 100

# Instrumentation levels.
TRACK_NONE = frozenset()
TRACK_LINES = frozenset({"lines"})  # lines, nodes and edges
TRACK_DUAS = frozenset({"duas"})
TRACK_ALL = TRACK_LINES | TRACK_DUAS


class ConfigurationError(Exception):
    """The test cannot be run at all (bad arity, types, unknown function)."""


class SuiteFormatError(ValueError):
    pass


@dataclass(frozen=True)
class TestCase:
    name: str
    function: str
    args: tuple
    expected: Union[int, str]

    __test__ = False  # not a pytest class


@dataclass(frozen=True)
class Value:
    value: int


@dataclass(frozen=True)
class RuntimeFault:
    kind: str
    line: int


@dataclass(frozen=True)
class TestExecution:
    test: str
    verdict: str
    outcome: Union[Value, RuntimeFault]
    covered_lines: frozenset
    covered_nodes: frozenset
    covered_edges: frozenset
    covered_duas: frozenset  # element ids
    steps: int
    trace: tuple  # node sequence of the outermost activation

    __test__ = False


class _Fault(Exception):
    def __init__(self, kind: str, line: int):
        super().__init__(kind, line)
        self.kind = kind
        self.line = line


class _Frame:
    __slots__ = ("vars", "last_def", "node", "line", "preads", "depth")

    def __init__(self, values: dict, last_def: Optional[dict], depth: int):
        self.vars = values
        self.depth = depth
        self.last_def = last_def  # None when DUAs are not tracked in this activation
        self.node = 1
        self.line = 0
        self.preads = None  # list of (var, def) while evaluating a predicate


def _div(a: int, b: int, line: int) -> int:
    if b == 0:
        raise _Fault("division-by-zero", line)
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def _mod(a: int, b: int, line: int) -> int:
    return a - b * _div(a, b, line)


_ARITH = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "<": lambda a, b: int(a < b),
    "<=": lambda a, b: int(a <= b),
    ">": lambda a, b: int(a > b),
    ">=": lambda a, b: int(a >= b),
    "==": lambda a, b: int(a == b),
    "!=": lambda a, b: int(a != b),
}


class Interpreter:
    def __init__(self, program: lang.Program, target: Optional[str] = None, track=TRACK_ALL,
                 budget: int = DEFAULT_BUDGET):
        self.program = program
        self.functions = {fn.name: fn for fn in program.functions}
        self.cfgs: dict[str, Cfg] = {fn.name: function_cfg(fn) for fn in program.functions}
        self.puse_vars = {
            name: {b.id: sorted({e.var for e in b.events if e.kind == PUSE}) for b in g.blocks}
            for name, g in self.cfgs.items()
        }
        self.target = target
        self.track_lines = "lines" in track
        self.track_duas = "duas" in track
        self.budget = budget

    def run(self, function: str, args: Sequence) -> Union[Value, RuntimeFault]:
        self.steps = 0
        self.lines, self.nodes, self.edges, self.duas = set(), set(), set(), set()
        self.trace = None
        line = self.functions[function].signature_line
        try:
            outcome = Value(self.call(function, list(args), 0))
        except _Fault as fault:
            outcome = RuntimeFault(fault.kind, fault.line)
        except RecursionError:
            outcome = RuntimeFault("stack-overflow", line)
        return outcome

    # -- control flow --

    def call(self, name: str, args: list, depth: int) -> int:
        if depth > MAX_DEPTH:
            raise _Fault("stack-overflow", self.functions[name].signature_line)
        fn = self.functions[name]
        g = self.cfgs[name]
        instrumented = name == self.target
        values = {p.name: a for p, a in zip(fn.params, args)}
        last_def = None
        if instrumented and self.track_duas:
            last_def = {p.name: (1, fn.signature_line) for p in fn.params}
        frame = _Frame(values, last_def, depth)
        frame.line = fn.signature_line
        trace = [] if instrumented and self.trace is None else None
        if trace is not None:
            self.trace = trace
        mark_flow = instrumented and self.track_lines
        puse_vars = self.puse_vars[name]
        node, prev = g.entry, None
        while True:
            frame.node = node
            blk = g.block(node)
            if trace is not None:
                trace.append(node)
            if mark_flow:
                self.nodes.add(node)
                if prev is not None:
                    self.edges.add((prev, node))
            for stmt in blk.statements:
                frame.line = stmt.line
                self.steps += 1
                if self.steps > self.budget:
                    raise _Fault("budget", stmt.line)
                if mark_flow:
                    self.lines.add(stmt.line)
                if stmt is blk.predicate:
                    if last_def is not None:
                        frame.preads = []
                    taken = self.eval(stmt.cond, frame) != 0
                    succ = blk.true_succ if taken else blk.false_succ
                    if last_def is not None:
                        self.mark_puses(frame, puse_vars[node], succ)
                    prev, node = node, succ
                    break
                if isinstance(stmt, lang.Return):
                    return self.eval(stmt.value, frame)
                self.exec(stmt, frame)
            else:
                if blk.next is None:
                    raise _Fault("no-return", frame.line)
                prev, node = node, blk.next

    def mark_puses(self, frame: _Frame, variables, succ: int) -> None:
        reads: dict[str, set] = {}
        for var, d in frame.preads:
            reads.setdefault(var, set()).add(d)
        frame.preads = None
        u = frame.node
        for var in variables:
            for d_node, _ in reads.get(var) or (frame.last_def[var],):
                self.duas.add(spectra.puse_id(d_node, u, succ, var))

    # -- statements --

    def define(self, frame: _Frame, name: str, value) -> None:
        frame.vars[name] = value
        if frame.last_def is not None:
            frame.last_def[name] = (frame.node, frame.line)

    def read(self, frame: _Frame, name: str):
        if frame.last_def is not None:
            d = frame.last_def[name]
            if frame.preads is not None:
                frame.preads.append((name, d))
            else:
                self.duas.add(spectra.cuse_id(d[0], frame.node, name))
        return frame.vars[name]

    def exec(self, stmt, frame: _Frame) -> None:
        if isinstance(stmt, lang.VarDecl):
            self.define(frame, stmt.name, self.eval(stmt.init, frame))
        elif isinstance(stmt, lang.Assign):
            if stmt.op == "=":
                value = self.eval(stmt.value, frame)
            else:
                old = self.read(frame, stmt.name)
                value = self.apply(stmt.op[0], old, self.eval(stmt.value, frame), stmt.line)
            self.define(frame, stmt.name, value)
        elif isinstance(stmt, lang.ArrayStore):
            idx = self.eval(stmt.index, frame)
            value = self.eval(stmt.value, frame)
            arr = self.read(frame, stmt.array)
            self.check_index(arr, idx, stmt.line)
            if stmt.op != "=":
                value = self.apply(stmt.op[0], arr[idx], value, stmt.line)
            arr[idx] = value
            self.define(frame, stmt.array, arr)
        elif isinstance(stmt, lang.ExprStmt):
            self.eval(stmt.expr, frame)
        else:
            raise TypeError(stmt)

    # -- expressions --

    @staticmethod
    def check_index(arr: list, idx: int, line: int) -> None:
        if not 0 <= idx < len(arr):
            raise _Fault("index-out-of-bounds", line)

    @staticmethod
    def apply(op: str, a: int, b: int, line: int) -> int:
        if op == "/":
            return _div(a, b, line)
        if op == "%":
            return _mod(a, b, line)
        return _ARITH[op](a, b)

    def eval(self, expr, frame: _Frame):
        if isinstance(expr, lang.Num):
            return expr.value
        if isinstance(expr, lang.Var):
            return self.read(frame, expr.name)
        if isinstance(expr, lang.Binary):
            if expr.op == "&&":
                return int(self.eval(expr.left, frame) != 0 and self.eval(expr.right, frame) != 0)
            if expr.op == "||":
                return int(self.eval(expr.left, frame) != 0 or self.eval(expr.right, frame) != 0)
            left = self.eval(expr.left, frame)
            return self.apply(expr.op, left, self.eval(expr.right, frame), frame.line)
        if isinstance(expr, lang.Index):
            idx = self.eval(expr.index, frame)
            arr = self.read(frame, expr.array)
            self.check_index(arr, idx, frame.line)
            return arr[idx]
        if isinstance(expr, lang.IncDec):
            old = self.read(frame, expr.name)
            new = old + 1 if expr.op == "++" else old - 1
            self.define(frame, expr.name, new)
            return new if expr.prefix else old
        if isinstance(expr, lang.Unary):
            v = self.eval(expr.operand, frame)
            return -v if expr.op == "-" else int(v == 0)
        if isinstance(expr, lang.Call):
            args = [self.eval(a, frame) for a in expr.args]
            if expr.name == "len":
                return len(args[0])
            return self.call(expr.name, args, frame.depth + 1)
        if isinstance(expr, lang.ArrayLit):
            return [self.eval(i, frame) for i in expr.items]
        if isinstance(expr, lang.NewArray):
            size = self.eval(expr.size, frame)
            if size < 0:
                raise _Fault("negative-array-size", frame.line)
            return [0] * size
        raise TypeError(expr)


# ---------------------------------------------------------------------------
# Tests and suites
# ---------------------------------------------------------------------------


def _check_args(fn: lang.Function, test: TestCase) -> None:
    if len(test.args) != len(fn.params):
        raise ConfigurationError(
            f"test {test.name!r}: {fn.name} takes {len(fn.params)} arguments, got {len(test.args)}"
        )
    for p, a in zip(fn.params, test.args):
        ok = isinstance(a, list) and all(isinstance(x, int) for x in a) if p.type == lang.INT_ARRAY \
            else isinstance(a, int) and not isinstance(a, bool)
        if not ok:
            raise ConfigurationError(f"test {test.name!r}: argument {p.name!r} must be {p.type}")


def verdict_of(outcome, expected) -> str:
    if expected == ERROR:
        return spectra.PASS if isinstance(outcome, RuntimeFault) else spectra.FAIL
    return spectra.PASS if isinstance(outcome, Value) and outcome.value == expected else spectra.FAIL


def execute_test(program: lang.Program, reqs: Optional[RequirementSet], test: TestCase,
                 track=TRACK_ALL, budget: int = DEFAULT_BUDGET) -> TestExecution:
    """Run one test and record what it covered in ``test.function``."""
    if test.function not in program.function_names:
        raise ConfigurationError(f"test {test.name!r}: unknown function {test.function!r}")
    if reqs is not None and reqs.function != test.function:
        raise ConfigurationError(f"test {test.name!r} targets {test.function!r}, requirements are for {reqs.function!r}")
    fn = program.function(test.function)
    _check_args(fn, test)
    interp = Interpreter(program, test.function, track, budget)
    args = [list(a) if isinstance(a, list) else a for a in test.args]
    outcome = interp.run(test.function, args)
    return TestExecution(
        test=test.name,
        verdict=verdict_of(outcome, test.expected),
        outcome=outcome,
        covered_lines=frozenset(interp.lines),
        covered_nodes=frozenset(interp.nodes),
        covered_edges=frozenset(interp.edges),
        covered_duas=frozenset(interp.duas),
        steps=interp.steps,
        trace=tuple(interp.trace or ()),
    )


def _execute_one(job):
    return execute_test(*job)


def execute_suite(program: lang.Program, reqs: Optional[RequirementSet], suite: Sequence[TestCase],
                  track=TRACK_ALL, budget: int = DEFAULT_BUDGET, jobs: int = 1) -> list[TestExecution]:
    functions = {t.function for t in suite}
    if len(functions) > 1:
        raise ConfigurationError(f"suite targets several functions: {sorted(functions)}")
    work = [(program, reqs, t, track, budget) for t in suite]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_execute_one, work, chunksize=max(1, len(work) // (4 * jobs))))
    return [_execute_one(w) for w in work]


def coverage_ids(execution: TestExecution) -> set[str]:
    ids = {spectra.line_id(n) for n in execution.covered_lines}
    ids.update(spectra.node_id(n) for n in execution.covered_nodes)
    ids.update(spectra.edge_id(a, b) for a, b in execution.covered_edges)
    ids.update(execution.covered_duas)
    return ids


def matrix_from_executions(reqs: RequirementSet, executions: Sequence[TestExecution]) -> spectra.SpectrumMatrix:
    return spectra.SpectrumMatrix.from_coverage(
        [e.test for e in executions],
        [e.verdict for e in executions],
        reqs.element_ids(),
        [coverage_ids(e) for e in executions],
    )


def run_suite(program: lang.Program, reqs: RequirementSet, suite: Sequence[TestCase],
              jobs: int = 1, budget: int = DEFAULT_BUDGET) -> spectra.SpectrumMatrix:
    """One matrix row per test, in suite order, over the requirement set's elements."""
    return matrix_from_executions(reqs, execute_suite(program, reqs, suite, jobs=jobs, budget=budget))


# ---------------------------------------------------------------------------
# Suite files
# ---------------------------------------------------------------------------


def parse_suite(text: str) -> list[TestCase]:
    """Parse ``name ; function ; arg,arg,... ; expected`` lines (``#`` comments allowed)."""
    tests = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(";")]
        if len(parts) != 4:
            raise SuiteFormatError(f"line {lineno}: expected 4 ';'-separated fields, got {len(parts)}")
        name, function, args_text, expected_text = parts
        try:
            args = json.loads(f"[{args_text}]")
        except json.JSONDecodeError as exc:
            raise SuiteFormatError(f"line {lineno}: bad argument list {args_text!r}") from exc
        for a in args:
            if not (isinstance(a, int) or (isinstance(a, list) and all(isinstance(x, int) for x in a))):
                raise SuiteFormatError(f"line {lineno}: arguments must be ints or int arrays")
        if expected_text == ERROR:
            expected: Union[int, str] = ERROR
        else:
            try:
                expected = int(expected_text)
            except ValueError:
                raise SuiteFormatError(f"line {lineno}: expected value must be an integer or ERROR") from None
        tests.append(TestCase(name, function, tuple(args), expected))
    names = [t.name for t in tests]
    if len(set(names)) != len(names):
        raise SuiteFormatError("duplicate test names")
    return tests


def load_suite(path) -> list[TestCase]:
    return parse_suite(Path(path).read_text(encoding="utf-8"))


def format_suite(tests: Sequence[TestCase]) -> str:
    def arg(a):
        return json.dumps(a, separators=(",", ":")) if isinstance(a, list) else str(a)

    return "".join(
        f"{t.name} ; {t.function} ; {','.join(arg(a) for a in t.args)} ; {t.expected}\n" for t in tests
    )
