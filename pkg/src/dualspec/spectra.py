"""Spectrum matrices: which elements each test covered, plus test verdicts.

Element ids follow a fixed grammar so matrices can be exchanged as CSV:

    line:<n>  node:<n>  edge:<a>-<b>  dua:c:<d>:<u>:<var>  dua:p:<d>:<u'>:<u>:<var>
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

PASS, FAIL = "pass", "fail"

_ID_RE = re.compile(
    r"^(?:line:\d+|node:\d+|edge:\d+-\d+|dua:c:\d+:\d+:[A-Za-z_]\w*|dua:p:\d+:\d+:\d+:[A-Za-z_]\w*)$"
)


class SpectrumError(ValueError):
    pass


def line_id(line: int) -> str:
    return f"line:{line}"


def node_id(node: int) -> str:
    return f"node:{node}"


def edge_id(a: int, b: int) -> str:
    return f"edge:{a}-{b}"


def cuse_id(d: int, u: int, var: str) -> str:
    return f"dua:c:{d}:{u}:{var}"


def puse_id(d: int, u: int, s: int, var: str) -> str:
    return f"dua:p:{d}:{u}:{s}:{var}"


def is_element_id(text: str) -> bool:
    return _ID_RE.match(text) is not None


def element_kind(element: str) -> str:
    """'line', 'node', 'edge' or 'dua'."""
    return element.split(":", 1)[0]


def sort_key(element: str) -> tuple:
    """Natural ordering: numeric fields compare as numbers."""
    return tuple((0, int(p), "") if p.isdigit() else (1, 0, p) for p in re.split(r"[:-]", element))


class Counts(NamedTuple):
    c_ef: int
    c_nf: int
    c_ep: int
    c_np: int

    @property
    def total(self) -> int:
        return self.c_ef + self.c_nf + self.c_ep + self.c_np


@dataclass(frozen=True)
class SpectrumMatrix:
    tests: tuple
    verdicts: tuple
    elements: tuple
    rows: tuple  # one tuple of bools per test, aligned with ``elements``
    _column: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if len(self.tests) != len(self.verdicts) or len(self.tests) != len(self.rows):
            raise SpectrumError("tests, verdicts and rows must have the same length")
        if len(set(self.elements)) != len(self.elements):
            raise SpectrumError("duplicate element ids")
        for i, row in enumerate(self.rows):
            if len(row) != len(self.elements):
                raise SpectrumError(f"row {i + 1} has {len(row)} cells, expected {len(self.elements)}")
        for v in self.verdicts:
            if v not in (PASS, FAIL):
                raise SpectrumError(f"invalid verdict {v!r}")
        object.__setattr__(self, "_column", {e: i for i, e in enumerate(self.elements)})

    @classmethod
    def from_coverage(cls, tests: Sequence[str], verdicts: Sequence[str], elements: Sequence[str], covered) -> "SpectrumMatrix":
        """Build from one covered-id set per test."""
        rows = tuple(tuple(e in cov for e in elements) for cov in covered)
        return cls(tuple(tests), tuple(verdicts), tuple(elements), rows)

    @property
    def total_tests(self) -> int:
        return len(self.rows)

    @property
    def failing(self) -> int:
        return sum(v == FAIL for v in self.verdicts)

    @property
    def passing(self) -> int:
        return sum(v == PASS for v in self.verdicts)

    def column(self, element: str) -> list[bool]:
        try:
            j = self._column[element]
        except KeyError:
            raise SpectrumError(f"unknown element {element!r}") from None
        return [row[j] for row in self.rows]

    def tally(self, element: str) -> Counts:
        ef = nf = ep = np_ = 0
        for hit, verdict in zip(self.column(element), self.verdicts):
            if verdict == FAIL:
                if hit:
                    ef += 1
                else:
                    nf += 1
            elif hit:
                ep += 1
            else:
                np_ += 1
        return Counts(ef, nf, ep, np_)

    def select(self, kind: str) -> list[str]:
        return [e for e in self.elements if element_kind(e) == kind]

    def restrict(self, elements: Sequence[str]) -> "SpectrumMatrix":
        idx = [self._column[e] for e in elements]
        rows = tuple(tuple(row[j] for j in idx) for row in self.rows)
        return SpectrumMatrix(self.tests, self.verdicts, tuple(elements), rows)


def tally(matrix: SpectrumMatrix, element: str) -> Counts:
    return matrix.tally(element)


def export_csv(matrix: SpectrumMatrix) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["test", "verdict", *matrix.elements])
    for name, verdict, row in zip(matrix.tests, matrix.verdicts, matrix.rows):
        writer.writerow([name, verdict, *("1" if c else "0" for c in row)])
    return buf.getvalue()


def import_csv(text: str) -> SpectrumMatrix:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise SpectrumError("empty matrix file") from None
    if header[:2] != ["test", "verdict"]:
        raise SpectrumError("header must start with 'test,verdict'")
    elements = header[2:]
    for e in elements:
        if not is_element_id(e):
            raise SpectrumError(f"malformed element id {e!r} in header")
    if len(set(elements)) != len(elements):
        raise SpectrumError("duplicate element ids in header")
    tests, verdicts, rows = [], [], []
    for rownum, record in enumerate(reader, start=2):
        if not record:
            continue
        if len(record) != len(header):
            raise SpectrumError(f"row {rownum}: expected {len(header)} columns, got {len(record)}")
        name, verdict, *cells = record
        if verdict not in (PASS, FAIL):
            raise SpectrumError(f"row {rownum}: invalid verdict {verdict!r}")
        row = []
        for col, cell in enumerate(cells, start=3):
            if cell not in ("0", "1"):
                raise SpectrumError(f"row {rownum}, column {col} ({header[col - 1]}): invalid cell {cell!r}")
            row.append(cell == "1")
        tests.append(name)
        verdicts.append(verdict)
        rows.append(tuple(row))
    return SpectrumMatrix(tuple(tests), tuple(verdicts), tuple(elements), tuple(rows))
