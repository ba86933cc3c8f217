"""Inspection-cost evaluation of DUA and line rankings over a fault catalog.

A fault's cost is the number of source lines a developer reads, walking the
ranking top-down, until a faulty line is reached.  Ties are resolved in the
worst case.  Costs above the cap (99 lines by default) are recorded as the
sentinel 100 and the fault counts as not found.
"""

from __future__ import annotations

import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

from . import lang, metrics, runner, spectra, stats
from .cfg import function_cfg
from .dataflow import Dua, RequirementSet, all_uses

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

LINE, DUA = "line", "dua"
SPECTRA = (LINE, DUA)
DEFAULT_CAP = 99
NOT_FOUND = 100


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class FaultSpec:
    id: str
    program: Path
    function: str
    suite: Path
    faulty_lines: tuple
    note: str = ""


@dataclass(frozen=True)
class EvalRecord:
    fault: str
    metric: str
    spectrum: str
    cost: int
    found: bool


@dataclass(frozen=True)
class Comparison:
    better: int
    tied: int
    worse: int
    dua: Optional[stats.Quartiles]
    line: Optional[stats.Quartiles]


def dua_lines(dua: Dua) -> list[int]:
    """Definition, use and (p-use only) branch-target lines, without repeats."""
    return dua.lines


def cost_to_fault(ranking: metrics.RankedList, fault: FaultSpec, dedup: bool = False,
                  cap: int = DEFAULT_CAP, duas: Optional[Mapping[str, Dua]] = None) -> EvalRecord:
    """Lines inspected until a faulty line is reached in ``ranking``.

    For a line ranking this is the worst-case position of the best-ranked
    faulty line.  For a DUA ranking, tie groups are read in order and every
    DUA of a group contributes its lines; the group holding the first DUA
    that touches a faulty line is read entirely.  With ``dedup`` a line
    already read is not counted again.
    """
    if not ranking.entries:
        raise ValueError("empty ranking")
    if cap < 1:
        raise ValueError("cap must be at least 1")
    faulty = set(fault.faulty_lines)
    cost: Optional[int] = None
    if ranking.spectrum_kind == LINE:
        positions = [e.worst_case_position for e in ranking.entries
                     if int(e.element.split(":")[1]) in faulty]
        cost = min(positions) if positions else None
    elif ranking.spectrum_kind == DUA:
        if duas is None:
            raise ValueError("DUA rankings need the DUA index to map DUAs onto lines")
        inspected, seen = 0, set()
        for group in ranking.tie_groups():
            hit = False
            for entry in group:
                lines = dua_lines(duas[entry.element])
                if dedup:
                    inspected += sum(1 for ln in lines if ln not in seen)
                    seen.update(lines)
                else:
                    inspected += len(lines)
                hit = hit or not faulty.isdisjoint(lines)
            if hit:
                cost = inspected
                break
            if inspected > cap:
                break
    else:
        raise ValueError(f"cannot evaluate a {ranking.spectrum_kind!r} ranking")
    if cost is None or cost > cap:
        return EvalRecord(fault.id, ranking.metric.value, ranking.spectrum_kind, NOT_FOUND, False)
    return EvalRecord(fault.id, ranking.metric.value, ranking.spectrum_kind, cost, True)


def effectiveness_curve(costs: Sequence[int], max_x: int = DEFAULT_CAP) -> list[tuple[int, int]]:
    """(x, number of faults found within x inspected lines) for x = 1..max_x."""
    ordered = sorted(costs)
    out, i = [], 0
    for x in range(1, max_x + 1):
        while i < len(ordered) and ordered[i] <= x:
            i += 1
        out.append((x, i))
    return out


def compare(dua_costs: Sequence[int], line_costs: Sequence[int]) -> Comparison:
    """Better/tied/worse counts of DUA against line costs, plus quartiles of each."""
    if len(dua_costs) != len(line_costs):
        raise ValueError(f"cost vectors differ in length: {len(dua_costs)} vs {len(line_costs)}")
    better = sum(d < c for d, c in zip(dua_costs, line_costs))
    tied = sum(d == c for d, c in zip(dua_costs, line_costs))
    worse = len(dua_costs) - better - tied
    return Comparison(better, tied, worse, stats.quartiles(dua_costs), stats.quartiles(line_costs))


# ---------------------------------------------------------------------------
# Catalog and per-fault analysis
# ---------------------------------------------------------------------------


def load_catalog(path) -> list[FaultSpec]:
    """Read a TOML fault catalog: one ``[[fault]]`` table per fault."""
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise CatalogError(f"{path}: {exc}") from exc
    faults = []
    for i, entry in enumerate(data.get("fault", []), start=1):
        missing = {"id", "program", "function", "suite", "faulty_lines"} - set(entry)
        if missing:
            raise CatalogError(f"{path}: fault #{i} lacks {', '.join(sorted(missing))}")
        lines = entry["faulty_lines"]
        if not lines or not all(isinstance(n, int) for n in lines):
            raise CatalogError(f"{path}: fault {entry['id']!r} needs a non-empty list of line numbers")
        faults.append(FaultSpec(
            id=str(entry["id"]),
            program=(path.parent / entry["program"]).resolve(),
            function=entry["function"],
            suite=(path.parent / entry["suite"]).resolve(),
            faulty_lines=tuple(sorted(set(lines))),
            note=entry.get("note", ""),
        ))
    ids = [f.id for f in faults]
    if len(set(ids)) != len(ids):
        raise CatalogError(f"{path}: duplicate fault ids")
    if not faults:
        raise CatalogError(f"{path}: no faults")
    return faults


@dataclass(frozen=True)
class FaultData:
    fault: FaultSpec
    reqs: RequirementSet
    matrix: spectra.SpectrumMatrix


def analyze_fault(fault: FaultSpec, ba_dua_compat: bool = False, budget: int = runner.DEFAULT_BUDGET) -> FaultData:
    program = lang.parse_file(fault.program)
    fn = program.function(fault.function)
    executable = set(lang.executable_lines(program, fault.function))
    stray = set(fault.faulty_lines) - executable
    if stray:
        raise CatalogError(f"fault {fault.id!r}: lines {sorted(stray)} are not executable in {fault.function}")
    reqs = all_uses(function_cfg(fn), ba_dua_compat=ba_dua_compat)
    suite = runner.load_suite(fault.suite)
    matrix = runner.run_suite(program, reqs, suite, budget=budget)
    return FaultData(fault, reqs, matrix)


def _analyze(job):
    return analyze_fault(*job)


def analyze_catalog(faults: Sequence[FaultSpec], ba_dua_compat: bool = False, jobs: int = 1) -> list[FaultData]:
    work = [(f, ba_dua_compat) for f in faults]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_analyze, work))
    return [_analyze(w) for w in work]


def rank_spectrum(data: FaultData, metric, spectrum: str) -> metrics.RankedList:
    return metrics.rank(data.matrix, data.matrix.select(spectrum), metric)


def evaluate_fault(data: FaultData, metric, spectrum: str, dedup: bool = False,
                   cap: int = DEFAULT_CAP) -> tuple[metrics.RankedList, EvalRecord]:
    ranking = rank_spectrum(data, metric, spectrum)
    record = cost_to_fault(ranking, data.fault, dedup, cap, data.reqs.dua_index())
    return ranking, record


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def _quartiles_json(q: Optional[stats.Quartiles]):
    return None if q is None else {"min": q.min, "q1": q.q1, "q2": q.q2, "q3": q.q3}


def build_report(records: Sequence[EvalRecord], metric_ids: Sequence[str], spectrum_ids: Sequence[str],
                 alternative: str = stats.LESS, cap: int = DEFAULT_CAP, **settings) -> dict:
    """Per-metric statistics and curves, in the shape of a DF-vs-CF results table.

    The Wilcoxon test runs on DUA costs minus line costs; Cliff's delta is
    computed as delta(line, dua) so that a positive value favours DUAs.
    """
    faults = sorted({r.fault for r in records})
    table = {(r.fault, r.metric, r.spectrum): r for r in records}
    out = {
        "faults": faults,
        "settings": {"cap": cap, "alternative": alternative, **settings},
        "metrics": {},
    }
    for metric in metric_ids:
        entry: dict = {"costs": {}, "found": {}, "quartiles": {}, "curves": {}}
        for spectrum in spectrum_ids:
            costs = [table[(f, metric, spectrum)].cost for f in faults]
            entry["costs"][spectrum] = dict(zip(faults, costs))
            entry["found"][spectrum] = sum(c <= cap for c in costs)
            entry["quartiles"][spectrum] = _quartiles_json(stats.quartiles(costs))
            entry["curves"][spectrum] = [n for _, n in effectiveness_curve(costs, cap)]
        if LINE in spectrum_ids and DUA in spectrum_ids:
            dua_costs = [table[(f, metric, DUA)].cost for f in faults]
            line_costs = [table[(f, metric, LINE)].cost for f in faults]
            cmp = compare(dua_costs, line_costs)
            wx = stats.wilcoxon_signed_rank(dua_costs, line_costs, alternative)
            cd = stats.cliffs_delta(line_costs, dua_costs)
            entry["p_value"] = wx.p_value
            entry["wilcoxon"] = {"statistic": wx.statistic, "n": wx.n, "method": wx.method,
                                 "degenerate": wx.degenerate}
            entry["effect_size"] = {"delta": cd.delta, "magnitude": cd.magnitude}
            entry["btw"] = {"better": cmp.better, "tied": cmp.tied, "worse": cmp.worse}
        out["metrics"][metric] = entry
    return out


_MAGNITUDE_TAG = {"insignificant": "I", "small": "S", "medium": "M", "large": "L"}


def format_table(report: dict) -> str:
    """Plain-text summary: P-value (%), effect size, B-T-W, Min/Q1/Q2/Q3 for DF and CF."""

    def num(v) -> str:
        return f"{v:g}" if isinstance(v, float) else str(v)

    rows = [["Metric", "P-value(%)", "Effect Size", "B-T-W",
             "Min DF", "Min CF", "Q1 DF", "Q1 CF", "Q2 DF", "Q2 CF", "Q3 DF", "Q3 CF"]]
    for metric, e in report["metrics"].items():
        qd = e["quartiles"].get(DUA) or {}
        ql = e["quartiles"].get(LINE) or {}
        if "p_value" in e:
            es = e["effect_size"]
            btw = e["btw"]
            head = [f"{100 * e['p_value']:.2f}", f"{es['delta']:.3f} ({_MAGNITUDE_TAG[es['magnitude']]})",
                    f"{btw['better']}-{btw['tied']}-{btw['worse']}"]
        else:
            head = ["-", "-", "-"]
        tail = []
        for k in ("min", "q1", "q2", "q3"):
            tail += [num(qd.get(k, "-")), num(ql.get(k, "-"))]
        rows.append([metric, *head, *tail])
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows) + "\n"


def records_csv(records: Sequence[EvalRecord]) -> str:
    lines = ["fault,metric,spectrum,cost,found"]
    lines += [f"{r.fault},{r.metric},{r.spectrum},{r.cost},{int(r.found)}" for r in records]
    return "\n".join(lines) + "\n"


def parse_records_csv(text: str) -> list[EvalRecord]:
    rows = text.strip().splitlines()
    if not rows or rows[0] != "fault,metric,spectrum,cost,found":
        raise ValueError("records file must start with 'fault,metric,spectrum,cost,found'")
    out = []
    for n, row in enumerate(rows[1:], start=2):
        parts = row.split(",")
        if len(parts) != 5:
            raise ValueError(f"records line {n}: expected 5 fields")
        fault, metric, spectrum, cost, found = parts
        out.append(EvalRecord(fault, metrics.parse_metric(metric).value, spectrum, int(cost), found == "1"))
    return out
