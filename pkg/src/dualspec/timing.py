"""Wall-clock cost of data-flow versus control-flow spectrum collection."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import lang, metrics, runner, spectra
from .dataflow import RequirementSet

PHASES = ("test-execution", "spectra-collection", "suspiciousness-computation", "list-generation")


@dataclass
class TimingReport:
    baseline: float = 0.0
    df: dict = field(default_factory=lambda: dict.fromkeys(PHASES, 0.0))
    cf: dict = field(default_factory=lambda: dict.fromkeys(PHASES, 0.0))

    @property
    def df_total(self) -> float:
        return sum(self.df.values())

    @property
    def cf_total(self) -> float:
        return sum(self.cf.values())

    @staticmethod
    def _ratio(a: float, b: float) -> Optional[float]:
        return a / b if b > 0 else None

    def ratios(self) -> dict:
        return {
            "df/baseline": self._ratio(self.df_total, self.baseline),
            "cf/baseline": self._ratio(self.cf_total, self.baseline),
            "df/cf": self._ratio(self.df_total, self.cf_total),
        }

    def add(self, other: "TimingReport") -> None:
        self.baseline += other.baseline
        for p in PHASES:
            self.df[p] += other.df[p]
            self.cf[p] += other.cf[p]

    def to_json(self) -> dict:
        def overhead(r):
            return "n/a" if r is None else round((r - 1) * 100, 2)

        ratios = self.ratios()
        return {
            "baseline_seconds": self.baseline,
            "df_phases": dict(self.df),
            "cf_phases": dict(self.cf),
            "df_seconds": self.df_total,
            "cf_seconds": self.cf_total,
            "ratios": {k: ("n/a" if v is None else v) for k, v in ratios.items()},
            "overhead_percent": {k: overhead(v) for k, v in ratios.items()},
        }

    def format(self) -> str:
        out = [f"baseline (plain execution): {self.baseline:.6f}s"]
        for label, phases in (("DF", self.df), ("CF", self.cf)):
            parts = ", ".join(f"{p} {phases[p]:.6f}s" for p in PHASES)
            out.append(f"{label}: {sum(phases.values()):.6f}s ({parts})")
        for k, v in self.ratios().items():
            out.append(f"{k.upper()}: " + ("n/a" if v is None else f"{v:.3f} ({(v - 1) * 100:+.1f}%)"))
        return "\n".join(out) + "\n"


def _pipeline(program, reqs, suite, track, kind, metric, jobs, phases) -> None:
    clock = time.perf_counter
    t0 = clock()
    executions = runner.execute_suite(program, reqs, suite, track=track, jobs=jobs)
    t1 = clock()
    full = runner.matrix_from_executions(reqs, executions)
    elements = full.select(kind)
    matrix = full.restrict(elements)
    t2 = clock()
    formula = metrics.FORMULAS[metric]
    scores = [formula(matrix.tally(e), matrix.total_tests) for e in elements]
    t3 = clock()
    order = sorted(zip(elements, scores), key=lambda es: (-es[1], spectra.sort_key(es[0])))
    metrics.worst_case_positions([s for _, s in order])
    t4 = clock()
    for p, d in zip(PHASES, (t1 - t0, t2 - t1, t3 - t2, t4 - t3)):
        phases[p] += d


def time_phases(program: lang.Program, reqs: RequirementSet, suite: Sequence[runner.TestCase],
                metric=metrics.Metric.OCHIAI, jobs: int = 1) -> TimingReport:
    """Time plain interpretation, then the DUA and the line pipelines, over one suite."""
    if not isinstance(metric, metrics.Metric):
        metric = metrics.parse_metric(metric)
    report = TimingReport()
    t0 = time.perf_counter()
    runner.execute_suite(program, None, suite, track=runner.TRACK_NONE, jobs=jobs)
    report.baseline = time.perf_counter() - t0
    _pipeline(program, reqs, suite, runner.TRACK_DUAS, "dua", metric, jobs, report.df)
    _pipeline(program, reqs, suite, runner.TRACK_LINES, "line", metric, jobs, report.cf)
    return report
