"""``dualspec`` command-line entry point."""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional, Sequence

from . import evaluation, lang, metrics, runner, spectra, stats, timing
from .cfg import dump, function_cfg
from .dataflow import all_uses, table_notation

EXIT_OK, EXIT_USAGE, EXIT_ANALYSIS = 0, 1, 2
BUNDLED_CATALOG = Path(__file__).parent / "corpus" / "catalog.toml"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _metrics_arg(text: str) -> list[str]:
    if text == "all":
        return [m.value for m in metrics.METRICS]
    out = []
    for tok in text.split(","):
        try:
            m = metrics.parse_metric(tok.strip()).value
        except ValueError as exc:
            raise UsageError(f"--metric: {exc}") from None
        if m not in out:
            out.append(m)
    return out


def _spectra_arg(text: str) -> list[str]:
    if text == "both":
        return list(evaluation.SPECTRA)
    if text not in evaluation.SPECTRA:
        raise UsageError(f"--spectrum: expected line, dua or both, got {text!r}")
    return [text]


def _cap_arg(value: int) -> int:
    if not 1 <= value <= evaluation.DEFAULT_CAP:
        raise UsageError(f"--cap: must be between 1 and {evaluation.DEFAULT_CAP}, got {value}")
    return value


def _jobs_arg(value: Optional[int]) -> int:
    if value is None:
        return os.cpu_count() or 1
    if value < 1:
        raise UsageError(f"--jobs: must be positive, got {value}")
    return value


def _load(program_path: str, function: Optional[str]):
    program = lang.parse_file(program_path)
    name = function or program.function_names[0]
    try:
        fn = program.function(name)
    except KeyError:
        raise UsageError(f"--function: no function {name!r} in {program_path}") from None
    return program, fn


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_reqs(args) -> int:
    _, fn = _load(args.program, args.function)
    cfg = function_cfg(fn)
    reqs = all_uses(cfg, ba_dua_compat=args.ba_dua_compat)
    if args.dump_cfg:
        sys.stdout.write(dump(cfg))
    if args.format == "csv":
        rows = ["kind,var,def_node,def_line,use_node,use_line,target_node,target_line,id"]
        for d in reqs.duas:
            tn = "" if d.target_node is None else d.target_node
            tl = "" if d.target_line is None else d.target_line
            rows.append(f"{d.kind},{d.var},{d.def_node},{d.def_line},{d.use_node},{d.use_line},{tn},{tl},{d.element_id}")
        sys.stdout.write("\n".join(rows) + "\n")
    else:
        sys.stdout.write(table_notation(reqs))
    return EXIT_OK


def cmd_run(args) -> int:
    jobs = _jobs_arg(args.jobs)
    suite = runner.load_suite(args.suite)
    if not suite:
        raise UsageError(f"{args.suite}: empty test suite")
    program, fn = _load(args.program, args.function or suite[0].function)
    reqs = all_uses(function_cfg(fn), ba_dua_compat=args.ba_dua_compat)
    executions = runner.execute_suite(program, reqs, suite, jobs=jobs)
    for e in executions:
        shown = e.outcome.value if isinstance(e.outcome, runner.Value) else f"{e.outcome.kind}@{e.outcome.line}"
        lines = " ".join(str(n) for n in sorted(e.covered_lines))
        print(f"{e.test}: {e.verdict} (result {shown}) lines {{{lines}}}")
    matrix = runner.matrix_from_executions(reqs, executions)
    if args.export_matrix:
        write_atomic(Path(args.export_matrix), spectra.export_csv(matrix))
    if args.time:
        report = timing.time_phases(program, reqs, suite, jobs=jobs)
        sys.stdout.write(report.format())
        if args.timing_out:
            write_atomic(Path(args.timing_out), _json(report.to_json()))
    return EXIT_OK


def cmd_rank(args) -> int:
    metric = _metrics_arg(args.metric)
    if len(metric) != 1:
        raise UsageError("--metric: rank takes exactly one metric")
    kind = _spectra_arg(args.spectrum)
    if len(kind) != 1:
        raise UsageError("--spectrum: rank takes line or dua")
    matrix = spectra.import_csv(Path(args.matrix).read_text(encoding="utf-8"))
    elements = matrix.select(kind[0])
    if not elements:
        raise UsageError(f"--spectrum: matrix has no {kind[0]} columns")
    text = metrics.format_ranking(metrics.rank(matrix, elements, metric[0]))
    if args.out:
        write_atomic(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _write_report(out: Path, records, metric_ids, spectrum_ids, alternative, cap, **settings) -> dict:
    report = evaluation.build_report(records, metric_ids, spectrum_ids, alternative, cap, **settings)
    write_atomic(out / "report.json", _json(report))
    write_atomic(out / "records.csv", evaluation.records_csv(records))
    write_atomic(out / "table.txt", evaluation.format_table(report))
    for metric in metric_ids:
        for spectrum in spectrum_ids:
            costs = [r.cost for r in records if r.metric == metric and r.spectrum == spectrum]
            rows = ["x,faults_found"] + [f"{x},{n}" for x, n in evaluation.effectiveness_curve(costs, cap)]
            write_atomic(out / "curves" / f"{metric}_{spectrum}.csv", "\n".join(rows) + "\n")
    return report


def cmd_evaluate(args) -> int:
    metric_ids = _metrics_arg(args.metric)
    spectrum_ids = _spectra_arg(args.spectrum)
    cap = _cap_arg(args.cap)
    jobs = _jobs_arg(args.jobs)
    out = Path(args.out)
    faults = evaluation.load_catalog(args.catalog or BUNDLED_CATALOG)
    data = evaluation.analyze_catalog(faults, ba_dua_compat=args.ba_dua_compat, jobs=jobs)
    records = []
    for fd in sorted(data, key=lambda d: d.fault.id):
        if fd.matrix.failing == 0:
            raise metrics.RankingError(f"fault {fd.fault.id!r}: no failing test in its suite")
        write_atomic(out / "matrices" / f"{fd.fault.id}.csv", spectra.export_csv(fd.matrix))
        for metric in metric_ids:
            for spectrum in spectrum_ids:
                ranking, record = evaluation.evaluate_fault(fd, metric, spectrum, args.dedup_lines, cap)
                write_atomic(out / "rankings" / f"{fd.fault.id}_{metric}_{spectrum}.csv",
                             metrics.format_ranking(ranking))
                records.append(record)
    alternative = stats.TWO_SIDED if args.two_sided else stats.LESS
    report = _write_report(out, records, metric_ids, spectrum_ids, alternative, cap,
                           dedup_lines=args.dedup_lines, ba_dua_compat=args.ba_dua_compat)
    sys.stdout.write(evaluation.format_table(report))
    if args.time:
        total = timing.TimingReport()
        for fd in data:
            program = lang.parse_file(fd.fault.program)
            suite = runner.load_suite(fd.fault.suite)
            total.add(timing.time_phases(program, fd.reqs, suite, jobs=jobs))
        write_atomic(out / "timing.json", _json(total.to_json()))
        sys.stdout.write(total.format())
    return EXIT_OK


def cmd_report(args) -> int:
    cap = _cap_arg(args.cap)
    records = evaluation.parse_records_csv(Path(args.records).read_text(encoding="utf-8"))
    if not records:
        raise UsageError(f"{args.records}: no records")
    metric_ids = list(dict.fromkeys(r.metric for r in records))
    spectrum_ids = [s for s in evaluation.SPECTRA if any(r.spectrum == s for r in records)]
    alternative = stats.TWO_SIDED if args.two_sided else stats.LESS
    report = _write_report(Path(args.out), records, metric_ids, spectrum_ids, alternative, cap)
    sys.stdout.write(evaluation.format_table(report))
    return EXIT_OK


def cmd_import_matrix(args) -> int:
    matrix = spectra.import_csv(Path(args.matrix).read_text(encoding="utf-8"))
    kinds = {}
    for e in matrix.elements:
        k = spectra.element_kind(e)
        kinds[k] = kinds.get(k, 0) + 1
    print(f"tests: {matrix.total_tests} ({matrix.failing} failing, {matrix.passing} passing)")
    print("elements: " + ", ".join(f"{k} {n}" for k, n in sorted(kinds.items())))
    if args.out:
        write_atomic(Path(args.out), spectra.export_csv(matrix))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dualspec", description="Data-flow and control-flow spectrum fault localization.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("reqs", help="list nodes, edges and DUAs of a function")
    s.add_argument("program")
    s.add_argument("--function")
    s.add_argument("--format", choices=("text", "csv"), default="text")
    s.add_argument("--dump-cfg", action="store_true")
    s.add_argument("--ba-dua-compat", action="store_true")
    s.set_defaults(func=cmd_reqs)

    s = sub.add_parser("run", help="run a test suite and collect spectra")
    s.add_argument("program")
    s.add_argument("suite")
    s.add_argument("--function")
    s.add_argument("--export-matrix")
    s.add_argument("--time", action="store_true")
    s.add_argument("--timing-out")
    s.add_argument("--jobs", type=int)
    s.add_argument("--ba-dua-compat", action="store_true")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("rank", help="rank the elements of a spectrum matrix")
    s.add_argument("matrix")
    s.add_argument("--metric", default="ochiai")
    s.add_argument("--spectrum", default="line")
    s.add_argument("--out")
    s.set_defaults(func=cmd_rank)

    s = sub.add_parser("evaluate", help="compare DUA and line spectra over a fault catalog")
    s.add_argument("catalog", nargs="?")
    s.add_argument("--metric", default="all")
    s.add_argument("--spectrum", default="both")
    s.add_argument("--out", default="report")
    s.add_argument("--dedup-lines", action="store_true")
    s.add_argument("--ba-dua-compat", action="store_true")
    s.add_argument("--cap", type=int, default=evaluation.DEFAULT_CAP)
    s.add_argument("--two-sided", action="store_true")
    s.add_argument("--time", action="store_true")
    s.add_argument("--jobs", type=int)
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("report", help="rebuild report.json and curves from records.csv")
    s.add_argument("records")
    s.add_argument("--out", default="report")
    s.add_argument("--cap", type=int, default=evaluation.DEFAULT_CAP)
    s.add_argument("--two-sided", action="store_true")
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("import-matrix", help="validate a spectrum matrix CSV")
    s.add_argument("matrix")
    s.add_argument("--out")
    s.set_defaults(func=cmd_import_matrix)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"dualspec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (lang.ImpxError, runner.SuiteFormatError, runner.ConfigurationError,
            evaluation.CatalogError, spectra.SpectrumError, OSError, ValueError) as exc:
        if isinstance(exc, metrics.RankingError):
            print(f"dualspec: analysis error: {exc}", file=sys.stderr)
            return EXIT_ANALYSIS
        print(f"dualspec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
