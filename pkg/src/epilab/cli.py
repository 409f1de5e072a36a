"""Command-line entry point ``epilab``.

Subcommands
-----------
run
    Execute scenarios and write CSV reports (and long-format plot data).
validate
    Check scenario files against the schema.
show
    Print a resolved scenario of the bundled corpus (or of ``--corpus``).

Exit codes of ``run``: 0 clean, 1 expectation mismatch, 2 red alert,
3 inconclusive verdicts present, 4 malformed input or failing check.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

from .scenario import ScenarioError, corpus_paths, load_corpus
from .theorems import EXIT_ERROR, PLOT_HEADER, REPORT_HEADER, SUMMARY_HEADER, scenario_suite


class _Parser(argparse.ArgumentParser):
    # usage errors must not collide with the red-alert exit code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_atomic(path: Path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load(paths):
    try:
        return load_corpus(paths if paths else corpus_paths())
    except ScenarioError as exc:
        for d in exc.diagnostics:
            print(f"{exc.path}: {d}", file=sys.stderr)
        return None
    except OSError as exc:
        print(f"epilab: {exc}", file=sys.stderr)
        return None


def cmd_run(args) -> int:
    scs = _load(args.paths)
    if scs is None:
        return EXIT_ERROR
    report = scenario_suite(scs, jobs=args.jobs, tol=args.tol)
    out = Path(args.out)
    for r in report.results:
        write_atomic(out / "scenarios" / f"{r.id}.csv", _csv(REPORT_HEADER, r.rows))
        if args.emit_plots:
            write_atomic(out / "plots" / f"{r.id}.csv", _csv(PLOT_HEADER, r.plots))
    write_atomic(out / "report.csv", _csv(REPORT_HEADER, report.rows()))
    write_atomic(out / "summary.csv", _csv(SUMMARY_HEADER, report.summary_rows()))
    text = report.summary_text()
    write_atomic(out / "summary.txt", text)
    sys.stdout.write(text)
    return report.exit_code


def cmd_validate(args) -> int:
    code = 0
    for p in args.paths:
        scs = _load([p])
        if scs is None:
            code = EXIT_ERROR
            continue
        for sc in scs:
            print(f"ok {sc.id} ({sc.path})")
    return code


def cmd_show(args) -> int:
    scs = _load(args.corpus)
    if scs is None:
        return EXIT_ERROR
    for sc in scs:
        if sc.id == args.id:
            print(json.dumps(sc.to_json(), indent=2))
            return 0
    print(f"epilab: no scenario with id {args.id!r}", file=sys.stderr)
    return EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="epilab", description="Numerical laboratory for epi-convergence and slopes of convex functions.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run scenarios and write CSV reports")
    r.add_argument("paths", nargs="*", help="scenario files or directories (default: bundled corpus)")
    r.add_argument("--jobs", type=int, default=1, help="parallel scenarios (default 1)")
    r.add_argument("--out", default="epilab-out", help="output directory (default epilab-out)")
    r.add_argument("--tol", type=float, default=None, help="override the main tolerance of every scenario")
    r.add_argument("--emit-plots", action="store_true", help="write long-format plot CSVs (series, x, y)")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("validate", help="validate scenario files")
    v.add_argument("paths", nargs="+")
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("show", help="print a resolved scenario")
    s.add_argument("id")
    s.add_argument("--corpus", nargs="*", default=None, help="files or directories to search")
    s.set_defaults(func=cmd_show)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1 or (getattr(args, "tol", None) is not None and not args.tol > 0):
        print("epilab: --jobs must be >= 1 and --tol positive", file=sys.stderr)
        return EXIT_ERROR
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
