"""Command line entry point: ``treeck analyze <file.tk> ...``."""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .report import EXIT_PARSE, AnalyzeOptions, analyze, emit


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treeck",
                                     description="K-theory of boundary algebras of tree lattices")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("analyze", help="run the full pipeline on one or more .tk files")
    p.add_argument("files", nargs="+", type=Path, metavar="file.tk")
    p.add_argument("--json", action="store_true", help="emit JSON instead of text")
    p.add_argument("--emit-matrix", action="store_true",
                   help="include the transition matrix and letter legend")
    p.add_argument("--emit-ball", type=int, metavar="R",
                   help="include the ball of radius R around the first fundamental vertex")
    p.add_argument("--k", type=int, metavar="N", help="rerun at k = N as a robustness check")
    p.add_argument("--tree-model", choices=("edge", "star"))
    p.add_argument("--max-l1-check", type=int, default=3, metavar="M",
                   help="compare orbit and word counts for m = 0..M (default 3)")
    p.add_argument("--no-timings", action="store_true",
                   help="omit the timings field from JSON output")
    p.add_argument("--jobs", type=int, default=1, help="analyze files concurrently")
    return parser


def _run_one(path: Path, opts: AnalyzeOptions):
    try:
        return analyze(path, opts), None
    except OSError as exc:
        return None, f"treeck: cannot read {path}: {exc.strerror}\n"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    opts = AnalyzeOptions(emit_matrix=args.emit_matrix, emit_ball=args.emit_ball, k=args.k,
                          tree_model=args.tree_model, max_l1_check=args.max_l1_check)
    fmt = "json" if args.json else "text"
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = list(pool.map(lambda f: _run_one(f, opts), args.files))
    code = 0
    for report, err in results:
        if err:
            sys.stderr.write(err)
            code = max(code, EXIT_PARSE)
            continue
        sys.stdout.buffer.write(emit(report, fmt, include_timings=not args.no_timings))
        code = max(code, report.exit_code)
    sys.stdout.flush()
    return code


if __name__ == "__main__":
    sys.exit(main())
