"""Command-line entry point.

Exit status for single files: 0 certified, 2 inapplicable, 3 inequality
failed, 1 parse or I/O error.  With several files (or ``--batch``) the most
severe status wins, errors ranking highest.
"""

import argparse
import logging
import sys
import warnings
from pathlib import Path

from .census import certify_file, format_summary, run_batch, summarize, write_outputs
from .certify import Verdict
from .report import emit_report

EXIT_CODES = {
    Verdict.CERTIFIED.value: 0,
    Verdict.INAPPLICABLE.value: 2,
    Verdict.FAILED_INEQUALITY.value: 3,
    "ERROR": 1,
}
_SEVERITY = {0: 0, 2: 1, 3: 2, 1: 3}


def _precision(value):
    p = int(value)
    if p < 30:
        raise argparse.ArgumentTypeError("precision must be at least 30 digits")
    return p


def build_parser():
    p = argparse.ArgumentParser(
        prog="hypcert",
        description="Certify complete hyperbolic structures from SNAP shape data "
                    "with the Kantorovich test.")
    p.add_argument("files", nargs="*", type=Path, help="manifold files to certify")
    p.add_argument("--precision", type=_precision, default=60,
                   help="working precision in decimal digits (default: 60)")
    p.add_argument("--norm", choices=["sup", "len", "both"], default="both",
                   help="inverse-Jacobian norm(s) allowed to certify (default: both)")
    p.add_argument("--format", choices=["auto", "canonical", "transcript"], default="auto",
                   help="input layout (default: detect)")
    p.add_argument("--report", choices=["text", "structured"], default="text")
    p.add_argument("--batch", type=Path, metavar="DIR",
                   help="certify every manifold file in DIR")
    p.add_argument("--stats", action="store_true",
                   help="print maxnormb / minmaxvalue census statistics")
    p.add_argument("--out", type=Path, metavar="DIR",
                   help="write structured reports (and summary.json) to DIR")
    p.add_argument("--log", type=Path, metavar="FILE", help="append a run log to FILE")
    p.add_argument("--h", type=int, dest="unfilled", metavar="H",
                   help="number of unfilled cusps (overrides the file; transcripts need it)")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers for --batch")
    return p


def _setup_logging(path):
    if path is None:
        return
    handler = logging.FileHandler(path, encoding="utf-8")
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("hypcert")
    root.setLevel(logging.INFO)
    root.addHandler(handler)
    logging.captureWarnings(True)


def _worst(codes):
    return max(codes, key=_SEVERITY.__getitem__, default=0)


def _print_entry(entry, mode):
    if entry.report is None:
        print(f"{entry.path}: error: {entry.error}", file=sys.stderr)
    else:
        sys.stdout.write(emit_report(entry.report, mode))


def main(argv=None):
    args = build_parser().parse_args(argv)
    _setup_logging(args.log)
    if not args.files and args.batch is None:
        build_parser().print_usage(sys.stderr)
        print("hypcert: error: give manifold files or --batch DIR", file=sys.stderr)
        return 1

    codes = []
    entries = []
    with warnings.catch_warnings():
        warnings.simplefilter("default")
        for path in args.files:
            entry = certify_file(path, precision=args.precision, norm=args.norm,
                                 format=args.format, h=args.unfilled)
            _print_entry(entry, args.report)
            entries.append(entry)
            codes.append(EXIT_CODES[entry.status])

        if args.batch is not None:
            try:
                summary = run_batch(args.batch, precision=args.precision, norm=args.norm,
                                    format=args.format, jobs=max(1, args.jobs))
            except NotADirectoryError as exc:
                print(f"hypcert: error: {exc}", file=sys.stderr)
                return 1
            for entry in summary.entries:
                if entry.report is None:
                    print(f"{entry.path}: error: {entry.error}", file=sys.stderr)
                else:
                    r = entry.report
                    print(f"{r.name}: {r.verdict.value}" + (f" ({r.reason})" if r.reason else ""))
                codes.append(EXIT_CODES[entry.status])
            entries.extend(summary.entries)

    summary = summarize(entries)
    if args.out is not None:
        write_outputs(summary, args.out)
    if args.stats or args.batch is not None:
        sys.stdout.write(format_summary(summary))
    return _worst(codes)


if __name__ == "__main__":
    sys.exit(main())
