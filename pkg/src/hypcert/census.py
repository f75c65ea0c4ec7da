"""Batch certification and census statistics."""

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import mpmath

from .certify import Verdict, certify
from .exceptions import HypcertError
from .report import emit_structured, format_real
from .snap import read_manifold_file

logger = logging.getLogger(__name__)

SKIP_SUFFIXES = {".json", ".log", ".md"}


@dataclass
class BatchEntry:
    path: str
    name: str
    status: str  # a Verdict value or "ERROR"
    report: object = None
    error: str = None


@dataclass
class CensusSummary:
    """Aggregate over a batch.

    ``maxnormb`` is the largest ``|b|`` among certified manifolds and
    ``minmaxvalue`` the smallest, over every manifold that reached the
    inequality, of the larger of its two thresholds.  When
    ``maxnormb < minmaxvalue`` every certified manifold clears every
    manifold's bound.
    """

    total: int = 0
    certified: int = 0
    inapplicable: int = 0
    failed_inequality: int = 0
    errors: int = 0
    maxnormb: object = None
    minmaxvalue: object = None
    entries: list = field(default_factory=list)

    @property
    def census_argument_holds(self):
        return (self.maxnormb is not None and self.minmaxvalue is not None
                and self.maxnormb < self.minmaxvalue)

    def to_dict(self, digits=None):
        def fmt(x, precision):
            return format_real(x, digits or precision)

        manifolds = []
        for e in self.entries:
            r = e.report
            p = r.precision if r is not None else 60
            manifolds.append({
                "file": e.path,
                "name": e.name,
                "verdict": e.status,
                "reason": e.error if r is None else r.reason,
                "norm_b": None if r is None else fmt(r.norm_b, p),
                "max_threshold": None if r is None else fmt(r.max_threshold, p),
            })
        precision = max((e.report.precision for e in self.entries if e.report), default=60)
        return {
            "total": self.total,
            "certified": self.certified,
            "inapplicable": self.inapplicable,
            "failed_inequality": self.failed_inequality,
            "errors": self.errors,
            "maxnormb": fmt(self.maxnormb, precision),
            "minmaxvalue": fmt(self.minmaxvalue, precision),
            "census_argument_holds": self.census_argument_holds,
            "manifolds": manifolds,
        }


def summarize(entries):
    s = CensusSummary(entries=list(entries))
    s.total = len(s.entries)
    for e in s.entries:
        if e.status == "ERROR":
            s.errors += 1
            continue
        r = e.report
        if r.verdict is Verdict.CERTIFIED:
            s.certified += 1
            if s.maxnormb is None or r.norm_b > s.maxnormb:
                s.maxnormb = r.norm_b
        elif r.verdict is Verdict.INAPPLICABLE:
            s.inapplicable += 1
        else:
            s.failed_inequality += 1
        top = r.max_threshold
        if top is not None and (s.minmaxvalue is None or top < s.minmaxvalue):
            s.minmaxvalue = top
    return s


def list_inputs(directory):
    directory = Path(directory)
    if not directory.is_dir():
        raise NotADirectoryError(f"{directory} is not a directory")
    return sorted(p for p in directory.iterdir()
                  if p.is_file() and not p.name.startswith(".") and p.suffix not in SKIP_SUFFIXES)


def certify_file(path, precision=60, norm="both", format="auto", h=None):
    """Certify one file; parse and I/O problems become an ERROR entry."""
    path = Path(path)
    try:
        problem = read_manifold_file(path, format=format, h=h)
    except (HypcertError, OSError, UnicodeDecodeError) as exc:
        logger.warning("%s: %s", path, exc)
        return BatchEntry(path=str(path), name=path.stem, status="ERROR",
                          error=f"{type(exc).__name__}: {exc}")
    report = certify(problem, precision=precision, norm=norm)
    return BatchEntry(path=str(path), name=problem.name, status=report.verdict.value,
                      report=report)


def _certify_star(args):
    return certify_file(*args)


def run_batch(directory, precision=60, norm="both", format="auto", out=None, jobs=1):
    """Certify every manifold file in ``directory``.

    Failures are recorded per file and never abort the batch.  With ``out``
    set, one structured report per manifold plus ``summary.json`` are
    written there.
    """
    paths = list_inputs(directory)
    tasks = [(p, precision, norm, format, None) for p in paths]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(_certify_star, tasks))
    else:
        entries = [_certify_star(t) for t in tasks]
    summary = summarize(entries)
    if out is not None:
        write_outputs(summary, out)
    return summary


def write_outputs(summary, out):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    for e in summary.entries:
        if e.report is not None:
            (out / f"{Path(e.path).stem}.json").write_text(emit_structured(e.report))
    (out / "summary.json").write_text(json.dumps(summary.to_dict(), indent=2) + "\n")


def format_summary(summary, digits=40):
    d = summary.to_dict(digits=digits)
    lines = [
        f"total = {d['total']}",
        f"certified = {d['certified']}",
        f"inapplicable = {d['inapplicable']}",
        f"failed_inequality = {d['failed_inequality']}",
        f"errors = {d['errors']}",
        f"maxnormb = {d['maxnormb'] or '-'}",
        f"minmaxvalue = {d['minmaxvalue'] or '-'}",
        f"maxnormb < minmaxvalue: {str(d['census_argument_holds']).lower()}",
    ]
    return "\n".join(lines) + "\n"


def recompute_from_reports(docs, dps=100):
    """``(maxnormb, minmaxvalue)`` from structured per-manifold reports."""
    with mpmath.workdps(dps):
        return _recompute(docs)


def _recompute(docs):
    certified = [mpmath.mpf(d["norm_b"]) for d in docs if d["verdict"] == "CERTIFIED"]
    tops = [max(mpmath.mpf(d["threshold_sup"]), mpmath.mpf(d["threshold_len"]))
            for d in docs if d.get("threshold_sup") is not None]
    return (max(certified) if certified else None, min(tops) if tops else None)
