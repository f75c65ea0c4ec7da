"""Rendering certification reports as text or as a structured document."""

import json

import mpmath
from mpmath import mp

TEXT_DIGITS = 40

STRUCTURED_FIELDS = (
    "name", "n", "k", "h", "precision", "norm_mode", "verdict", "stage", "reason",
    "selected_rows", "norm_b", "det_a", "norm_hh",
    "test1", "test1_index", "test2", "test2_index", "test3", "test3_index",
    "lipschitz_l", "norm_sup", "norm_len", "threshold_sup", "threshold_len",
    "pass_sup", "pass_len", "margin_sup", "margin_len",
)


def format_real(x, digits):
    """Decimal string with ``digits`` significant digits (no re-rounding)."""
    if x is None:
        return None
    with mp.workdps(digits + 10):
        x = mpmath.mpmathify(x)
        if mpmath.isinf(x):
            return "inf" if x > 0 else "-inf"
        return mpmath.nstr(x, digits, strip_zeros=False, min_fixed=-5, max_fixed=6)


def truncate_real(x, digits):
    """Like :func:`format_real` but chops instead of rounding, as the
    40-digit figures in the text report are meant to be read."""
    if x is None:
        return None
    with mp.workdps(digits + 20):
        x = mpmath.mpmathify(x)
        if mpmath.isinf(x) or x == 0:
            return format_real(x, digits)
        sign = "-" if x < 0 else ""
        x = abs(x)
        e = int(mpmath.floor(mpmath.log10(x)))
        m = int(mpmath.floor(x * mpmath.mpf(10) ** (digits - 1 - e)))
        # log10 can land one off at exact powers of ten
        if m >= 10 ** digits:
            e += 1
            m = int(mpmath.floor(x * mpmath.mpf(10) ** (digits - 1 - e)))
        elif m < 10 ** (digits - 1):
            e -= 1
            m = int(mpmath.floor(x * mpmath.mpf(10) ** (digits - 1 - e)))
    d = str(m)
    if -5 <= e < 6:
        if e < 0:
            return f"{sign}0.{'0' * (-e - 1)}{d}"
        return f"{sign}{d[:e + 1]}.{d[e + 1:] or '0'}"
    return f"{sign}{d[0]}.{d[1:]}e{e:+d}" if e > 0 else f"{sign}{d[0]}.{d[1:]}e{e}"


def format_complex(z, digits):
    if z is None:
        return None
    with mp.workdps(digits + 10):
        z = mpmath.mpmathify(z)
        re = format_real(mpmath.re(z), digits)
        im = format_real(mpmath.im(z), digits)
    return f"{re}{im}*I" if im.startswith("-") else f"{re}+{im}*I"


def to_dict(report, digits=None):
    """Plain mapping of a report; numerics are decimal strings.

    ``digits`` defaults to the report's working precision.
    """
    digits = report.precision if digits is None else digits
    tests = report.tests
    doc = {
        "name": report.name,
        "n": report.n,
        "k": report.k,
        "h": report.h,
        "precision": report.precision,
        "norm_mode": report.norm_mode,
        "verdict": report.verdict.value,
        "stage": report.stage,
        "reason": report.reason,
        "selected_rows": None if report.selected_rows is None else list(report.selected_rows),
        "norm_b": format_real(report.norm_b, digits),
        "det_a": format_complex(report.det_a, digits),
        "norm_hh": format_real(report.norm_hh, digits),
        "lipschitz_l": format_real(report.lipschitz_l, digits),
        "norm_sup": format_real(report.norm_sup, digits),
        "norm_len": format_real(report.norm_len, digits),
        "threshold_sup": format_real(report.threshold_sup, digits),
        "threshold_len": format_real(report.threshold_len, digits),
        "pass_sup": report.pass_sup,
        "pass_len": report.pass_len,
        "margin_sup": format_real(report.margin_sup, digits),
        "margin_len": format_real(report.margin_len, digits),
    }
    for label in ("test1", "test2", "test3"):
        outcome = None if tests is None else getattr(tests, label)
        doc[label] = None if outcome is None else outcome.passed
        doc[f"{label}_index"] = None if outcome is None else outcome.index
    return {key: doc[key] for key in STRUCTURED_FIELDS}


def emit_structured(report):
    return json.dumps(to_dict(report), indent=2) + "\n"


def load_structured(text):
    return json.loads(text)


def _line(label, value):
    return f"{label} = {value if value is not None else '-'}"


def emit_text(report, digits=TEXT_DIGITS):
    d = {key: truncate_real(getattr(report, key), digits)
         for key in ("norm_b", "lipschitz_l", "norm_sup", "norm_len",
                     "threshold_sup", "threshold_len")}
    out = [f"{report.name}: n = {report.n}, k = {report.k}, h = {report.h}, "
           f"precision = {report.precision}"]
    if report.selected_rows is not None:
        rows = ", ".join(str(r + 1) for r in report.selected_rows) or "none"
        out.append(f"consistency rows used: {rows}")
    out += [
        _line("|b|", d["norm_b"]),
        _line("L", d["lipschitz_l"]),
        _line("|f'(a)^-1|_sup", d["norm_sup"]),
        _line("|f'(a)^-1|_len", d["norm_len"]),
        _line("1/(2 |f'(a)^-1|_sup^2 L)", d["threshold_sup"]),
        _line("1/(2 |f'(a)^-1|_len^2 L)", d["threshold_len"]),
    ]
    if report.pass_sup is not None:
        out.append(f"|b| <= sup threshold: {str(report.pass_sup).lower()}")
        out.append(f"|b| <= len threshold: {str(report.pass_len).lower()}")
    verdict = report.verdict.value
    if report.reason:
        verdict += f" ({report.reason})"
    out.append(f"verdict: {verdict}")
    return "\n".join(out) + "\n"


def emit_report(report, mode="text"):
    if mode == "text":
        return emit_text(report)
    if mode == "structured":
        return emit_structured(report)
    raise ValueError(f"unknown report mode {mode!r}")
