"""Reading SNAP output into a validated :class:`ManifoldProblem`.

Two input layouts are understood.

Canonical files are UTF-8 text with ``key=value`` header lines::

    name=figure8
    n=2
    k=1
    h=1
    shapes=[0.5000000000000000000000000000+0.8660254037844386467637231707*I, ...]
    fg=[1, 0, 0, 1, 0; 2, -1, -1, 2, 0; -2, 1, 1, -2, 0]

``n`` and ``k`` are optional cross-checks (they are implied by ``fg``);
``h`` is required.  A bracketed value may span several lines, and a line
ending in a backslash continues onto the next one.  Lines starting with
``#`` are comments.

Transcripts are raw SNAP sessions where the shapes follow a ``pr sh``
command and the filling equations follow ``pr fill``.  SNAP never prints
the number of unfilled cusps, so ``h`` comes from an ``h=`` line in the
transcript or from the caller.
"""

import re
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from pathlib import Path

import mpmath
from mpmath import mp

from .exceptions import (DimensionMismatch, NonGeometricShape, ParseError,
                         UnknownFormat)

__all__ = [
    "ShapeDecimal",
    "ManifoldProblem",
    "parse_shapes",
    "parse_filling",
    "assemble",
    "parse_canonical",
    "parse_transcript",
    "read_manifold_file",
    "serialize",
    "write_manifold_file",
]

_REAL = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_COMPLEX = re.compile(
    rf"""\s*(?:
        (?P<re>{_REAL})\s*(?P<sign>[-+])\s*(?P<im>(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)?\s*\*?\s*I
      | (?P<imsign>[-+])?\s*(?P<imonly>(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)?\s*\*?\s*I
      | (?P<reonly>{_REAL})
    )\s*$""",
    re.VERBOSE,
)


@dataclass(frozen=True)
class ShapeDecimal:
    """A shape parameter exactly as SNAP printed it."""

    re: str
    im: str

    def __str__(self):
        im = self.im
        if im.startswith("-"):
            return f"{self.re}{im}*I"
        return f"{self.re}+{im.lstrip('+')}*I"

    def to_mpc(self, dps=None):
        with mp.workdps(mp.dps if dps is None else dps):
            return mpmath.mpc(mpmath.mpf(self.re), mpmath.mpf(self.im))

    @property
    def digits(self):
        """Number of significant digits in the longer of the two parts."""
        return max(_sig_digits(self.re), _sig_digits(self.im))

    @classmethod
    def from_complex(cls, z, digits):
        z = mpmath.mpmathify(z)
        return cls(mpmath.nstr(mpmath.re(z), digits, strip_zeros=False),
                   mpmath.nstr(mpmath.im(z), digits, strip_zeros=False))


def _sig_digits(s):
    try:
        return len(Decimal(s).as_tuple().digits)
    except InvalidOperation:
        return 0


@dataclass(frozen=True)
class ManifoldProblem:
    """Approximate shapes plus the filling-equation matrix of one manifold.

    ``fg`` holds ``n + k`` rows of ``2n + 1`` integers: ``k - h`` surgery
    rows, ``h`` meridian completeness rows, then the ``n`` consistency rows.
    """

    name: str
    n: int
    k: int
    h: int
    shapes: tuple
    fg: tuple

    def shape_values(self, dps=None):
        return [s.to_mpc(dps) for s in self.shapes]

    @property
    def max_shape_digits(self):
        return max(s.digits for s in self.shapes)


def _strip_vector(text, what):
    body = text.strip()
    if body.endswith("~"):
        body = body[:-1].rstrip()
    if not (body.startswith("[") and body.endswith("]")):
        raise ParseError(f"{what} must be a bracketed list", offset=0)
    return body[1:-1]


def _split_with_offsets(body, sep, base):
    """Split ``body`` on ``sep``; yields (piece, absolute offset of piece)."""
    pos = 0
    for piece in body.split(sep):
        yield piece, base + pos
        pos += len(piece) + len(sep)


def _parse_complex_literal(token, offset):
    m = _COMPLEX.match(token)
    if not m or not token.strip():
        raise ParseError(f"malformed complex literal {token.strip()!r}", offset=offset)
    if m.group("re") is not None:
        im = m.group("im") or "1"
        return ShapeDecimal(m.group("re"), ("-" if m.group("sign") == "-" else "") + im)
    if m.group("reonly") is not None:
        return ShapeDecimal(m.group("reonly"), "0")
    im = m.group("imonly") or "1"
    if m.group("imsign") == "-":
        im = "-" + im
    return ShapeDecimal("0", im)


def parse_shapes(text):
    """Parse a ``pr sh`` vector (``[x+y*I, ...]`` with optional trailing ``~``)."""
    text = text.replace("\\\n", "")
    lead = len(text) - len(text.lstrip())
    body = _strip_vector(text, "shape vector")
    if not body.strip():
        raise ParseError("empty shape vector", offset=lead)
    return [_parse_complex_literal(tok, off)
            for tok, off in _split_with_offsets(body, ",", lead + 1)]


def parse_filling(text):
    """Parse a ``pr fill`` matrix ``[a, b, ...; c, d, ...]`` into integer rows."""
    text = text.replace("\\\n", "")
    lead = len(text) - len(text.lstrip())
    body = _strip_vector(text, "filling matrix")
    rows = []
    for row_text, row_off in _split_with_offsets(body, ";", lead + 1):
        row = []
        for tok, off in _split_with_offsets(row_text, ",", row_off):
            t = tok.strip()
            if not re.fullmatch(r"[-+]?\d+", t):
                raise ParseError(f"non-integer entry {t!r}", offset=off)
            row.append(int(t))
        if rows and len(row) != len(rows[0]):
            raise ParseError(
                f"ragged filling matrix: row {len(rows) + 1} has {len(row)} entries, "
                f"expected {len(rows[0])}", offset=row_off)
        rows.append(row)
    return rows


def assemble(name, shapes, fg, h):
    """Validate dimensions and geometry and build a :class:`ManifoldProblem`."""
    rows = [tuple(int(x) for x in r) for r in fg]
    if not rows:
        raise DimensionMismatch("filling matrix has no rows")
    c = len(rows[0])
    if any(len(r) != c for r in rows):
        raise DimensionMismatch("filling matrix rows differ in length")
    if c % 2 == 0 or c < 3:
        raise DimensionMismatch(f"filling matrix has {c} columns; expected 2n+1 with n >= 1")
    n = (c - 1) // 2
    if len(shapes) != n:
        raise DimensionMismatch(
            f"{len(shapes)} shapes but the filling matrix implies n = {n} tetrahedra")
    if len(rows) <= n:
        raise DimensionMismatch(
            f"filling matrix has {len(rows)} rows; expected n + k > n = {n}")
    k = len(rows) - n
    if k > n:
        raise DimensionMismatch(f"k = {k} cusps exceeds n = {n} tetrahedra")
    h = int(h)
    if not 0 <= h <= k:
        raise DimensionMismatch(f"h = {h} is outside 0..k = {k}")
    shapes = tuple(s if isinstance(s, ShapeDecimal) else ShapeDecimal(*s) for s in shapes)
    for j, s in enumerate(shapes):
        if not Decimal(s.im) > 0:
            raise NonGeometricShape(j, str(s))
    return ManifoldProblem(name=str(name), n=n, k=k, h=h, shapes=shapes, fg=tuple(rows))


def _collect_values(text):
    """Canonical header lines into a dict; bracketed values may span lines."""
    text = text.replace("\\\n", "")
    values = {}
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        line = lines[i]
        lineno = i + 1
        i += 1
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"expected key=value, got {line.strip()!r}", line=lineno)
        key, value = line.split("=", 1)
        key = key.strip()
        while value.count("[") > value.count("]") and i < len(lines):
            value += " " + lines[i]
            i += 1
        values[key] = (value.strip(), lineno)
    return values


def parse_canonical(text, name=None):
    values = _collect_values(text)
    for key in ("h", "shapes", "fg"):
        if key not in values:
            raise ParseError(f"missing required field {key!r}")

    def field(key, parser):
        value, lineno = values[key]
        try:
            return parser(value)
        except ParseError as exc:
            raise ParseError(str(exc), line=lineno) from None

    shapes = field("shapes", parse_shapes)
    fg = field("fg", parse_filling)
    h = field("h", _parse_int)
    name = values["name"][0] if "name" in values else (name or "unnamed")
    problem = assemble(name, shapes, fg, h)
    for key in ("n", "k"):
        if key in values:
            declared = field(key, _parse_int)
            if declared != getattr(problem, key):
                raise DimensionMismatch(
                    f"declared {key}={declared} but the data implies {getattr(problem, key)}")
    return problem


def _parse_int(value):
    try:
        return int(value)
    except ValueError:
        raise ParseError(f"expected an integer, got {value!r}") from None


def _bracket_after(text, start, command):
    i = text.find("[", start)
    if i < 0:
        raise ParseError(f"no bracketed block after {command!r}", offset=start)
    depth = 0
    for j in range(i, len(text)):
        if text[j] == "[":
            depth += 1
        elif text[j] == "]":
            depth -= 1
            if depth == 0:
                end = j + 1
                if text[end:end + 1] == "~":
                    end += 1
                return text[i:end]
    raise ParseError(f"unterminated block after {command!r}", offset=i)


def parse_transcript(text, name=None, h=None, default_name="unnamed"):
    """Extract the ``pr sh`` and ``pr fill`` blocks from a SNAP session."""
    text = text.replace("\\\n", "")
    sh = re.search(r"\bpr(?:int)?\s+sh(?:apes)?\b", text)
    fill = re.search(r"\bpr(?:int)?\s+fill(?:ing)?\b", text)
    if not sh or not fill:
        raise UnknownFormat("transcript lacks a 'pr sh' or 'pr fill' command")
    shapes = parse_shapes(_bracket_after(text, sh.end(), "pr sh"))
    fg = parse_filling(_bracket_after(text, fill.end(), "pr fill"))
    if h is None:
        m = re.search(r"^\s*h\s*=\s*(\d+)\s*$", text, re.MULTILINE)
        if not m:
            raise ParseError("transcript does not declare h (number of unfilled cusps)")
        h = int(m.group(1))
    if name is None:
        m = re.search(r"^\s*name\s*=\s*(\S+)\s*$", text, re.MULTILINE)
        name = m.group(1) if m else default_name
    return assemble(name, shapes, fg, h)


def _looks_canonical(text):
    return re.search(r"^\s*shapes\s*=", text, re.MULTILINE) and \
        re.search(r"^\s*fg\s*=", text, re.MULTILINE)


def read_manifold_file(path, format="auto", h=None):
    """Read a canonical file or a SNAP transcript.

    ``format`` is ``"canonical"``, ``"transcript"`` or ``"auto"``.  ``h``
    overrides the value declared in the file.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if format == "auto":
        if _looks_canonical(text):
            format = "canonical"
        elif re.search(r"\bpr\s+sh", text):
            format = "transcript"
        else:
            raise UnknownFormat(f"{path}: neither a canonical manifold file nor a SNAP transcript")
    if format == "canonical":
        problem = parse_canonical(text, name=path.stem)
        if h is not None:
            problem = assemble(problem.name, problem.shapes, problem.fg, h)
        return problem
    if format == "transcript":
        return parse_transcript(text, h=h, default_name=path.stem)
    raise UnknownFormat(f"unknown format {format!r}")


def serialize(problem):
    """Canonical text for ``problem``; shape digits are written verbatim."""
    shapes = ", ".join(str(s) for s in problem.shapes)
    fg = "; ".join(", ".join(str(x) for x in row) for row in problem.fg)
    return (f"name={problem.name}\nn={problem.n}\nk={problem.k}\nh={problem.h}\n"
            f"shapes=[{shapes}]\nfg=[{fg}]\n")


def write_manifold_file(problem, path):
    Path(path).write_text(serialize(problem), encoding="utf-8")
