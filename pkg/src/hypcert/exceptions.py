"""Exception hierarchy.

Every error raised by the library derives from :class:`HypcertError`, so
callers (the CLI, the batch runner) can catch one type and still report
the precise stage that failed.
"""


class HypcertError(Exception):
    """Base class for all library errors."""


# linear algebra

class SingularMatrix(HypcertError):
    pass


class NotHermitian(HypcertError):
    pass


class NonPositiveEigenvalue(HypcertError):
    pass


# ingest

class ParseError(HypcertError):
    def __init__(self, message, offset=None, line=None):
        self.offset = offset
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"offset {offset}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class UnknownFormat(ParseError):
    pass


class DimensionMismatch(HypcertError):
    pass


class NonGeometricShape(HypcertError):
    def __init__(self, index, shape=None):
        self.index = index
        msg = f"shape {index} is not in the open upper half plane"
        if shape is not None:
            msg += f": {shape}"
        super().__init__(msg)


# system assembly

class RankDeficient(HypcertError):
    pass


class NotCoprime(HypcertError):
    pass


# certification

class BranchCutProximity(HypcertError):
    pass


class SingularJacobian(HypcertError):
    pass


class PrereqTestFailed(HypcertError):
    pass
