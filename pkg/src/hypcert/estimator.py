"""scikit-learn style front end.

``KantorovichCertifier`` follows the estimator conventions (constructor
parameters only, ``get_params``/``set_params`` from ``BaseEstimator``,
fitted attributes with a trailing underscore) so it can be cloned, grid
searched over precision, or dropped into tooling that expects that API.
"""

from os import PathLike
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .certify import NORM_MODES, certify
from .linalg import MIN_DPS
from .snap import ManifoldProblem, parse_canonical, read_manifold_file

__all__ = ["KantorovichCertifier", "check_manifold", "check_precision"]


def check_precision(precision):
    if isinstance(precision, bool) or int(precision) != precision:
        raise ValueError(f"precision must be an integer, got {precision!r}")
    precision = int(precision)
    if precision < MIN_DPS:
        raise ValueError(f"precision must be at least {MIN_DPS} digits, got {precision}")
    return precision


def check_manifold(X, format="auto", h=None):
    """Coerce ``X`` to a :class:`ManifoldProblem`.

    Accepts a problem, a path to a manifold file, or canonical text.
    """
    if isinstance(X, ManifoldProblem):
        return X
    if isinstance(X, (str, PathLike)):
        if isinstance(X, str) and "shapes=" in X and "\n" in X:
            return parse_canonical(X)
        path = Path(X)
        if path.is_file():
            return read_manifold_file(path, format=format, h=h)
        raise FileNotFoundError(f"no manifold file at {path}")
    raise TypeError(f"cannot interpret {type(X).__name__} as a manifold")


def _check_many(X, format, h):
    if isinstance(X, (ManifoldProblem, str, PathLike)):
        X = [X]
    return [check_manifold(x, format=format, h=h) for x in X]


class KantorovichCertifier(BaseEstimator):
    """Certify complete hyperbolicity from an approximate SNAP solution.

    Parameters
    ----------
    precision : int, default=60
        Working precision in decimal digits.
    norm : {"sup", "len", "both"}, default="both"
        Which inverse-Jacobian norm may certify.  With ``"both"`` either
        inequality suffices.
    format : {"auto", "canonical", "transcript"}, default="auto"
        How manifold files are read.

    Attributes
    ----------
    report_ : CertificationReport
    verdict_ : str
    selected_rows_ : tuple of int
    lipschitz_ : mpmath.mpf or None
    thresholds_ : dict
    """

    def __init__(self, precision=60, norm="both", format="auto"):
        self.precision = precision
        self.norm = norm
        self.format = format

    def _validate_params(self):
        check_precision(self.precision)
        if self.norm not in NORM_MODES:
            raise ValueError(f"norm must be one of {NORM_MODES}, got {self.norm!r}")
        if self.format not in ("auto", "canonical", "transcript"):
            raise ValueError(f"unknown format {self.format!r}")

    def fit(self, X, y=None):
        self._validate_params()
        problem = check_manifold(X, format=self.format)
        report = certify(problem, precision=check_precision(self.precision), norm=self.norm)
        self.report_ = report
        self.verdict_ = report.verdict.value
        self.selected_rows_ = report.selected_rows
        self.lipschitz_ = report.lipschitz_l
        self.thresholds_ = {"sup": report.threshold_sup, "len": report.threshold_len}
        return self

    def predict(self, X):
        """Verdict strings for one or more manifolds."""
        self._validate_params()
        problems = _check_many(X, self.format, None)
        precision = check_precision(self.precision)
        return np.array([certify(p, precision=precision, norm=self.norm).verdict.value
                         for p in problems], dtype=object)

    def fit_predict(self, X, y=None):
        return np.array([self.fit(X).verdict_], dtype=object)

    def score(self, X, y=None):
        """Fraction of ``X`` that certifies."""
        verdicts = self.predict(X)
        return float(np.mean(verdicts == "CERTIFIED")) if len(verdicts) else 0.0

    @property
    def certified_(self):
        check_is_fitted(self, "report_")
        return self.report_.certified
