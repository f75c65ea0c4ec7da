"""Kantorovich certification of an approximate hyperbolic structure.

Given shapes ``a`` and a selected system of ``n`` log-form equations

    f_i(z) = sum_j t'_ij Log z_j + t''_ij Log(1 - z_j) + t'''_i * pi * i

the pipeline evaluates ``b = f(a)`` and the Jacobian ``A = f'(a)``, takes one
Newton step ``hh = -A^-1 b``, checks that the ball of radius ``|hh|`` about
``a + hh`` stays in the upper half plane and away from the poles of the
second derivatives, bounds the Lipschitz ratio ``L`` of ``f'`` on that ball,
and finally checks

    |b| <= 1 / (2 L |A^-1|^2)

once with the operator 2-norm and once with the Frobenius norm of ``A^-1``.
Either inequality proves that a genuine solution exists near ``a``.  A
failed inequality is inconclusive; it never shows the manifold is not
hyperbolic.

The constant column is added with its stored sign, which matches SNAP's
convention for ``pr fill`` output.
"""

import enum
import logging
import time
import warnings
from dataclasses import dataclass, field

import mpmath
from mpmath import mp

from . import linalg
from .exceptions import (BranchCutProximity, HypcertError, PrereqTestFailed,
                         SingularJacobian, SingularMatrix)
from .system import build_system

logger = logging.getLogger(__name__)

__all__ = [
    "Verdict",
    "Residual",
    "NewtonStep",
    "TestOutcome",
    "ApplicabilityTests",
    "CertificationReport",
    "evaluate_residual",
    "jacobian",
    "newton_step",
    "applicability_tests",
    "lipschitz_ratio",
    "inverse_norms",
    "certify",
]

NORM_MODES = ("sup", "len", "both")
LARGE_SYSTEM = 40
LARGE_SYSTEM_DPS = 80


class Verdict(str, enum.Enum):
    CERTIFIED = "CERTIFIED"
    INAPPLICABLE = "INAPPLICABLE"
    FAILED_INEQUALITY = "FAILED_INEQUALITY"


@dataclass(frozen=True)
class Residual:
    b: tuple
    norm_b: object


@dataclass(frozen=True)
class NewtonStep:
    hh: tuple
    norm_hh: object
    a_tilde: tuple


@dataclass(frozen=True)
class TestOutcome:
    passed: bool
    index: int = None  # first failing coordinate, 0-based

    def __bool__(self):
        return self.passed


@dataclass(frozen=True)
class ApplicabilityTests:
    test1: TestOutcome
    test2: TestOutcome
    test3: TestOutcome

    @property
    def all_passed(self):
        return bool(self.test1 and self.test2 and self.test3)

    def first_failure(self):
        for label in ("test1", "test2", "test3"):
            outcome = getattr(self, label)
            if not outcome:
                return label, outcome.index
        return None


@dataclass
class CertificationReport:
    """Every intermediate quantity of one certification run.

    Numeric fields are mpmath values at the run's precision, or ``None``
    when the pipeline stopped before computing them.
    """

    name: str
    n: int
    k: int
    h: int
    precision: int
    norm_mode: str = "both"
    verdict: Verdict = Verdict.INAPPLICABLE
    reason: str = None
    stage: str = None
    selected_rows: tuple = None
    residual: Residual = None
    det_a: object = None
    newton: NewtonStep = None
    step_residual: object = None
    tests: ApplicabilityTests = None
    lipschitz_l: object = None
    norm_sup: object = None
    norm_len: object = None
    threshold_sup: object = None
    threshold_len: object = None
    pass_sup: bool = None
    pass_len: bool = None
    margin_sup: object = None
    margin_len: object = None
    elapsed: float = field(default=None, compare=False)

    @property
    def norm_b(self):
        return None if self.residual is None else self.residual.norm_b

    @property
    def norm_hh(self):
        return None if self.newton is None else self.newton.norm_hh

    @property
    def certified(self):
        return self.verdict is Verdict.CERTIFIED

    @property
    def max_threshold(self):
        """The larger of the two comparison values (``None`` if not reached)."""
        values = [t for t in (self.threshold_sup, self.threshold_len) if t is not None]
        return max(values) if values else None


def _check_shapes(a):
    tol = linalg.tolerance()
    for j, z in enumerate(a):
        if abs(z) < tol or abs(1 - z) < tol:
            raise BranchCutProximity(f"shape {j} is within {mpmath.nstr(tol, 3)} of 0 or 1")
        if not mpmath.im(z) > 0:
            raise BranchCutProximity(f"shape {j} is not in the upper half plane")


def evaluate_residual(system, a):
    """``b = f(a)`` with principal-branch logarithms, and its length."""
    a = [mpmath.mpmathify(z) for z in a]
    _check_shapes(a)
    n = system.n
    log_a = [mpmath.log(z) for z in a]
    log_1ma = [mpmath.log(1 - z) for z in a]
    ipi = mpmath.mpc(0, mpmath.pi)
    b = []
    for i in range(n):
        row = system.t[i]
        terms = [row[j] * log_a[j] for j in range(n) if row[j]]
        terms += [row[n + j] * log_1ma[j] for j in range(n) if row[n + j]]
        if row[2 * n]:
            terms.append(row[2 * n] * ipi)
        b.append(mpmath.fsum(terms) if terms else mpmath.mpc(0))
    return Residual(b=tuple(b), norm_b=linalg.vector_norm(b, dps=mp.dps))


def jacobian(system, a):
    """``A[i][j] = t'_ij / a_j - t''_ij / (1 - a_j)``."""
    a = [mpmath.mpmathify(z) for z in a]
    _check_shapes(a)
    n = system.n
    A = mpmath.matrix(n, n)
    for i in range(n):
        row = system.t[i]
        for j in range(n):
            A[i, j] = row[j] / a[j] - row[n + j] / (1 - a[j])
    return A


def newton_step(A, residual, a):
    """Solve ``A hh = -b``; return ``hh``, ``|hh|`` and ``a + hh``."""
    try:
        hh = linalg.solve_linear(A, [-x for x in residual.b])
    except SingularMatrix as exc:
        raise SingularJacobian(str(exc)) from None
    a_tilde = tuple(mpmath.mpmathify(z) + d for z, d in zip(a, hh))
    return NewtonStep(hh=tuple(hh), norm_hh=linalg.vector_norm(hh), a_tilde=a_tilde)


def applicability_tests(a, step):
    """Three strict coordinatewise conditions on the Newton ball:

    1. ``Im(a~_j) > |hh|``, so the ball stays in the upper half plane;
    2. ``|hh| < |a_j| / 2``;
    3. ``|hh| < |1 - a_j| / 2``, so the second-partial bounds are finite.
    """
    r = step.norm_hh

    def first_failure(ok):
        return next((j for j, good in enumerate(ok) if not good), None)

    ok1 = [mpmath.im(t) > r for t in step.a_tilde]
    ok2 = [r < abs(z) / 2 for z in a]
    ok3 = [r < abs(1 - z) / 2 for z in a]
    outcomes = []
    for ok in (ok1, ok2, ok3):
        j = first_failure(ok)
        outcomes.append(TestOutcome(passed=j is None, index=j))
    return ApplicabilityTests(*outcomes)


def second_partial_bounds(system, a, norm_hh):
    """``c[i][j]`` bounding ``|d^2 f_i / dz_j^2|`` on the Newton ball.

    Mixed partials vanish identically since each term depends on one
    variable only.
    """
    n = system.n
    d1 = [abs(z) - 2 * norm_hh for z in a]
    d2 = [abs(1 - z) - 2 * norm_hh for z in a]
    for j in range(n):
        if d1[j] <= 0 or d2[j] <= 0:
            raise PrereqTestFailed(
                f"|a_{j}| or |1 - a_{j}| is not larger than 2|hh|; run the applicability tests first")
    c = []
    for i in range(n):
        row = system.t[i]
        c.append([abs(row[j]) / d1[j] ** 2 + abs(row[n + j]) / d2[j] ** 2 for j in range(n)])
    return c


def lipschitz_ratio(system, a, norm_hh):
    """``L = sqrt(sum_ij c_ijj^2)``."""
    a = [mpmath.mpmathify(z) for z in a]
    c = second_partial_bounds(system, a, norm_hh)
    return mpmath.sqrt(mpmath.fsum(x ** 2 for row in c for x in row))


def inverse_norms(A):
    """Operator 2-norm and Frobenius norm of ``A^-1``.

    The 2-norm is ``1/sqrt(smallest eigenvalue of A^t conj(A))``.
    """
    D = A.T * A.conjugate()
    eig = linalg.eigenvalues_hermitianlike(D)
    norm_sup = 1 / mpmath.sqrt(eig[0])
    norm_len = linalg.frobenius_norm(linalg.invert(A))
    return norm_sup, norm_len


def _threshold(norm, L):
    return 1 / (2 * norm ** 2 * L)


def _margin(threshold, norm_b):
    return mpmath.inf if norm_b == 0 else threshold / norm_b


def certify(problem, precision=linalg.DEFAULT_DPS, norm="both", shapes=None):
    """Run the whole pipeline on ``problem`` at ``precision`` decimal digits.

    ``shapes`` optionally replaces the problem's decimal shapes by complex
    values (used for exact-solution checks).  Library errors raised along
    the way become an ``INAPPLICABLE`` verdict that names the stage.
    """
    precision = int(precision)
    if precision < linalg.MIN_DPS:
        raise ValueError(f"precision must be at least {linalg.MIN_DPS} digits")
    if norm not in NORM_MODES:
        raise ValueError(f"norm must be one of {NORM_MODES}")
    if problem.n > LARGE_SYSTEM and precision < LARGE_SYSTEM_DPS:
        warnings.warn(f"{problem.name}: n = {problem.n} tetrahedra; "
                      f"consider precision >= {LARGE_SYSTEM_DPS}", stacklevel=2)

    report = CertificationReport(name=problem.name, n=problem.n, k=problem.k,
                                 h=problem.h, precision=precision, norm_mode=norm)
    start = time.perf_counter()
    with mp.workdps(precision):
        stage = "rank selection"
        try:
            system = build_system(problem)
            report.selected_rows = system.selected_consistency_indices
            a = problem.shape_values() if shapes is None else [mpmath.mpmathify(z) for z in shapes]

            stage = "residual"
            report.residual = evaluate_residual(system, a)
            A = jacobian(system, a)

            stage = "determinant"
            report.det_a = linalg.determinant(A)

            stage = "newton step"
            report.newton = newton_step(A, report.residual, a)
            r = linalg.matvec(A, report.newton.hh)
            report.step_residual = linalg.vector_norm(
                [x + y for x, y in zip(r, report.residual.b)])
            bound = linalg.tolerance() * max(1, report.residual.norm_b)
            if report.step_residual > bound:
                raise SingularJacobian("Newton step does not solve the linear system to tolerance")

            stage = "applicability tests"
            report.tests = applicability_tests(a, report.newton)
            failure = report.tests.first_failure()
            if failure is not None:
                label, j = failure
                report.verdict = Verdict.INAPPLICABLE
                report.stage = stage
                report.reason = f"{label} failure at atilde[{j + 1}]"
                return _finish(report, start)

            stage = "lipschitz ratio"
            L = lipschitz_ratio(system, a, report.newton.norm_hh)
            report.lipschitz_l = L

            stage = "inverse norms"
            report.norm_sup, report.norm_len = inverse_norms(A)
        except HypcertError as exc:
            report.verdict = Verdict.INAPPLICABLE
            report.stage = stage
            report.reason = f"{type(exc).__name__}: {exc}"
            return _finish(report, start)

        norm_b = report.residual.norm_b
        report.threshold_sup = _threshold(report.norm_sup, L)
        report.threshold_len = _threshold(report.norm_len, L)
        report.pass_sup = bool(norm_b <= report.threshold_sup)
        report.pass_len = bool(norm_b <= report.threshold_len)
        report.margin_sup = _margin(report.threshold_sup, norm_b)
        report.margin_len = _margin(report.threshold_len, norm_b)
        passed = {"sup": report.pass_sup, "len": report.pass_len,
                  "both": report.pass_sup or report.pass_len}[norm]
        report.stage = "inequality"
        if passed:
            report.verdict = Verdict.CERTIFIED
        else:
            report.verdict = Verdict.FAILED_INEQUALITY
            report.reason = "Kantorovich inequality does not hold (inconclusive)"
    return _finish(report, start)


def _finish(report, start):
    report.elapsed = time.perf_counter() - start
    logger.info("%s: %s%s (%.3fs)", report.name, report.verdict.value,
                f" [{report.reason}]" if report.reason else "", report.elapsed)
    return report
