"""Arbitrary-precision complex linear algebra on top of mpmath.

Scalars are ``mpmath.mpf`` / ``mpmath.mpc`` and matrices are
``mpmath.matrix``.  Every kernel takes an optional ``dps`` (decimal
digits) and runs inside ``mpmath.workdps``; when ``dps`` is omitted the
ambient mpmath precision is used.

Tolerances scale with the working precision: a quantity is treated as
zero when it falls below ``10**-(dps - 10)`` relative to the data.
"""

import mpmath
from mpmath import mp

from .exceptions import NonPositiveEigenvalue, NotHermitian, SingularMatrix

DEFAULT_DPS = 60
MIN_DPS = 30
# extra digits carried internally by the solve and eigenvalue routes
GUARD_DPS = 20

__all__ = [
    "DEFAULT_DPS",
    "MIN_DPS",
    "as_matrix",
    "tolerance",
    "vector_norm",
    "frobenius_norm",
    "matvec",
    "solve_linear",
    "invert",
    "determinant",
    "charpoly",
    "polynomial_roots",
    "refine_clusters",
    "eigenvalues_hermitianlike",
]


def _dps(dps):
    return mp.dps if dps is None else int(dps)


def tolerance(dps=None):
    """Relative zero threshold ``10**-(dps-10)``."""
    return mpmath.mpf(10) ** (-(_dps(dps) - 10))


def as_matrix(A):
    """Coerce nested sequences (or an mpmath matrix) to ``mpmath.matrix``."""
    if isinstance(A, mpmath.matrix):
        return A.copy()
    rows = [list(r) for r in A]
    if not rows:
        return mpmath.matrix(0, 0)
    M = mpmath.matrix(len(rows), len(rows[0]))
    for i, row in enumerate(rows):
        if len(row) != M.cols:
            raise ValueError("ragged matrix")
        for j, x in enumerate(row):
            M[i, j] = mpmath.mpmathify(x)
    return M


def _as_vector(v):
    if isinstance(v, mpmath.matrix):
        return [v[i] for i in range(v.rows)]
    return [mpmath.mpmathify(x) for x in v]


def vector_norm(v, dps=None):
    """Euclidean length ``sqrt(sum |v_i|^2)``."""
    with mp.workdps(_dps(dps)):
        return mpmath.sqrt(mpmath.fsum(abs(x) ** 2 for x in _as_vector(v)))


def frobenius_norm(A, dps=None):
    with mp.workdps(_dps(dps)):
        A = as_matrix(A)
        return mpmath.sqrt(mpmath.fsum(abs(A[i, j]) ** 2
                                       for i in range(A.rows) for j in range(A.cols)))


def matvec(A, x, dps=None):
    with mp.workdps(_dps(dps)):
        A = as_matrix(A)
        x = _as_vector(x)
        return [mpmath.fsum(A[i, j] * x[j] for j in range(A.cols)) for i in range(A.rows)]


def _check_square(A):
    if A.rows != A.cols:
        raise ValueError(f"expected a square matrix, got {A.rows}x{A.cols}")


def _lu(A, strict, dps=None):
    """Partial-pivot LU of a copy of ``A``.  Returns (LU, perm, sign, singular).

    Pivots below ``tolerance(dps)`` times the largest entry count as zero.
    """
    n = A.rows
    LU = A.copy()
    perm = list(range(n))
    sign = 1
    scale = max((abs(LU[i, j]) for i in range(n) for j in range(n)), default=mpmath.mpf(0))
    threshold = tolerance(dps) * scale
    singular = scale == 0
    for k in range(n):
        p = max(range(k, n), key=lambda r: abs(LU[r, k]))
        pivot = abs(LU[p, k])
        if pivot <= threshold or pivot == 0:
            if strict:
                raise SingularMatrix(
                    f"pivot {mpmath.nstr(pivot, 5)} in column {k} is below "
                    f"{mpmath.nstr(threshold, 5)}")
            singular = True
            if pivot == 0:
                continue
        if p != k:
            for j in range(n):
                LU[k, j], LU[p, j] = LU[p, j], LU[k, j]
            perm[k], perm[p] = perm[p], perm[k]
            sign = -sign
        piv = LU[k, k]
        for i in range(k + 1, n):
            m = LU[i, k] / piv
            LU[i, k] = m
            if m:
                for j in range(k + 1, n):
                    LU[i, j] -= m * LU[k, j]
    return LU, perm, sign, singular


def _lu_solve(LU, perm, b):
    n = LU.rows
    y = [b[perm[i]] for i in range(n)]
    for i in range(n):
        y[i] -= mpmath.fsum(LU[i, j] * y[j] for j in range(i))
    for i in reversed(range(n)):
        y[i] = (y[i] - mpmath.fsum(LU[i, j] * y[j] for j in range(i + 1, n))) / LU[i, i]
    return y


def _needed_dps(dps, n, scale, size, target):
    """Working digits so that rounding errors of order ``eps * n * scale *
    size`` stay below ``tolerance(dps) * target``."""
    if size == 0:
        return dps + GUARD_DPS
    ratio = n * scale * size / target
    return dps + GUARD_DPS + max(0, int(mpmath.ceil(mpmath.log10(ratio))))


def _solve_at(A, rhs, dps, inner):
    with mp.workdps(inner):
        A = as_matrix(A)
        rhs = _as_vector(rhs)
        LU, perm, _, _ = _lu(A, strict=True, dps=dps)
        x = _lu_solve(LU, perm, rhs)
        r = [b - y for b, y in zip(rhs, matvec(A, x))]
        return [xi + d for xi, d in zip(x, _lu_solve(LU, perm, r))]


def solve_linear(A, rhs, dps=None):
    """Solve ``A x = rhs`` by partial-pivot elimination.

    Elimination runs with ``GUARD_DPS`` extra digits plus one step of
    iterative refinement.  If ``|A| |x|`` turns out large compared with
    ``|rhs|`` (an ill-conditioned system) it is repeated with enough extra
    digits, so ``|A x - rhs| <= tolerance(dps) * max(1, |rhs|)`` holds for the
    returned ``x``.  That ``x`` is not rounded back to ``dps``: rounding
    alone would break the bound when ``A`` is ill-conditioned.

    Raises SingularMatrix when a pivot drops below ``tolerance(dps)`` times
    the largest entry magnitude of ``A``.
    """
    dps = _dps(dps)
    inner = dps + GUARD_DPS
    with mp.workdps(inner):
        A = as_matrix(A)
        _check_square(A)
        rhs = _as_vector(rhs)
        if len(rhs) != A.rows:
            raise ValueError(f"rhs has length {len(rhs)}, expected {A.rows}")
        x = _solve_at(A, rhs, dps, inner)
        scale = max((abs(A[i, j]) for i in range(A.rows) for j in range(A.cols)),
                    default=mpmath.mpf(0))
        needed = _needed_dps(dps, A.rows, scale, max((abs(v) for v in x), default=0),
                             max(1, vector_norm(rhs)))
    if needed > inner:
        x = _solve_at(A, rhs, dps, needed)
    return x


def invert(A, dps=None):
    """Inverse with ``|A A^-1 - I| <= tolerance(dps)`` entrywise; like
    :func:`solve_linear` it adds digits for ill-conditioned ``A``."""
    dps = _dps(dps)
    inner = dps + GUARD_DPS
    with mp.workdps(inner):
        A = as_matrix(A)
        _check_square(A)
    n = A.rows
    for _ in range(2):
        with mp.workdps(inner):
            LU, perm, _, _ = _lu(A, strict=True, dps=dps)
            cols = [_lu_solve(LU, perm, [mpmath.mpf(int(i == j)) for i in range(n)])
                    for j in range(n)]
            scale = max((abs(A[i, j]) for i in range(n) for j in range(n)), default=0)
            size = max((abs(v) for col in cols for v in col), default=0)
            needed = _needed_dps(dps, n, scale, size, 1)
        if needed <= inner:
            break
        inner = needed
    inv = mpmath.matrix(n, n)
    for j, col in enumerate(cols):
        for i in range(n):
            inv[i, j] = col[i]
    return inv


def determinant(A, dps=None):
    """Determinant via LU; an exactly singular matrix returns zero."""
    with mp.workdps(_dps(dps)):
        A = as_matrix(A)
        _check_square(A)
        if A.rows == 0:
            return mpmath.mpf(1)
        LU, _, sign, _ = _lu(A, strict=False)
        det = mpmath.mpf(sign)
        for k in range(A.rows):
            det *= LU[k, k]
        return det


def _hessenberg(A):
    """Unitary (Householder) reduction to upper Hessenberg form."""
    H = A.copy()
    n = H.rows
    for k in range(n - 2):
        x = [H[i, k] for i in range(k + 1, n)]
        xnorm = mpmath.sqrt(mpmath.fsum(abs(t) ** 2 for t in x))
        if xnorm == 0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else mpmath.mpf(1)
        v = list(x)
        v[0] += phase * xnorm
        vnorm2 = mpmath.fsum(abs(t) ** 2 for t in v)
        if vnorm2 == 0:
            continue
        # H <- P H P with P = I - 2 v v* / (v* v)
        for j in range(n):
            s = mpmath.fsum(mpmath.conj(v[i]) * H[k + 1 + i, j] for i in range(len(v)))
            s = 2 * s / vnorm2
            for i in range(len(v)):
                H[k + 1 + i, j] -= v[i] * s
        for i in range(n):
            s = mpmath.fsum(H[i, k + 1 + j] * v[j] for j in range(len(v)))
            s = 2 * s / vnorm2
            for j in range(len(v)):
                H[i, k + 1 + j] -= s * mpmath.conj(v[j])
    return H


def charpoly(A, dps=None):
    """Coefficients of ``det(x I - A)``, leading coefficient first."""
    with mp.workdps(_dps(dps)):
        A = as_matrix(A)
        _check_square(A)
        H = _hessenberg(A)
        n = H.rows
        # p[m] = charpoly of the leading m x m block, coefficients low-order first
        p = [[mpmath.mpf(1)]]
        for m in range(1, n + 1):
            prev = p[m - 1]
            cur = [mpmath.mpf(0)] * (m + 1)
            for d, c in enumerate(prev):
                cur[d + 1] += c
                cur[d] -= H[m - 1, m - 1] * c
            prod = mpmath.mpf(1)
            for i in range(m - 1, 0, -1):
                prod *= H[i, i - 1]
                coef = H[i - 1, m - 1] * prod
                if coef:
                    for d, c in enumerate(p[i - 1]):
                        cur[d] -= coef * c
            p.append(cur)
        return list(reversed(p[n]))


def _horner(coeffs, z):
    p = coeffs[0]
    dp = mpmath.mpf(0)
    for c in coeffs[1:]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _derivative(coeffs):
    n = len(coeffs) - 1
    return [c * (n - i) for i, c in enumerate(coeffs[:-1])]


def polynomial_roots(coeffs, dps=None, maxiter=None):
    """All complex roots of a polynomial (coefficients leading first).

    Aberth-Ehrlich simultaneous iteration.  Simple roots converge cubically;
    a root of multiplicity m converges only to about ``eps**(1/m)``, which
    :func:`refine_clusters` repairs.
    """
    with mp.workdps(_dps(dps)):
        coeffs = [mpmath.mpmathify(c) for c in coeffs]
        while coeffs and coeffs[0] == 0:
            coeffs.pop(0)
        n = len(coeffs) - 1
        if n < 1:
            return []
        coeffs = [c / coeffs[0] for c in coeffs]
        if n == 1:
            return [-coeffs[1]]
        # start on a circle of the Fujiwara radius, off the real axis
        bound = 2 * max(abs(coeffs[k]) ** (mpmath.mpf(1) / k) for k in range(1, n + 1))
        bound = max(bound, mpmath.mpf(1))
        z = [bound * mpmath.expjpi(mpmath.mpf(2 * k) / n + mpmath.mpf(1) / (2 * n) + 0.1)
             for k in range(n)]
        eps = mpmath.ldexp(1, 4 - mp.prec)
        abs_coeffs = [abs(c) for c in coeffs]
        maxiter = maxiter or 100 + 10 * n
        done = [False] * n
        for _ in range(maxiter):
            for k in range(n):
                if done[k]:
                    continue
                p, dp = _horner(coeffs, z[k])
                # |p(z)| at the rounding-noise level of Horner's rule
                noise, _ = _horner(abs_coeffs, abs(z[k]))
                if abs(p) <= 4 * n * eps * noise:
                    done[k] = True
                    continue
                ratio = p / dp if dp != 0 else p
                # plain summation: this only steers the iteration
                repulsion = sum((1 / (z[k] - z[j]) for j in range(n)
                                 if j != k and z[j] != z[k]), mpmath.mpc(0))
                w = ratio / (1 - ratio * repulsion)
                z[k] -= w
                if abs(w) <= eps * max(abs(z[k]), 1):
                    done[k] = True
            if all(done):
                break
        return z


def refine_clusters(coeffs, roots, radius, real=False, real_cap=None):
    """Collapse groups of nearby roots onto one accurate multiple root.

    Roots closer than ``radius * max(1, |z|)`` form a group of size m; the
    group is replaced by the simple root of the (m-1)-th derivative nearest
    its centroid, found by Newton's method.

    With ``real`` set the polynomial is known to have real roots only, so a
    root with imaginary part below ``real_cap`` is a split multiple root:
    it is also grouped with anything within three times that imaginary part.
    """
    coeffs = [mpmath.mpmathify(c) for c in coeffs]
    order = sorted(range(len(roots)), key=lambda i: (mpmath.re(roots[i]), mpmath.im(roots[i])))
    parent = list(range(len(roots)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a in range(len(order)):
        for b in range(a + 1, len(order)):
            i, j = order[a], order[b]
            dist = abs(roots[i] - roots[j])
            near = radius * max(1, abs(roots[i]))
            if real:
                spread = max(abs(mpmath.im(roots[i])), abs(mpmath.im(roots[j])))
                if spread <= real_cap * max(1, abs(roots[i])):
                    near = max(near, 3 * spread)
            if dist <= near:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(len(roots)):
        groups.setdefault(find(i), []).append(i)
    out = list(roots)
    eps = mpmath.ldexp(1, 4 - mp.prec)
    for members in groups.values():
        m = len(members)
        if m == 1:
            continue
        centre = mpmath.fsum(roots[i] for i in members) / m
        reach = max(max(abs(roots[i] - centre) for i in members),
                    radius * max(1, abs(centre)))
        d = coeffs
        for _ in range(m - 1):
            d = _derivative(d)
        x = centre
        for _ in range(50):
            p, dp = _horner(d, x)
            if dp == 0:
                break
            step = p / dp
            x -= step
            if abs(step) <= eps * max(abs(x), 1):
                break
        if abs(x - centre) > reach:
            x = centre
        for i in members:
            out[i] = x
    return out


def eigenvalues_hermitianlike(D, dps=None):
    """Real eigenvalues of ``D`` via its characteristic polynomial, ascending.

    Intended for ``D = A^t conj(A)``, which is self-adjoint.  The charpoly
    and its roots are computed with ``GUARD_DPS`` extra digits; roots of a
    repeated eigenvalue (which split by about ``eps**(1/m)``) are collapsed
    by :func:`refine_clusters`.  Every root's discarded imaginary part must satisfy
    ``|Im| <= 10**-(dps/2) (1 + |root|)`` (NotHermitian otherwise) and every
    real part must be positive (NonPositiveEigenvalue otherwise).
    """
    dps = _dps(dps)
    inner = dps + GUARD_DPS
    with mp.workdps(inner):
        D = as_matrix(D)
        _check_square(D)
        n = D.rows
        if n == 0:
            return []
        coeffs = charpoly(D)
        roots = polynomial_roots(coeffs)
        roots = refine_clusters(coeffs, roots, mpmath.mpf(10) ** (-mpmath.mpf(inner) / 4),
                                real=True, real_cap=mpmath.mpf(10) ** -8)
        im_bound = mpmath.mpf(10) ** (-(mpmath.mpf(dps) / 2))
        for r in roots:
            im = mpmath.im(r)
            if abs(im) > im_bound * (1 + abs(r)):
                raise NotHermitian(
                    f"eigenvalue {mpmath.nstr(r, 15)} has imaginary part above "
                    f"{mpmath.nstr(im_bound, 3)}")
        values = sorted(mpmath.re(r) for r in roots)
        if values[0] <= 0:
            raise NonPositiveEigenvalue(
                f"smallest eigenvalue {mpmath.nstr(values[0], 15)} is not positive")
    with mp.workdps(dps):
        return [+v for v in values]
