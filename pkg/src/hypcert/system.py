"""Choosing an independent square system from the filling equations.

Integer matrices are plain tuples of integer tuples.  Ranks are exact:
fraction-free (Bareiss) elimination over Python's unbounded integers.
"""

from dataclasses import dataclass
from math import gcd

from .exceptions import NotCoprime, RankDeficient

__all__ = [
    "SelectedSystem",
    "split_blocks",
    "exact_rank",
    "select_rows",
    "build_system",
    "combine_surgery",
]


@dataclass(frozen=True)
class SelectedSystem:
    """The ``n x (2n+1)`` coefficient matrix of the equations to certify.

    Row ``i`` is ``(t'_i1..t'_in, t''_i1..t''_in, t'''_i)``: the coefficients
    of ``Log z_j``, of ``Log(1 - z_j)`` and of ``pi*i``.  The first ``k`` rows
    are the cusp rows of the filling matrix; the remaining rows are the
    consistency rows listed (0-based, into the consistency block) in
    ``selected_consistency_indices``.
    """

    t: tuple
    selected_consistency_indices: tuple
    n: int
    k: int
    h: int

    def log_coefficients(self, i):
        return self.t[i][:self.n]

    def log1m_coefficients(self, i):
        return self.t[i][self.n:2 * self.n]

    def constant(self, i):
        return self.t[i][2 * self.n]


def split_blocks(problem):
    """Return ``(F, G, H, K)``: cusp rows, consistency rows, and both without
    the constant column."""
    n, k = problem.n, problem.k
    F = tuple(tuple(r) for r in problem.fg[:k])
    G = tuple(tuple(r) for r in problem.fg[k:])
    H = tuple(r[:2 * n] for r in F)
    K = tuple(r[:2 * n] for r in G)
    return F, G, H, K


def exact_rank(m):
    """Rank over the rationals by Bareiss fraction-free elimination."""
    rows = [list(map(int, r)) for r in m]
    if not rows or not rows[0]:
        return 0
    nrows, ncols = len(rows), len(rows[0])
    rank = 0
    prev = 1
    for col in range(ncols):
        if rank == nrows:
            break
        pivot = next((r for r in range(rank, nrows) if rows[r][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        p = rows[rank][col]
        for r in range(rank + 1, nrows):
            a = rows[r][col]
            row_r = rows[r]
            row_p = rows[rank]
            # exact division is guaranteed by Sylvester's identity
            for c in range(col + 1, ncols):
                row_r[c] = (p * row_r[c] - a * row_p[c]) // prev
            row_r[col] = 0
        prev = p
        rank += 1
    return rank


def select_rows(F, H, G, K):
    """Append consistency rows to the cusp rows until the system has rank n.

    Rows of ``G`` are scanned in stored order and one is taken only when it
    raises the rank both with and without the constant column.  The scan
    stops as soon as the ``2n``-column block reaches rank ``n``.
    """
    k = len(F)
    n = len(G) if G else (len(F[0]) - 1) // 2
    F = [tuple(r) for r in F]
    H = [tuple(r) for r in H]
    rank_f, rank_h = exact_rank(F), exact_rank(H)
    if rank_h != k:
        raise RankDeficient(
            f"the {k} cusp equations have rank {rank_h} without the constant column; "
            f"expected {k}")
    if k and rank_f != k:
        raise RankDeficient(f"the {k} cusp equations have rank {rank_f}; expected {k}")
    chosen = []
    for r in range(len(G)):
        if rank_h == n:
            break
        new_f = exact_rank(F + [tuple(G[r])])
        new_h = exact_rank(H + [tuple(K[r])])
        if new_f > rank_f and new_h > rank_h:
            F.append(tuple(G[r]))
            H.append(tuple(K[r]))
            rank_f, rank_h = new_f, new_h
            chosen.append(r)
    if rank_h != n or rank_f != n or len(F) != n:
        raise RankDeficient(
            f"consistency rows only raise the rank to {rank_h} of the required {n}")
    return tuple(F), tuple(chosen)


def build_system(problem):
    """Split ``problem`` and select an independent set of ``n`` equations."""
    F, G, H, K = split_blocks(problem)
    t, chosen = select_rows(F, H, G, K)
    return SelectedSystem(t=t, selected_consistency_indices=chosen,
                          n=problem.n, k=problem.k, h=problem.h)


def combine_surgery(meridian_row, longitude_row, p, q, check_coprime=True):
    """Coefficient row of the ``(p, q)`` surgery equation ``p*m + q*l``.

    The constant column is combined the same way; SNAP's own normalisation
    of that entry is taken as given.
    """
    if len(meridian_row) != len(longitude_row):
        raise ValueError("meridian and longitude rows differ in length")
    p, q = int(p), int(q)
    if check_coprime and (gcd(p, q) != 1):
        raise NotCoprime(f"({p}, {q}) is not a coprime pair")
    return tuple(p * int(m) + q * int(l) for m, l in zip(meridian_row, longitude_row))
