"""Exact rank machinery and the dense float solver.

Rank claims here are discrete (full rank of 0/1 measurement matrices), so
they must not depend on a float threshold.  Two routes are provided:

* ``rank_bareiss``: fraction-free integer elimination, exact at any size but
  slow for large matrices because intermediate entries are minors.
* modular ranks over fixed word-size primes.  A rank-r certificate mod any
  prime proves rank >= r over the rationals, so "full rank" conclusions are
  exact.  Deficiency conclusions are taken only when every tracked prime
  agrees (a wrong call would need a nonzero minor divisible by all of them).

``exact_rank`` picks the route by size; the greedy independence filter uses
``RankTracker`` which runs two primes in parallel.
"""

from __future__ import annotations

import numpy as np

from .errors import SingularMatrix

# Primes just below 2**27: a single matvec may accumulate up to 512 products
# of residues in int64 without overflow.
PRIMES = (134217689, 134217649, 134217593)

_BAREISS_LIMIT = 24


def rank_bareiss(matrix) -> int:
    """Rank over the rationals by fraction-free (Bareiss) elimination."""
    m = [[int(x) for x in row] for row in matrix]
    if not m:
        return 0
    nrows, ncols = len(m), len(m[0])
    rank = 0
    prev = 1
    for col in range(ncols):
        piv = next((i for i in range(rank, nrows) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        lead = m[rank][col]
        for i in range(rank + 1, nrows):
            fi = m[i][col]
            row_i, row_r = m[i], m[rank]
            for j in range(col, ncols):
                row_i[j] = (lead * row_i[j] - fi * row_r[j]) // prev
        prev = lead
        rank += 1
        if rank == nrows:
            break
    return rank


class ModBasis:
    """Incremental reduced row basis over GF(p), rows as int64 arrays."""

    def __init__(self, ncols: int, p: int):
        self.p = p
        self.ncols = ncols
        self.rows = np.zeros((0, ncols), dtype=np.int64)
        self.pivots: list[int] = []
        # products of <=chunk residues fit in int64
        self._chunk = max(1, (2**62) // ((p - 1) * (p - 1)))

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def _reduce(self, row: np.ndarray) -> np.ndarray:
        r = np.mod(row, self.p)
        if self.pivots:
            coeffs = r[self.pivots]
            if coeffs.any():
                acc = np.zeros(self.ncols, dtype=np.int64)
                for i in range(0, len(coeffs), self._chunk):
                    acc = (acc + coeffs[i : i + self._chunk] @ self.rows[i : i + self._chunk]) % self.p
                r = (r - acc) % self.p
        return r

    def would_grow(self, row: np.ndarray) -> bool:
        return bool(self._reduce(row).any())

    def add(self, row: np.ndarray) -> bool:
        """Insert a row; True iff it was independent of the basis."""
        r = self._reduce(row)
        nz = np.flatnonzero(r)
        if nz.size == 0:
            return False
        col = int(nz[0])
        inv = pow(int(r[col]), self.p - 2, self.p)
        r = (r * inv) % self.p
        if self.pivots:
            # keep existing rows reduced at the new pivot column
            col_vals = self.rows[:, col].copy()
            if col_vals.any():
                self.rows = (self.rows - np.outer(col_vals, r)) % self.p
        self.rows = np.vstack([self.rows, r[None, :]])
        self.pivots.append(col)
        return True


class RankTracker:
    """Greedy exact-rank tracker over the rationals via parallel primes."""

    def __init__(self, ncols: int, primes=PRIMES[:2]):
        self.bases = [ModBasis(ncols, p) for p in primes]

    @property
    def rank(self) -> int:
        return max(b.rank for b in self.bases)

    def add(self, row) -> bool:
        row = np.asarray(row, dtype=np.int64)
        grew = False
        for basis in self.bases:
            if basis.add(row):
                grew = True
        return grew


def rank_mod(matrix, p: int) -> int:
    mat = np.asarray(matrix, dtype=np.int64)
    if mat.size == 0:
        return 0
    basis = ModBasis(mat.shape[1], p)
    for row in mat:
        basis.add(row)
    return basis.rank


def exact_rank(matrix) -> int:
    """Rank over the rationals.

    Small matrices go through Bareiss.  Larger ones use modular ranks: a
    full-rank answer from any prime is certified exact; otherwise the
    maximum over the prime ladder is returned (exact unless a nonzero
    maximal minor is divisible by every listed prime).
    """
    mat = np.asarray(matrix, dtype=np.int64)
    if mat.size == 0:
        return 0
    nrows, ncols = mat.shape
    if max(nrows, ncols) <= _BAREISS_LIMIT:
        return rank_bareiss(mat.tolist())
    full = min(nrows, ncols)
    best = 0
    for p in PRIMES:
        r = rank_mod(mat, p)
        if r == full:
            return r
        best = max(best, r)
    return best


def has_full_rank(matrix) -> bool:
    mat = np.asarray(matrix, dtype=np.int64)
    if mat.size == 0:
        return True
    return exact_rank(mat) == min(mat.shape)


def solve_partial_pivot(a, b):
    """Solve ax=b by Gaussian elimination with partial pivoting (float64)."""
    a = np.array(a, dtype=np.float64)
    b = np.array(b, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] != b.shape[0]:
        raise SingularMatrix(f"system is not square: {a.shape} vs {b.shape}")
    n = a.shape[0]
    if n == 0:
        return np.zeros(0)
    tol = 1e-12 * max(1.0, float(np.abs(a).max()))
    for k in range(n):
        piv = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[piv, k]) <= tol:
            raise SingularMatrix(f"zero pivot at column {k}")
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            b[[k, piv]] = b[[piv, k]]
        factors = a[k + 1 :, k] / a[k, k]
        a[k + 1 :, k:] -= np.outer(factors, a[k, k:])
        b[k + 1 :] -= factors * b[k]
    x = np.zeros(n)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - a[k, k + 1 :] @ x[k + 1 :]) / a[k, k]
    return x
