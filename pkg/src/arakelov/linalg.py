"""Exact rational linear algebra and small-lattice tools.

Matrices are lists of rows of ``Fraction``.  Sizes here are tiny (a few
dozen at most), so plain Gaussian elimination is fine.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations

import numpy as np

from .errors import CapExceeded, DimensionMismatch, RankDeficient


def fmat(rows):
    return [[Fraction(x) for x in row] for row in rows]


def fvec(v):
    return [Fraction(x) for x in v]


def identity(n):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def diag(values):
    n = len(values)
    return [[Fraction(values[i]) if i == j else Fraction(0) for j in range(n)] for i in range(n)]


def shape(M):
    return len(M), (len(M[0]) if M else 0)


def transpose(M):
    if not M:
        return []
    return [list(col) for col in zip(*M)]


def matmul(A, B):
    Bt = transpose(B)
    return [[sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in Bt] for row in A]


def matvec(A, v):
    return [sum((a * x for a, x in zip(row, v)), Fraction(0)) for row in A]


def columns(M):
    return transpose(M)


def from_columns(cols, n=None):
    if not cols:
        return [[] for _ in range(n or 0)]
    return transpose(cols)


def is_diagonal(M):
    return all(M[i][j] == 0 for i in range(len(M)) for j in range(len(M[0])) if i != j)


def rref(M):
    """Reduced row echelon form; returns (R, pivot_columns)."""
    R = [list(row) for row in M]
    rows, cols = shape(R)
    pivots = []
    r = 0
    for c in range(cols):
        pr = next((i for i in range(r, rows) if R[i][c] != 0), None)
        if pr is None:
            continue
        R[r], R[pr] = R[pr], R[r]
        inv = 1 / R[r][c]
        R[r] = [x * inv for x in R[r]]
        for i in range(rows):
            if i != r and R[i][c] != 0:
                f = R[i][c]
                R[i] = [a - f * b for a, b in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return R, pivots


def rank(M):
    if not M or not M[0]:
        return 0
    return len(rref(M)[1])


def det(M):
    n = len(M)
    if n == 0:
        return Fraction(1)
    A = [list(row) for row in M]
    d = Fraction(1)
    for c in range(n):
        pr = next((i for i in range(c, n) if A[i][c] != 0), None)
        if pr is None:
            return Fraction(0)
        if pr != c:
            A[c], A[pr] = A[pr], A[c]
            d = -d
        d *= A[c][c]
        inv = 1 / A[c][c]
        for i in range(c + 1, n):
            if A[i][c] != 0:
                f = A[i][c] * inv
                A[i] = [a - f * b for a, b in zip(A[i], A[c])]
    return d


def inverse(M):
    n = len(M)
    aug = [list(M[i]) + identity(n)[i] for i in range(n)]
    R, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise RankDeficient("matrix is singular")
    return [row[n:] for row in R]


def solve(A, b):
    """Solve A x = b for square invertible A."""
    return matvec(inverse(A), b)


def nullspace(M):
    """Basis (list of vectors) of {x : M x = 0}."""
    rows, cols = shape(M)
    if rows == 0:
        return [[Fraction(int(i == j)) for i in range(cols)] for j in range(cols)]
    R, piv = rref(M)
    free = [c for c in range(cols) if c not in piv]
    out = []
    for f in free:
        v = [Fraction(0)] * cols
        v[f] = Fraction(1)
        for i, pc in enumerate(piv):
            v[pc] = -R[i][f]
        out.append(v)
    return out


def check_full_column_rank(B):
    n, k = shape(B)
    if k > n or rank(B) != k:
        raise RankDeficient("subspace basis is not linearly independent")


def complement_indices(B):
    """Standard basis indices whose vectors complete the columns of B to a basis."""
    n, k = shape(B)
    aug = [list(B[i]) + identity(n)[i] for i in range(n)]
    _, piv = rref(aug)
    if piv[:k] != list(range(k)):
        raise RankDeficient("subspace basis is not linearly independent")
    return [c - k for c in piv[k:]]


def minors(B, k=None):
    """All maximal minors of the n x k matrix B, keyed by row subsets."""
    n, kk = shape(B)
    k = kk if k is None else k
    return {I: det([B[i] for i in I]) for I in combinations(range(n), k)}


def compound(M, k):
    """k-th compound matrix (matrix of Lambda^k M in the lexicographic wedge basis)."""
    n, m = shape(M)
    rows = list(combinations(range(n), k))
    cols = list(combinations(range(m), k))
    return [[det([[M[i][j] for j in J] for i in I]) for J in cols] for I in rows]


def wedge(vectors):
    """Plucker coordinates of v_1 ^ ... ^ v_k (lexicographic subsets)."""
    B = from_columns(vectors)
    n = len(vectors[0])
    return [det([B[i] for i in I]) for I in combinations(range(n), len(vectors))]


def rational_gcd(values):
    """gcd of a list of rationals (gcd of numerators / lcm of denominators)."""
    num, den = 0, 1
    for x in values:
        x = Fraction(x)
        if x == 0:
            continue
        num = math.gcd(num, x.numerator)
        den = den * x.denominator // math.gcd(den, x.denominator)
    return Fraction(num, den)


def primitive_integer_vector(v):
    """Scale a nonzero rational vector to a primitive integer vector."""
    g = rational_gcd(v)
    out = [x / g for x in v]
    return [int(x) for x in out]


def prime_support_of_matrix(M):
    from .adelic_curve import factor_int
    primes = set()
    for row in M:
        for x in row:
            x = Fraction(x)
            if x != 0:
                primes.update(p for p, _ in factor_int(x.numerator))
                primes.update(p for p, _ in factor_int(x.denominator))
    return primes


def check_square(M, n, what="matrix"):
    if len(M) != n or any(len(r) != n for r in M):
        raise DimensionMismatch(f"{what} must be {n}x{n}")


def is_positive_definite(G):
    """Symmetric G is positive definite iff elimination without pivoting has positive pivots."""
    n = len(G)
    if is_diagonal(G):
        return all(G[i][i] > 0 for i in range(n))
    A = [list(row) for row in G]
    for c in range(n):
        piv = A[c][c]
        if piv <= 0:
            return False
        for i in range(c + 1, n):
            if A[i][c] != 0:
                f = A[i][c] / piv
                for j in range(c, n):
                    A[i][j] -= f * A[c][j]
    return True


# ---------------------------------------------------------------- integer lattices

def hnf_rows(gens, ncols):
    """Row Hermite normal form of the integer lattice generated by ``gens``.

    Returns the nonzero rows (a basis of the lattice).
    """
    A = [list(map(int, g)) for g in gens if any(g)]
    r = 0
    for c in range(ncols):
        # gcd-reduce column c among rows r..end
        while True:
            nz = [i for i in range(r, len(A)) if A[i][c] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(A[i][c]))
            A[r], A[piv] = A[piv], A[r]
            done = True
            for i in range(r + 1, len(A)):
                if A[i][c]:
                    q = A[i][c] // A[r][c]
                    A[i] = [a - q * b for a, b in zip(A[i], A[r])]
                    if A[i][c]:
                        done = False
            if done:
                break
        if r < len(A) and A[r][c] != 0:
            if A[r][c] < 0:
                A[r] = [-a for a in A[r]]
            for i in range(r):
                q = A[i][c] // A[r][c]
                if q:
                    A[i] = [a - q * b for a, b in zip(A[i], A[r])]
            r += 1
        A = A[:r] + [row for row in A[r:] if any(row)]
    return [row for row in A[:r]]


def integer_kernel(A, ncols):
    """Basis of {z in Z^ncols : A z = 0} for an integer matrix A (list of rows)."""
    m = len(A)
    # row-reduce A^T while tracking the unimodular transform
    T = [[int(A[i][j]) for i in range(m)] + [int(j == k) for k in range(ncols)]
         for j in range(ncols)]
    hnf = hnf_rows(T, m + ncols) if T else []
    return [row[m:] for row in hnf if not any(row[:m])]


def congruence_lattice(A, moduli, ncols):
    """Basis of {z in Z^ncols : A_i . z = 0 mod moduli[i]}."""
    if not A:
        return [[int(i == j) for j in range(ncols)] for i in range(ncols)]
    m = len(A)
    ext = [list(map(int, A[i])) + [int(moduli[i]) * int(i == k) for k in range(m)]
           for i in range(m)]
    ker = integer_kernel(ext, ncols + m)
    gens = [row[:ncols] for row in ker]
    basis = hnf_rows(gens, ncols)
    if len(basis) != ncols:
        raise ArithmeticError("congruence lattice is not full rank")
    return basis


# ---------------------------------------------------------------- reduction/enumeration

def lll(basis, gram, delta=0.99):
    """LLL-reduce integer basis vectors (rows) w.r.t. the float gram matrix.

    Only unimodular integer operations are applied, so the lattice is unchanged
    whatever the floating point accuracy.
    """
    B = [list(map(int, b)) for b in basis]
    G = np.asarray(gram, dtype=float)
    k = len(B)

    def ip(u, v):
        return float(np.asarray(u, float) @ G @ np.asarray(v, float))

    def gso():
        mu = np.zeros((k, k))
        bstar = []
        norms = []
        for i in range(k):
            v = np.asarray(B[i], float)
            vs = v.copy()
            for j in range(i):
                mu[i, j] = (v @ G @ bstar[j]) / norms[j]
                vs = vs - mu[i, j] * bstar[j]
            bstar.append(vs)
            norms.append(float(vs @ G @ vs))
        return mu, norms

    i = 1
    guard = 0
    while i < k:
        guard += 1
        if guard > 100000:
            break
        mu, norms = gso()
        for j in range(i - 1, -1, -1):
            q = round(mu[i, j])
            if q:
                B[i] = [a - q * b for a, b in zip(B[i], B[j])]
                mu, norms = gso()
        if norms[i] >= (delta - mu[i, i - 1] ** 2) * norms[i - 1]:
            i += 1
        else:
            B[i], B[i - 1] = B[i - 1], B[i]
            i = max(i - 1, 1)
    return B


def short_vectors(basis, gram, radius2, max_points=200000):
    """All nonzero lattice vectors x (up to sign) with x^T G x <= radius2.

    Fincke-Pohst enumeration on the coefficient quadratic form.  A relative
    margin absorbs float error; callers re-check candidates exactly.
    """
    B = np.asarray(basis, dtype=float)  # rows are basis vectors
    G = np.asarray(gram, dtype=float)
    Q = B @ G @ B.T
    m = Q.shape[0]
    R2 = radius2 * (1 + 1e-9) + 1e-12
    L = np.linalg.cholesky(Q)  # Q = L L^T
    # q_ii and q_ij in the completed-square form
    R = L.T  # upper triangular, Q = R^T R
    diagR = np.diag(R)
    qq = diagR ** 2
    mu = R / diagR[:, None]
    out = []
    z = [0] * m

    def rec(i, remaining):
        c = -sum(mu[i, j] * z[j] for j in range(i + 1, m))
        span = math.sqrt(max(remaining, 0.0) / qq[i])
        lo, hi = math.ceil(c - span - 1e-12), math.floor(c + span + 1e-12)
        for zi in range(lo, hi + 1):
            rest = remaining - qq[i] * (zi - c) ** 2
            if rest < -1e-12 * R2:
                continue
            z[i] = zi
            if i == 0:
                if any(z):
                    # keep one of +-z: first nonzero coordinate (from the top) positive
                    top = next(t for t in range(m - 1, -1, -1) if z[t])
                    if z[top] > 0:
                        out.append(list(z))
                        if len(out) > max_points:
                            raise CapExceeded("enumeration produced too many vectors")
            else:
                rec(i - 1, rest)
        z[i] = 0

    rec(m - 1, R2)
    Bi = [list(map(int, b)) for b in basis]
    return [[sum(zz * Bi[r][c] for r, zz in enumerate(zv)) for c in range(len(Bi[0]))]
            for zv in out]


def ellipsoid_points(Q, center, bound2, max_points=200000):
    """Integer vectors m with (m - center)^T Q (m - center) <= bound2.

    Returns (m, value) pairs.  Q is a positive definite float matrix.
    """
    Q = np.asarray(Q, dtype=float)
    k = Q.shape[0]
    if k == 0:
        return [([], 0.0)] if bound2 >= -1e-12 else []
    c0 = np.asarray(center, dtype=float)
    R = np.linalg.cholesky(Q).T
    diagR = np.diag(R)
    qq = diagR ** 2
    mu = R / diagR[:, None]
    B2 = bound2 * (1 + 1e-9) + 1e-12
    out = []
    z = [0] * k

    def rec(i, remaining):
        c = c0[i] - sum(mu[i, j] * (z[j] - c0[j]) for j in range(i + 1, k))
        span = math.sqrt(max(remaining, 0.0) / qq[i])
        for zi in range(math.ceil(c - span - 1e-12), math.floor(c + span + 1e-12) + 1):
            rest = remaining - qq[i] * (zi - c) ** 2
            if rest < -1e-12 * B2:
                continue
            z[i] = zi
            if i == 0:
                out.append((list(z), B2 - rest))
                if len(out) > max_points:
                    raise CapExceeded("enumeration produced too many vectors")
            else:
                rec(i - 1, rest)
        z[i] = 0

    rec(k - 1, B2)
    return out
