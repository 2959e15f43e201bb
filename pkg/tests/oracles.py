"""Independent reference computations for the test-suite.

Nothing here imports the package's linear algebra or degree code: degrees are
recomputed from integer minors (sympy) and float log-determinants (numpy).
"""

import itertools
import math
import random
from fractions import Fraction
from functools import reduce

import numpy as np
import sympy


def random_gram(rng, n, spread=16.0, entry=3):
    """Integral positive definite gram A^T A with eigenvalue ratio <= spread."""
    while True:
        A = np.array([[rng.randint(-entry, entry) for _ in range(n)] for _ in range(n)])
        G = A.T @ A
        ev = np.linalg.eigvalsh(G.astype(float))
        if ev[0] > 0.5 and ev[-1] / ev[0] <= spread:
            return [[int(x) for x in row] for row in G]


def random_bundle_data(rng, n, primes=(2, 3)):
    """(gram, {p: weights}) with diagonal finite weights in [-3, 3]."""
    G = random_gram(rng, n)
    fin = {}
    for p in primes:
        if rng.random() < 0.7:
            fin[p] = [rng.randint(-3, 3) for _ in range(n)]
    return G, fin


def random_bundles(count=200, seed=20240601, max_dim=4):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        n = rng.randint(1, max_dim)
        out.append(random_bundle_data(rng, n))
    return out


def _vp(x, p):
    x = abs(int(x))
    if x == 0:
        return math.inf
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def idet(M):
    """Exact determinant of a square integer matrix (Bareiss)."""
    A = [list(map(int, r)) for r in M]
    n = len(A)
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            sw = next((i for i in range(k + 1, n) if A[i][k]), None)
            if sw is None:
                return 0
            A[k], A[sw] = A[sw], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[-1][-1] if n else 1


def oracle_degree(B, G, fin):
    """Degree of span of the integer columns of B (n x k) for the standard
    lattice, gram G at infinity and diagonal weights fin[p] at p."""
    n = len(B)
    k = len(B[0])
    minors = {}
    for I in itertools.combinations(range(n), k):
        minors[I] = idet([B[i] for i in I])
    g = reduce(math.gcd, (abs(m) for m in minors.values()))
    if g == 0:
        raise ValueError("dependent columns")
    total = 0.0
    rest = g
    for p, w in fin.items():
        best = -math.inf
        for I, m in minors.items():
            if m:
                e = -_vp(m, p) - sum(w[i] for i in I)
                best = max(best, e)
        total += best * math.log(p)
        while rest % p == 0:
            rest //= p
    # standard primes: ln|g|_p summed = -ln(rest)
    total += -math.log(rest)
    # det(B^T G B) is an integer: take it exactly, then the log
    GB = [[sum(G[i][l] * B[l][j] for l in range(n)) for j in range(k)] for i in range(n)]
    gram_det = idet([[sum(B[l][i] * GB[l][j] for l in range(n)) for j in range(k)] for i in range(k)])
    total += 0.5 * math.log(gram_det)
    return -total


def primitive_box(n, bound):
    seen = []
    for v in itertools.product(range(-bound, bound + 1), repeat=n):
        if not any(v):
            continue
        if reduce(math.gcd, (abs(x) for x in v)) != 1:
            continue
        first = next(x for x in v if x)
        if first < 0:
            continue
        seen.append(v)
    return seen


def _upper_hull(points):
    hull = []
    for x, y in points:
        while len(hull) >= 2:
            (x0, y0), (x1, y1) = hull[-2], hull[-1]
            if (y1 - y0) * (x - x0) <= (y - y0) * (x1 - x0) + 1e-10:
                hull.pop()
            else:
                break
        hull.append((x, y))
    return hull


def oracle_hn(G, fin, bound=None, top=20):
    """Brute-force HN: best subspace of each rank among spans of the `top`
    best lines of a box, then the upper concave hull of (rank, degree).

    Returns (slopes, {rank: column basis}) for the hull vertices.
    """
    n = len(G)
    bound = bound or (3 if n <= 3 else 2)
    lines = set(primitive_box(n, bound))
    # the same box in coordinates of the lattice {x : ||x||_p <= 1 for all p},
    # which is sum_i c_i Z e_i with c_i = prod_p p^(-w_i)
    c = [Fraction(1)] * n
    for p, w in fin.items():
        c = [ci * Fraction(p) ** (-wi) for ci, wi in zip(c, w)]
    for y in primitive_box(n, bound):
        x = [ci * yi for ci, yi in zip(c, y)]
        L = reduce(math.lcm, (xi.denominator for xi in x))
        xs = [int(xi * L) for xi in x]
        g = reduce(math.gcd, (abs(v) for v in xs))
        xs = [v // g for v in xs]
        if next(v for v in xs if v) < 0:
            xs = [-v for v in xs]
        lines.add(tuple(xs))
    lines = sorted(lines)
    scored = sorted(lines, key=lambda v: -oracle_degree([[x] for x in v], G, fin))[:top]
    best = {0: (0.0, None)}
    for k in range(1, n + 1):
        if k == n:
            I = [[int(i == j) for j in range(n)] for i in range(n)]
            best[n] = (oracle_degree(I, G, fin), I)
            continue
        cand = None
        for combo in itertools.combinations(scored, k):
            B = [list(r) for r in zip(*combo)]
            if np.linalg.matrix_rank(np.array(B, dtype=float)) < k:
                continue
            d = oracle_degree(B, G, fin)
            if cand is None or d > cand[0] + 1e-12:
                cand = (d, B)
        best[k] = cand
    pts = [(k, best[k][0]) for k in range(n + 1)]
    hull = _upper_hull(pts)
    slopes = []
    for (x0, y0), (x1, y1) in zip(hull, hull[1:]):
        slopes += [(y1 - y0) / (x1 - x0)] * (x1 - x0)
    subs = {x: best[x][1] for x, _ in hull[1:]}
    return slopes, subs


def rref_key(B):
    """Canonical form of the column span of B."""
    M = sympy.Matrix(B).T.rref()[0]
    rows = [tuple(Fraction(int(x.p), int(x.q)) for x in M.row(i)) for i in range(M.rows)
            if any(M.row(i))]
    return tuple(rows)


# ---------------------------------------------------------------- closed forms for series

def gauss_toric_degree(n, u, p=2):
    """deg(E_n) for D = [inf] with Gauss weight u at p: sum_j j u ln p."""
    return u * math.log(p) * n * (n + 1) / 2


def uniform_sum_expectation(G, a1, b1, a2, b2, m=2000):
    """Midpoint-rule reference for E[G(Z1 + Z2)]."""
    xs = a1 + (b1 - a1) * (np.arange(m) + 0.5) / m
    ys = a2 + (b2 - a2) * (np.arange(m) + 0.5) / m
    Z = xs[:, None] + ys[None, :]
    return float(np.mean(np.vectorize(G)(Z)))


def hn_matches(G, fin, slopes, subspaces):
    """Compare a computed HN filtration (float slopes, column bases) with the oracle."""
    sl, subs = oracle_hn(G, fin)
    n = len(G)
    if len(sl) != len(slopes) or any(abs(a - b) > 1e-9 for a, b in zip(sl, slopes)):
        return False
    for B in subspaces:
        k = len(B[0])
        if k == n:
            continue
        if k not in subs or rref_key(B) != rref_key(subs[k]):
            return False
    return True
