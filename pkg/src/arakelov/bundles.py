"""Adelic vector bundles over Q: degrees, slopes, Harder-Narasimhan filtration,
successive minima and twists.

HN filtrations of non-diagonal bundles are computed exactly (for Hermitian
archimedean data) by finding, for every rank k, the maximal degree of a rank-k
subspace.  A subspace of degree >= t has a Plucker vector in the unit-ball
lattice of Lambda^k with archimedean length <= exp(slack - t), so a
Fincke-Pohst enumeration over that lattice sees every candidate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional

import numpy as np

from . import linalg as la
from .adelic_curve import (LogValue, PlaceFunction, integrate_place_function, lv_sum,
                           to_fraction, valuation)
from .errors import CapExceeded, DimensionMismatch, SchemaError, Unsupported, ZeroVector
from .norms import (ArchNorm, FiniteNorm, NormFamily, delta_bound_check, sub_quotient_norm,
                    wedge_log_norm)

DEFAULT_HN_CAP = 4
DEFAULT_MINIMA_CAP = 6


@dataclass(frozen=True)
class AdelicBundle:
    dim: int
    family: NormFamily
    labels: Optional[tuple] = None

    def __post_init__(self):
        if self.family.dim != self.dim:
            raise DimensionMismatch("family dimension differs from bundle dimension")
        if self.labels is not None and len(self.labels) != self.dim:
            raise DimensionMismatch("one label per basis vector")

    @classmethod
    def standard(cls, n):
        return cls(n, NormFamily.standard(n))

    @classmethod
    def diagonal(cls, finite_weights=None, gram_diag=None, arch_weights=None, n=None):
        """Diagonal bundle: ``finite_weights`` maps p to a weight vector."""
        finite_weights = finite_weights or {}
        if n is None:
            for src in (gram_diag, arch_weights, *finite_weights.values()):
                if src is not None:
                    n = len(src)
                    break
        gram = la.diag(gram_diag) if gram_diag is not None else la.identity(n)
        arch = ArchNorm("hermitian", arch_weights if arch_weights is not None else [0] * n, gram)
        fin = {p: FiniteNorm.diagonal(p, w) for p, w in finite_weights.items()}
        return cls(n, NormFamily(n, arch, fin))

    @classmethod
    def from_json(cls, obj, path="bundle"):
        fam_obj = obj.get("family", obj) if isinstance(obj, dict) else obj
        family = NormFamily.from_json(fam_obj, path)
        labels = obj.get("labels") if isinstance(obj, dict) else None
        if labels is not None and len(labels) != family.dim:
            raise SchemaError("one label per basis vector", path + ".labels")
        return cls(family.dim, family, tuple(labels) if labels else None)

    def to_json(self):
        out = self.family.to_json()
        if self.labels:
            out["labels"] = list(self.labels)
        return out

    @property
    def is_diagonal(self):
        """Orthogonal sum of the coordinate lines at every place."""
        fam = self.family
        if fam.arch.kind != "hermitian" or not fam.arch.is_diagonal:
            return False
        return all(nm.is_diagonal for nm in fam.finite.values())


# ---------------------------------------------------------------- degrees

def degree_of_vector(E: AdelicBundle, s) -> LogValue:
    """-sum_w ln||s||_w."""
    s = [to_fraction(x) for x in s]
    if len(s) != E.dim:
        raise DimensionMismatch("vector has the wrong length")
    if all(x == 0 for x in s):
        raise ZeroVector("degree of the zero vector")
    return -lv_sum(E.family.log_norm(s, w) for w in E.family.places_for(s))


def subspace_degree(E: AdelicBundle, B) -> LogValue:
    """Degree of span(B) with the restricted norms (columns of B)."""
    return -wedge_log_norm(E.family, B)


def arakelov_degree(E: AdelicBundle) -> LogValue:
    if E.dim == 0:
        return LogValue()
    return -wedge_log_norm(E.family, la.identity(E.dim))


def degree_bracket(E: AdelicBundle):
    d = arakelov_degree(E)
    v = float(d)
    return v - d.err, v + d.err


def quotient_bundle(E: AdelicBundle, B) -> AdelicBundle:
    fam = sub_quotient_norm(E.family, B, "quotient")
    return AdelicBundle(fam.dim, fam)


def sub_bundle(E: AdelicBundle, B) -> AdelicBundle:
    fam = sub_quotient_norm(E.family, B, "restrict")
    return AdelicBundle(fam.dim, fam)


def twist_by_phi(E: AdelicBundle, phi: PlaceFunction) -> AdelicBundle:
    """Norms scaled by exp(-phi(w)) at every place."""
    return AdelicBundle(E.dim, E.family.with_twist(phi), E.labels)


def line_degrees(E: AdelicBundle):
    ident = la.identity(E.dim)
    return [degree_of_vector(E, ident[i]) for i in range(E.dim)]


# ---------------------------------------------------------------- HN filtration

@dataclass
class HNFiltration:
    """Jumps t_1 > ... > t_k and nested subspaces E_1 < ... < E_k = E.

    F^t = E_i for t_{i+1} < t <= t_i, F^t = E for t <= t_k, 0 for t > t_1.
    """

    breakpoints: list
    subspaces: list  # basis matrices (n x dim E_i), columns = basis vectors
    slopes: list  # one per rank, nonincreasing
    method: str = "diagonal"
    certified: bool = True

    @property
    def mu_max(self):
        return self.slopes[0]

    @property
    def mu_min(self):
        return self.slopes[-1]

    @property
    def dims(self):
        return [la.shape(B)[1] for B in self.subspaces]

    def step(self, t):
        """Basis of F^t (possibly with no columns)."""
        t = LogValue.coerce(t)
        chosen = None
        for bp, B in zip(self.breakpoints, self.subspaces):
            if t <= bp:
                chosen = B
        if chosen is None:
            n = len(self.subspaces[-1])
            return [[] for _ in range(n)]
        return chosen

    def to_json(self):
        return {
            "breakpoints": [float(b) for b in self.breakpoints],
            "slopes": [float(s) for s in self.slopes],
            "dims": self.dims,
            "subspaces": [[[str(x) for x in row] for row in B] for B in self.subspaces],
            "method": self.method,
            "certified": self.certified,
        }


def _filtration_from_points(E, points):
    """Build the filtration from the upper concave hull of (k, M_k).

    ``points[k] = (M_k, basis)`` for k = 0..n.  Collinear points are dropped,
    which keeps the larger subspace on slope ties.
    """
    n = E.dim
    hull = [0]
    for k in range(1, n + 1):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            Ma, Mb, Mk = points[a][0], points[b][0], points[k][0]
            # drop b if it lies on or below the chord a-k
            cross = (Mb - Ma) * (k - a) - (Mk - Ma) * (b - a)
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(k)
    slopes, breakpoints, subspaces = [], [], []
    for a, b in zip(hull, hull[1:]):
        s = (points[b][0] - points[a][0]) / (b - a)
        slopes.extend([s] * (b - a))
        breakpoints.append(s)
        subspaces.append(points[b][1])
    return breakpoints, subspaces, slopes


def _diagonal_hn(E: AdelicBundle):
    n = E.dim
    degs = line_degrees(E)
    # stable sort by degree (descending)
    order = sorted(range(n), key=lambda i: _SortKey(degs[i]), reverse=True)
    groups = []
    for i in order:
        if groups and degs[groups[-1][0]] == degs[i]:
            groups[-1].append(i)
        else:
            groups.append([i])
    ident = la.identity(n)
    breakpoints, subspaces, slopes = [], [], []
    used = []
    for g in groups:
        used = used + g
        cols = sorted(used)
        subspaces.append(la.from_columns([ident[c] for c in cols], n))
        breakpoints.append(degs[g[0]])
        slopes.extend(degs[i] for i in g)
    return HNFiltration(breakpoints, subspaces, slopes, "diagonal", True)


class _SortKey:
    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    def __lt__(self, other):
        return self.v < other.v

    def __eq__(self, other):
        return self.v == other.v


def unit_lattice(family: NormFamily):
    """(M, rows): an integer basis ``rows`` of M * {x : ||x||_p <= 1 for all primes p}."""
    n = family.dim
    M = 1
    congruences = []
    for p, nm in family.finite.items():
        a = [math.ceil(-w) for w in nm.weights]
        P = [list(r) for r in nm.basis]
        # x = P c with v_p(c_i) >= a_i, so v_p(x_j) >= min_i v_p(P_ji) + a_i
        low = min(valuation(P[j][i], p) + a[i] for j in range(n) for i in range(n) if P[j][i] != 0)
        mexp = max(0, -low)
        M *= p ** mexp
        inv = nm.inv
        d = 1
        for row in inv:
            for x in row:
                d = d * x.denominator // math.gcd(d, x.denominator)
        A = [[int(x * d) for x in row] for row in inv]
        vd = valuation(d, p)
        for i in range(n):
            b = a[i] + mexp + vd
            if b > 0:
                congruences.append((A[i], p ** b))
    rows = la.congruence_lattice([c[0] for c in congruences], [c[1] for c in congruences], n)
    return M, rows


def _float_gram(arch: ArchNorm):
    return arch.float_gram


def _exterior_family(family: NormFamily, k: int) -> tuple:
    """Finite norms and float gram of Lambda^k (lexicographic wedge basis)."""
    fin = {}
    subsets = list(combinations(range(family.dim), k))
    for p, nm in family.finite.items():
        P = [list(r) for r in nm.basis]
        fin[p] = FiniteNorm(p, la.compound(P, k), [sum((nm.weights[i] for i in I), Fraction(0))
                                                    for I in subsets])
    G = family.arch.float_gram
    Gk = np.array([[np.linalg.det(G[np.ix_(I, J)]) for J in subsets] for I in subsets])
    m = len(subsets)
    arch = ArchNorm("hermitian", [0] * m, la.identity(m))  # placeholder for the dimension only
    return NormFamily(m, arch, fin), Gk


def _fractional_slack(family: NormFamily, k: int) -> float:
    """Upper bound for sum_p (-ln||x||_p) over normalised Plucker vectors."""
    total = 0.0
    for p, nm in family.finite.items():
        best = 0.0
        for I in combinations(range(family.dim), k):
            s = sum((nm.weights[i] for i in I), Fraction(0))
            best = max(best, float(s - math.floor(s)))
        total += best * math.log(p)
    return total


def _decomposable_subspace(x, n, k):
    """Basis of {v : v ^ x = 0} if x in Lambda^k is decomposable, else None."""
    if k == n:
        return la.identity(n)
    idx = {I: j for j, I in enumerate(combinations(range(n), k))}
    rows = []
    for J in combinations(range(n), k + 1):
        row = [Fraction(0)] * n
        for pos, j in enumerate(J):
            I = J[:pos] + J[pos + 1:]
            row[j] += (-1) ** pos * x[idx[I]]
        rows.append(row)
    ker = la.nullspace(rows)
    if len(ker) != k:
        return None
    return la.from_columns(ker, n)


def _canonical_basis(B):
    """Reduced column echelon form, so equal subspaces compare equal."""
    R, _ = la.rref(la.transpose(B))
    return la.transpose(R)


def max_degree_subspace(E: AdelicBundle, k: int, hint=None, max_points=200000):
    """(M_k, basis) with M_k the maximal degree of a rank-k subspace.

    ``hint`` is a lower bound certificate (degree, basis); if absent, spans of
    reduced lattice vectors are used.  Every subspace of degree >= hint is
    enumerated, so the maximiser returned is exact; ties are reported via the
    ``ties`` list attribute of the result.
    """
    n = E.dim
    fam = E.family
    if k == n:
        B = la.identity(n)
        return arakelov_degree(E), B, [B]
    ext_fam, Gk = _exterior_family(fam, k)
    M, rows = unit_lattice(ext_fam)
    reduced = la.lll(rows, Gk)
    if hint is None:
        hint = _greedy_candidate(E, k)
    t0 = hint[0]
    slack = _fractional_slack(fam, k) + k * float(integrate_place_function(fam.twist))
    log_r = slack - float(t0) + 1e-9
    radius2 = math.exp(2 * log_r) * M * M
    vecs = la.short_vectors(reduced, Gk, radius2, max_points=max_points)
    best, best_B, ties = t0, _canonical_basis(hint[1]), []
    seen = set()
    for v in vecs:
        x = [Fraction(c) for c in v]
        F = _decomposable_subspace(x, n, k)
        if F is None:
            continue
        F = _canonical_basis(F)
        key = tuple(tuple(r) for r in F)
        if key in seen:
            continue
        seen.add(key)
        d = subspace_degree(E, F)
        if d > best:
            best, best_B, ties = d, F, []
        elif d == best:
            if key != tuple(tuple(r) for r in best_B):
                ties.append(F)
    return best, best_B, [best_B] + ties


def _greedy_candidate(E: AdelicBundle, k: int):
    """A rank-k subspace with reasonably large degree (a lower bound for M_k)."""
    n = E.dim
    M, rows = unit_lattice(E.family)
    G = E.family.arch.float_gram
    red = la.lll(rows, G)
    vecs = [[Fraction(c) for c in r] for r in red]
    # greedy by degree among reduced vectors
    chosen = []
    best_deg = None
    for _ in range(k):
        cand_best = None
        for v in vecs:
            if v in chosen:
                continue
            B = la.from_columns(chosen + [v], n)
            d = subspace_degree(E, B)
            if cand_best is None or d > cand_best[0]:
                cand_best = (d, v)
        chosen.append(cand_best[1])
        best_deg = cand_best[0]
    # also try coordinate subspaces for diagonal-ish data
    B = la.from_columns(chosen, n)
    best = (best_deg, B)
    if n <= 6:
        ident = la.identity(n)
        for I in combinations(range(n), k):
            C = la.from_columns([ident[i] for i in I], n)
            d = subspace_degree(E, C)
            if d > best[0]:
                best = (d, C)
    return best


def hn_filtration(E: AdelicBundle, cap: int = DEFAULT_HN_CAP, heuristic: bool = False,
                  force_general: bool = False) -> HNFiltration:
    n = E.dim
    if n < 1:
        raise DimensionMismatch("HN filtration needs dim >= 1")
    if E.family.arch.kind != "hermitian":
        raise Unsupported("HN filtration is implemented for Hermitian archimedean norms")
    if E.is_diagonal and not force_general:
        return _diagonal_hn(E)
    if n > cap and not heuristic:
        raise Unsupported(f"dimension {n} exceeds the HN cap {cap}; pass heuristic=True")
    if n > cap:
        return _heuristic_hn(E)
    points = [(LogValue(), [[] for _ in range(n)])]
    prev = None
    for k in range(1, n + 1):
        hint = None
        if prev is not None and k < n:
            hint = _extend_hint(E, prev, k)
            g = _greedy_candidate(E, k)
            if hint is None or g[0] > hint[0]:
                hint = g
        Mk, Bk, _ = max_degree_subspace(E, k, hint)
        points.append((Mk, Bk))
        prev = Bk
    bps, subs, slopes = _filtration_from_points(E, points)
    return HNFiltration(bps, subs, slopes, "enumeration", E.family.arch.unweighted)


def _extend_hint(E, B, k):
    n = E.dim
    ident = la.identity(n)
    cols = la.columns(B) if B and B[0] else []
    best = None
    for i in range(n):
        C = la.from_columns(cols + [ident[i]], n)
        if la.rank(C) == k:
            d = subspace_degree(E, C)
            if best is None or d > best[0]:
                best = (d, C)
    return best


def _heuristic_hn(E):
    n = E.dim
    points = [(LogValue(), [[] for _ in range(n)])]
    for k in range(1, n + 1):
        if k == n:
            points.append((arakelov_degree(E), la.identity(n)))
        else:
            d, B = _greedy_candidate(E, k)
            points.append((d, B))
    bps, subs, slopes = _filtration_from_points(E, points)
    return HNFiltration(bps, subs, slopes, "heuristic", False)


def slopes(E: AdelicBundle, **kw):
    return hn_filtration(E, **kw).slopes


# ---------------------------------------------------------------- positive degree

def positive_degree_bracket(E: AdelicBundle, hn: HNFiltration | None = None):
    """[lower, upper] for deg_+ = sup_F deg(F).

    For Hermitian/ultrametric data degrees are exactly additive on flags, so
    every subspace satisfies deg(F) <= sum of its top slopes and the bracket
    collapses to sum max(mu_i, 0).
    """
    hn = hn or hn_filtration(E)
    pos = lv_sum(s for s in hn.slopes if s > 0)
    lower = pos
    upper = pos
    if not hn.certified:
        upper = pos + delta_bound_check(E.family)["Delta"]
    return lower, upper


# ---------------------------------------------------------------- successive minima

@dataclass
class Minima:
    values: list
    vectors: list
    method: str = "enumeration"

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]


def successive_minima(E: AdelicBundle, i_range=None, cap: int = DEFAULT_MINIMA_CAP,
                      force_general: bool = False, check: bool = True) -> Minima:
    n = E.dim
    i_range = list(i_range) if i_range is not None else list(range(1, n + 1))
    if E.is_diagonal and not force_general:
        degs = line_degrees(E)
        order = sorted(range(n), key=lambda i: _SortKey(degs[i]), reverse=True)
        ident = la.identity(n)
        vals = [degs[i] for i in order]
        vecs = [ident[i] for i in order]
        return Minima([vals[i - 1] for i in i_range], [vecs[i - 1] for i in i_range], "diagonal")
    if n > cap:
        raise CapExceeded(f"dimension {n} exceeds the enumeration cap {cap}")
    if E.family.arch.kind != "hermitian":
        raise Unsupported("successive minima need a Hermitian archimedean norm")
    M, rows = unit_lattice(E.family)
    G = E.family.arch.float_gram
    red = la.lll(rows, G)
    basis_degs = [float(degree_of_vector(E, r)) for r in red]
    frac = _fractional_slack(E.family, 1)
    C = math.log(M) + frac + float(integrate_place_function(E.family.twist))
    Q = np.asarray(red, dtype=float) @ G @ np.asarray(red, dtype=float).T
    vals, chosen, coords = [], [], []
    t = max(basis_degs)
    for _ in range(n):
        t = _next_minimum(E, red, Q, coords, C, frac, t, min(basis_degs), vals, chosen)
    if len(chosen) < n:
        raise ArithmeticError("enumeration did not reach full rank")
    out = Minima([vals[i - 1] for i in i_range], [chosen[i - 1] for i in i_range])
    if check and n <= DEFAULT_HN_CAP:
        hn = hn_filtration(E)
        for i in i_range:
            if out.values[i_range.index(i)] > hn.slopes[i - 1]:
                raise ArithmeticError(f"nu_{i} exceeds mu_{i}: enumeration is inconsistent")
    return out


def _float_degree(E: AdelicBundle, v) -> float:
    """Float degree of an integer vector without building LogValues."""
    fam = E.family
    arch = fam.arch
    if arch.kind == "hermitian" and arch.unweighted:
        x = np.array(v, dtype=float)
        total = 0.5 * math.log(float(x @ arch.float_gram @ x)) + float(arch._inflation(1))
    else:
        total = float(arch.log_norm(v))
    g = 0
    for c in v:
        g = math.gcd(g, int(c))
    for p, nm in fam.finite.items():
        total += float(nm.exponent(v)) * math.log(p)
        while g % p == 0:
            g //= p
    total -= math.log(g)
    total -= float(integrate_place_function(fam.twist))
    return -total


def _split_coordinates(coords, n):
    """(sat, comp): a basis of Z^n whose first rows span the saturation of ``coords``."""
    if not coords:
        return [], la.identity(n)
    K = la.integer_kernel(coords, n)
    m = len(K)
    rows = [[K[j][i] for j in range(m)] + [int(i == c) for c in range(n)] for i in range(n)]
    H = la.hnf_rows(rows, m + n)
    comp = [r[m:] for r in H if any(r[:m])]
    sat = [r[m:] for r in H if not any(r[:m])]
    return sat, comp


def _next_minimum(E, red, Q, coords, C, frac, t, t_low, vals, chosen):
    """Append the next greedy minimum to vals/chosen/coords; returns its float degree.

    Vectors outside V = span(chosen) are grouped by their class y in the quotient
    lattice.  A vector of degree >= t has norm <= R = e^(C - t), so its class has
    projected norm <= R.  Inside a class only lifts within e^frac of the closest
    one can beat it, because degrees of primitive vectors sit in
    [-ln||v|| + C - frac, -ln||v|| + C].
    """
    n = len(red)
    sat, comp = _split_coordinates(coords, n)
    S = np.asarray(sat, dtype=float).reshape(len(sat), n)
    P = np.asarray(comp, dtype=float)
    Gvv = S @ Q @ S.T
    Gvq = S @ Q @ P.T
    Gqq = P @ Q @ P.T
    lift = np.linalg.solve(Gvv, Gvq) if len(sat) else np.zeros((0, len(comp)))
    schur = Gqq - Gvq.T @ lift
    grow = math.exp(2 * frac)
    while True:
        R2 = math.exp(2 * (C - t) + 1e-9)
        best = None
        for y, e0 in la.ellipsoid_points(schur, [0.0] * len(comp), R2):
            if not any(y) or next(c for c in y if c) < 0:
                continue
            center = -(lift @ np.asarray(y, dtype=float)) if len(sat) else []
            lifts = []
            if len(sat):
                m0 = [round(c) for c in center]
                d0 = float((np.asarray(m0) - center) @ Gvv @ (np.asarray(m0) - center))
                h = min(v for _, v in la.ellipsoid_points(Gvv, center, d0))
                # written to avoid cancellation when e0 >> h
                bound = min(R2 - e0, h + (grow - 1) * (e0 + h)) + 1e-9 * (e0 + h)
                lifts = [m for m, _ in la.ellipsoid_points(Gvv, center, bound)]
            else:
                lifts = [[]]
            for m in lifts:
                z = [sum(yi * comp[i][c] for i, yi in enumerate(y))
                     + sum(mi * sat[i][c] for i, mi in enumerate(m)) for c in range(n)]
                v = [sum(z[r] * red[r][c] for r in range(n)) for c in range(n)]
                d = _float_degree(E, v)
                key = (-d, tuple(v))
                if best is None or key < best[0]:
                    best = (key, v, z)
        if best is not None and -best[0][0] >= t - 1e-12:
            break
        if best is not None:
            t = -best[0][0]
        elif t <= t_low:
            raise ArithmeticError("enumeration did not reach full rank")
        else:
            t = max(t - 2 * math.log(2), t_low)
    _, v, z = best
    chosen.append([Fraction(c) for c in v])
    coords.append(z)
    vals.append(degree_of_vector(E, chosen[-1]))
    return -best[0][0]


def slope_sandwich(E: AdelicBundle, hn: HNFiltration | None = None) -> dict:
    hn = hn or hn_filtration(E)
    total = lv_sum(hn.slopes)
    deg = arakelov_degree(E)
    Delta = delta_bound_check(E.family)["Delta"]
    return {"sum_slopes": total, "degree": deg, "Delta": Delta,
            "lower_ok": total <= deg, "upper_ok": deg <= total + Delta}
