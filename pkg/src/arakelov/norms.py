"""Norm families on Q^n with finite support.

A :class:`NormFamily` has one archimedean norm, explicit ultrametric norms at
finitely many primes, and the standard lattice norm max|x_i|_q at every other
prime.  An optional :class:`PlaceFunction` twist multiplies the norm at w by
exp(-phi(w)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Mapping

import numpy as np

from . import linalg as la
from .adelic_curve import (LogValue, Place, PlaceFunction, factor_int, integrate_place_function,
                           parse_rational, rational_factor, to_fraction, valuation)
from .errors import DimensionMismatch, RankDeficient, SchemaError, Unsupported


def _frac_tuple(v):
    return tuple(to_fraction(x) for x in v)


def _weight_tuple(v):
    # archimedean weights may be exact log-values (e.g. -alpha*ln(rho))
    return tuple(x if isinstance(x, LogValue) else to_fraction(x) for x in v)


def _wsum(ws):
    total = Fraction(0)
    for w in ws:
        total = total + w
    return total


def _mat_tuple(M):
    return tuple(tuple(to_fraction(x) for x in row) for row in M)


# ---------------------------------------------------------------- finite places

@dataclass(frozen=True)
class FiniteNorm:
    """||x|| = max_i |c_i|_p p^{-w_i} where c = basis^{-1} x."""

    p: int
    basis: tuple  # rows of the matrix whose columns form the orthogonality basis
    weights: tuple

    def __post_init__(self):
        object.__setattr__(self, "basis", _mat_tuple(self.basis))
        object.__setattr__(self, "weights", _frac_tuple(self.weights))
        n = len(self.weights)
        la.check_square(self.basis, n, "orthogonality basis")
        B = [list(r) for r in self.basis]
        if (any(B[i][i] == 0 for i in range(n)) if la.is_diagonal(B) else la.det(B) == 0):
            raise RankDeficient("orthogonality basis is singular")

    @classmethod
    def standard(cls, p, n):
        return cls(p, la.identity(n), [0] * n)

    @classmethod
    def diagonal(cls, p, weights):
        return cls(p, la.identity(len(weights)), weights)

    @property
    def dim(self):
        return len(self.weights)

    @cached_property
    def inv(self):
        return la.inverse([list(r) for r in self.basis])

    @cached_property
    def is_identity_basis(self):
        return [list(r) for r in self.basis] == la.identity(self.dim)

    @cached_property
    def is_diagonal(self):
        return la.is_diagonal(self.basis)

    def is_standard(self):
        """True when this is the unit-lattice norm of Z_p^n."""
        if any(w != 0 for w in self.weights):
            return False
        P = self.basis
        if any(x != 0 and valuation(x, self.p) < 0 for row in P for x in row):
            return False
        return valuation(la.det([list(r) for r in P]), self.p) == 0

    def coords(self, x):
        if self.is_identity_basis:
            return list(x)
        if self.is_diagonal:
            return [c / self.basis[i][i] for i, c in enumerate(x)]
        return la.matvec(self.inv, x)

    def exponent(self, x):
        """e with ||x|| = p^e; None for x = 0."""
        c = self.coords(x)
        best = None
        for ci, wi in zip(c, self.weights):
            if ci != 0:
                e = -valuation(ci, self.p) - wi
                if best is None or e > best:
                    best = e
        return best

    def log_norm(self, x) -> LogValue:
        e = self.exponent(x)
        if e is None:
            raise ValueError("zero vector has no log-norm")
        return LogValue({self.p: e})

    def to_json(self):
        return {"basis": [[str(x) for x in row] for row in self.basis],
                "weights": [str(w) for w in self.weights]}


def _standard_exponent(x, q):
    vals = [valuation(c, q) for c in x if c != 0]
    return -min(vals)


def split_restrict(norm: FiniteNorm, B):
    """Orthogonal basis of span(B) for ``norm``; returns (T, weights, pivots).

    T is k x k with columns giving the orthogonal vectors in the coordinates of
    B; ``pivots`` are the rows of the coefficient space used as pivots.
    """
    p = norm.p
    n, k = la.shape(B)
    Y = la.matmul(norm.inv, B)
    cols = [la.columns(Y)[j] for j in range(k)]
    T = [[Fraction(int(i == j)) for i in range(k)] for j in range(k)]  # T[j] = z-coords of column j
    w = norm.weights
    remaining = list(range(k))
    order = []
    pivots = []
    while remaining:
        best = None
        for c in remaining:
            for i in range(n):
                if cols[c][i] != 0:
                    key = valuation(cols[c][i], p) + w[i]
                    if best is None or key < best[0]:
                        best = (key, c, i)
        if best is None:
            raise RankDeficient("subspace basis is not linearly independent")
        _, c0, i0 = best
        remaining.remove(c0)
        for c in remaining:
            if cols[c][i0] != 0:
                f = cols[c][i0] / cols[c0][i0]
                cols[c] = [a - f * b for a, b in zip(cols[c], cols[c0])]
                T[c] = [a - f * b for a, b in zip(T[c], T[c0])]
        order.append(c0)
        pivots.append(i0)
    # back-substitution: clear every other pivot row
    for a in range(len(order) - 1, -1, -1):
        ca = order[a]
        for b in range(a):
            cb = order[b]
            i0 = pivots[a]
            if cols[cb][i0] != 0:
                f = cols[cb][i0] / cols[ca][i0]
                cols[cb] = [x - f * y for x, y in zip(cols[cb], cols[ca])]
                T[cb] = [x - f * y for x, y in zip(T[cb], T[ca])]
    vecs = [T[c] for c in order]
    weights = [w[i] + valuation(cols[c][i], p) for c, i in zip(order, pivots)]
    return la.from_columns(vecs, k), weights, pivots


def restrict_finite(norm: FiniteNorm, B) -> FiniteNorm:
    T, weights, _ = split_restrict(norm, B)
    return FiniteNorm(norm.p, T, weights)


def quotient_finite(norm: FiniteNorm, B, S) -> FiniteNorm:
    """Quotient norm on E/span(B) in the coordinates y = S x."""
    _, _, pivots = split_restrict(norm, B)
    n = norm.dim
    P = [list(r) for r in norm.basis]
    rest = [r for r in range(n) if r not in pivots]
    vecs = [la.matvec(S, [P[i][r] for i in range(n)]) for r in rest]
    return FiniteNorm(norm.p, la.from_columns(vecs, len(rest)), [norm.weights[r] for r in rest])


# ---------------------------------------------------------------- archimedean place

@dataclass(frozen=True)
class ArchNorm:
    """Archimedean norm.

    kind "hermitian": ||x||^2 = (Wx)^T G (Wx) with W = diag(exp(-w_i));
    kind "max"/"sum": max or sum of |x_i| exp(-w_i);
    kind "bracket": one-dimensional, ln||1|| known only to lie in [lo, hi].
    """

    kind: str
    weights: tuple = ()
    gram: tuple | None = None
    lo: float = 0.0
    hi: float = 0.0
    # the true norm lies in [h, exp(inflate) h] for the Hermitian norm h described
    inflate: float = 0.0

    def __post_init__(self):
        if self.kind not in ("hermitian", "max", "sum", "bracket"):
            raise ValueError(f"unknown arch norm kind {self.kind!r}")
        object.__setattr__(self, "weights", _weight_tuple(self.weights))
        if self.kind == "hermitian":
            if self.gram is None:
                object.__setattr__(self, "gram", _mat_tuple(la.identity(len(self.weights))))
            else:
                object.__setattr__(self, "gram", _mat_tuple(self.gram))
                if not self.weights:
                    object.__setattr__(self, "weights", (Fraction(0),) * len(self.gram))
            la.check_square(self.gram, len(self.weights), "gram")
            G = [list(r) for r in self.gram]
            if any(G[i][j] != G[j][i] for i in range(len(G)) for j in range(len(G))):
                raise ValueError("gram matrix must be symmetric")
            if not la.is_positive_definite(G):
                raise ValueError("gram matrix must be positive definite")
        elif self.kind == "bracket":
            object.__setattr__(self, "weights", (Fraction(0),))
            if self.lo > self.hi:
                raise ValueError("empty bracket")

    @classmethod
    def hermitian(cls, gram, weights=None):
        n = len(gram)
        return cls("hermitian", weights if weights is not None else [0] * n, gram)

    @classmethod
    def standard(cls, n):
        return cls("hermitian", [0] * n, la.identity(n))

    @property
    def dim(self):
        return len(self.weights)

    def _inflation(self, k):
        """Bracket term for rank-k wedges when the true norm is only compared."""
        if not self.inflate:
            return LogValue()
        half = 0.5 * k * self.inflate
        return LogValue.real(half, half)

    @property
    def unweighted(self):
        return all(w == 0 for w in self.weights)

    @cached_property
    def float_gram(self):
        """Effective gram W G W as floats."""
        if self.kind != "hermitian":
            raise Unsupported("only Hermitian norms have a gram matrix")
        w = np.exp(-np.array([float(x) for x in self.weights]))
        G = np.array([[float(x) for x in row] for row in self.gram])
        return G * np.outer(w, w)

    @cached_property
    def is_diagonal(self):
        return self.kind != "hermitian" or la.is_diagonal(self.gram)

    def log_norm(self, x) -> LogValue:
        x = [to_fraction(c) for c in x]
        if all(c == 0 for c in x):
            raise ValueError("zero vector has no log-norm")
        if self.kind == "hermitian":
            if self.unweighted:
                G = [list(r) for r in self.gram]
                q = sum(x[i] * G[i][j] * x[j] for i in range(len(x)) for j in range(len(x)))
                return LogValue.log(q) / 2 + self._inflation(1)
            support = [i for i, c in enumerate(x) if c != 0]
            if len(support) == 1 and la.is_diagonal(self.gram):
                i = support[0]
                return (LogValue.log(x[i]) + LogValue.log(self.gram[i][i]) / 2
                        - LogValue.coerce(self.weights[i]) + self._inflation(1))
            v = np.array([float(c) for c in x])
            return (LogValue.real(0.5 * math.log(float(v @ self.float_gram @ v)), 1e-12)
                    + self._inflation(1))
        if self.kind == "bracket":
            mid = (self.lo + self.hi) / 2
            return LogValue.log(x[0]) + LogValue.real(mid, (self.hi - self.lo) / 2)
        terms = [(c, w) for c, w in zip(x, self.weights) if c != 0]
        if len(terms) == 1:
            c, w = terms[0]
            return LogValue.log(c) - LogValue.coerce(w)
        vals = [math.log(abs(float(c))) - float(w) for c, w in terms]
        if self.kind == "max":
            return LogValue.real(max(vals), 1e-12)
        return LogValue.real(math.log(sum(math.exp(v) for v in vals)), 1e-12)

    def to_json(self):
        out = {"kind": self.kind}
        if self.kind == "hermitian":
            out["gram"] = [[str(x) for x in row] for row in self.gram]
        if self.kind == "bracket":
            out["lo"], out["hi"] = self.lo, self.hi
        else:
            out["weights"] = [w.to_json() if isinstance(w, LogValue) else str(w) for w in self.weights]
        if self.inflate:
            out["inflate"] = self.inflate
        return out


# ---------------------------------------------------------------- families

@dataclass(frozen=True)
class NormFamily:
    dim: int
    arch: ArchNorm
    finite: Mapping[int, FiniteNorm] = field(default_factory=dict)
    twist: PlaceFunction = field(default_factory=PlaceFunction)

    def __post_init__(self):
        if self.dim < 0:
            raise ValueError("dimension must be nonnegative")
        if self.arch.dim != self.dim:
            raise DimensionMismatch(f"arch norm has dim {self.arch.dim}, expected {self.dim}")
        fin = {}
        for p, nm in sorted(self.finite.items()):
            if nm.dim != self.dim or nm.p != int(p):
                raise DimensionMismatch(f"finite norm at {p} does not match")
            fin[int(p)] = nm
        object.__setattr__(self, "finite", fin)

    @classmethod
    def standard(cls, n):
        return cls(n, ArchNorm.standard(n))

    @property
    def support(self):
        return sorted(self.finite)

    def norm_at(self, p):
        return self.finite.get(p) or FiniteNorm.standard(p, self.dim)

    def with_twist(self, phi: PlaceFunction) -> "NormFamily":
        return NormFamily(self.dim, self.arch, self.finite, self.twist + phi)

    def log_norm(self, x, place: Place) -> LogValue:
        """ln ||x||_w (including the twist)."""
        tw = self.twist.at(place)
        shift = LogValue.real(-tw) if isinstance(tw, float) else LogValue.rational(-tw)
        if place.is_arch:
            return self.arch.log_norm(x) + shift
        if place.p in self.finite:
            return self.finite[place.p].log_norm(x) + shift
        return LogValue({place.p: _standard_exponent([to_fraction(c) for c in x], place.p)}) + shift

    def places_for(self, x):
        """Places where ln||x|| can be nonzero."""
        primes = set(self.finite) | set(self.twist.finite)
        for c in x:
            c = to_fraction(c)
            if c != 0:
                primes.update(p for p, _ in factor_int(c.numerator))
                primes.update(p for p, _ in factor_int(c.denominator))
        return [Place.arch()] + [Place.finite(p) for p in sorted(primes)]

    def to_json(self):
        out = {"dim": self.dim, "arch": self.arch.to_json(),
               "finite": {str(p): nm.to_json() for p, nm in self.finite.items()}}
        if not self.twist.is_zero():
            out["twist"] = self.twist.to_json()
        return out

    @classmethod
    def from_json(cls, obj, path="family"):
        if not isinstance(obj, dict):
            raise SchemaError("norm family must be an object", path)
        try:
            n = int(obj["dim"])
        except (KeyError, TypeError, ValueError):
            raise SchemaError("missing or invalid 'dim'", path + ".dim") from None
        arch_obj = obj.get("arch", {"kind": "hermitian"})
        kind = arch_obj.get("kind", "hermitian")
        apath = path + ".arch"
        try:
            weights = [parse_rational(w, f"{apath}.weights[{i}]")
                       for i, w in enumerate(arch_obj.get("weights", [0] * n))]
            if kind == "hermitian":
                gram = arch_obj.get("gram")
                if gram is None:
                    gram = la.identity(n)
                gram = [[parse_rational(x, f"{apath}.gram[{i}][{j}]") for j, x in enumerate(row)]
                        for i, row in enumerate(gram)]
                arch = ArchNorm("hermitian", weights, gram)
            elif kind in ("max", "sum"):
                arch = ArchNorm(kind, weights)
            else:
                raise SchemaError(f"unknown arch kind {kind!r}", apath + ".kind")
        except (ValueError, DimensionMismatch) as exc:
            if isinstance(exc, SchemaError):
                raise
            raise SchemaError(str(exc), apath) from None
        fin = {}
        for p, spec in obj.get("finite", {}).items():
            fpath = f"{path}.finite.{p}"
            try:
                pp = int(p)
                w = [parse_rational(x, f"{fpath}.weights[{i}]") for i, x in enumerate(spec["weights"])]
                basis = spec.get("basis") or la.identity(len(w))
                basis = [[parse_rational(x, f"{fpath}.basis") for x in row] for row in basis]
                fin[pp] = FiniteNorm(pp, basis, w)
            except SchemaError:
                raise
            except (KeyError, ValueError, TypeError, DimensionMismatch, RankDeficient) as exc:
                raise SchemaError(str(exc), fpath) from None
        twist = PlaceFunction.from_json(obj.get("twist"), path + ".twist")
        try:
            return cls(n, arch, fin, twist)
        except DimensionMismatch as exc:
            raise SchemaError(str(exc), path) from None


# ---------------------------------------------------------------- wedge norms

def wedge_log_norm(xi: NormFamily, B) -> LogValue:
    """sum over places of ln||b_1 ^ ... ^ b_k|| for the columns of B.

    The negative of this is the Arakelov degree of span(B) with the restricted
    norms.  Exact except for weighted or non-Hermitian archimedean data, where
    the float part carries a certified error.
    """
    B = [[to_fraction(x) for x in row] for row in B]
    n, k = la.shape(B)
    if k == 0:
        return LogValue()
    coord = _coordinate_columns(B)
    if coord is not None and all(nm.is_diagonal for nm in xi.finite.values()):
        return _coordinate_wedge(xi, B, coord)
    la.check_full_column_rank(B)
    mins = la.minors(B)
    total = LogValue()
    for p, nm in xi.finite.items():
        C = la.matmul(nm.inv, B)
        best = None
        for I in combinations(range(n), k):
            d = la.det([C[i] for i in I])
            if d != 0:
                e = -valuation(d, p) - sum((nm.weights[i] for i in I), Fraction(0))
                if best is None or e > best:
                    best = e
        total = total + LogValue({p: best})
    g = la.rational_gcd(mins.values())
    for q, e in rational_factor(g).items():
        if q not in xi.finite:
            total = total + LogValue({q: -e})
    total = total + arch_wedge_log_norm(xi.arch, B)
    return total - integrate_place_function(xi.twist) * k


def _coordinate_wedge(xi: NormFamily, B, coord) -> LogValue:
    """Fast path: columns are multiples of distinct standard vectors, finite norms diagonal."""
    k = len(coord)
    total = LogValue()
    for p, nm in xi.finite.items():
        e = Fraction(0)
        for i, s in coord:
            e += -valuation(s / nm.basis[i][i], p) - nm.weights[i]
        total = total + LogValue({p: e})
    prod = Fraction(1)
    for _, s in coord:
        prod *= s
    for q, e in rational_factor(abs(prod)).items():
        if q not in xi.finite:
            total = total + LogValue({q: -e})
    total = total + arch_wedge_log_norm(xi.arch, B)
    return total - integrate_place_function(xi.twist) * k


def arch_wedge_log_norm(arch: ArchNorm, B) -> LogValue:
    n, k = la.shape(B)
    if arch.kind == "bracket":
        mid = (arch.lo + arch.hi) / 2
        return LogValue.log(B[0][0]) + LogValue.real(mid, (arch.hi - arch.lo) / 2)
    coord = _coordinate_columns(B)
    if arch.kind == "hermitian":
        G = [list(r) for r in arch.gram]
        infl = arch._inflation(k)
        if coord is not None and la.is_diagonal(G):
            return sum((LogValue.log(s) + LogValue.log(G[i][i]) / 2 - LogValue.coerce(arch.weights[i])
                        for i, s in coord), LogValue()) + infl
        if arch.unweighted:
            return LogValue.log(la.det(la.matmul(la.transpose(B), la.matmul(G, B)))) / 2 + infl
        Bf = np.array([[float(x) for x in row] for row in B])
        val = 0.5 * np.linalg.slogdet(Bf.T @ arch.float_gram @ Bf)[1]
        return LogValue.real(val, 1e-9 * (1 + abs(val))) + infl
    # weighted max / sum
    if coord is not None:
        exact = sum((LogValue.log(s) - LogValue.coerce(arch.weights[i]) for i, s in coord), LogValue())
        if arch.kind == "sum" or k == 1:
            return exact
        # max norm on a k-dim coordinate block: wedge norm in [k^{-k/2}, 1] times the weights
        half = 0.25 * k * math.log(k)
        return exact + LogValue.real(-half, half)
    # compare with the Hermitian norm diag(exp(-2w)):
    # ||.||_max <= ||.||_2 <= sqrt(n) ||.||_max and ||.||_2 <= ||.||_sum <= sqrt(n) ||.||_2
    herm = ArchNorm("hermitian", arch.weights, la.identity(n))
    base = arch_wedge_log_norm(herm, B)
    half = 0.25 * k * math.log(n)
    if arch.kind == "max":
        return base + LogValue.real(-half, half)
    return base + LogValue.real(half, half)


def _coordinate_columns(B):
    """If every column is a multiple of a distinct standard vector, return [(row, scale)]."""
    out = []
    used = set()
    for col in la.columns(B):
        nz = [i for i, x in enumerate(col) if x != 0]
        if len(nz) != 1 or nz[0] in used:
            return None
        used.add(nz[0])
        out.append((nz[0], col[nz[0]]))
    return out


# ---------------------------------------------------------------- constructions

def dual_norm(xi: NormFamily) -> NormFamily:
    fin = {}
    for p, nm in xi.finite.items():
        Pinv_T = la.transpose(nm.inv)
        fin[p] = FiniteNorm(p, Pinv_T, [-w for w in nm.weights])
    a = xi.arch
    if a.kind == "hermitian":
        arch = ArchNorm("hermitian", [-w for w in a.weights], la.inverse([list(r) for r in a.gram]),
                        inflate=a.inflate)
    elif a.kind == "max":
        arch = ArchNorm("sum", [-w for w in a.weights])
    elif a.kind == "sum":
        arch = ArchNorm("max", [-w for w in a.weights])
    else:
        arch = ArchNorm("bracket", lo=-a.hi, hi=-a.lo)
    return NormFamily(xi.dim, arch, fin, -xi.twist)


def quotient_coordinates(B):
    """(complement indices C, matrix S) with y = S x the coordinates of x mod span(B)
    in the basis given by the images of e_c, c in C."""
    n, k = la.shape(B)
    C = la.complement_indices(B)
    M = [list(B[i]) + [Fraction(int(i == c)) for c in C] for i in range(n)]
    Minv = la.inverse(M)
    return C, Minv[k:]


def sub_quotient_norm(xi: NormFamily, subspace_basis, mode: str = "restrict") -> NormFamily:
    """Restriction to span(B) (coordinates w.r.t. B) or quotient E/span(B)
    (coordinates from :func:`quotient_coordinates`)."""
    B = [[to_fraction(x) for x in row] for row in subspace_basis]
    n, k = la.shape(B)
    if n != xi.dim:
        raise DimensionMismatch("subspace basis has the wrong number of rows")
    la.check_full_column_rank(B)
    if mode not in ("restrict", "quotient"):
        raise ValueError("mode must be 'restrict' or 'quotient'")
    if mode == "restrict":
        primes = set(xi.finite) | la.prime_support_of_matrix(B)
        fin = {}
        for p in sorted(primes):
            nm = restrict_finite(xi.norm_at(p), B)
            if p in xi.finite or not nm.is_standard():
                fin[p] = nm
        arch = _restrict_arch(xi.arch, B)
        return NormFamily(k, arch, fin, xi.twist)
    C, S = quotient_coordinates(B)
    primes = set(xi.finite) | la.prime_support_of_matrix(S)
    fin = {}
    for p in sorted(primes):
        nm = quotient_finite(xi.norm_at(p), B, S)
        if p in xi.finite or not nm.is_standard():
            fin[p] = nm
    arch = _quotient_arch(xi.arch, B, C)
    return NormFamily(n - k, arch, fin, xi.twist)


def _restrict_arch(a: ArchNorm, B):
    n, k = la.shape(B)
    coord = _coordinate_columns(B)
    if a.kind == "hermitian":
        if a.unweighted:
            G = [list(r) for r in a.gram]
            return ArchNorm("hermitian", [0] * k, la.matmul(la.transpose(B), la.matmul(G, B)),
                            inflate=a.inflate)
        if coord is not None and all(s in (1, -1) for _, s in coord):
            idx = [i for i, _ in coord]
            return ArchNorm("hermitian", [a.weights[i] for i in idx],
                            [[a.gram[i][j] for j in idx] for i in idx], inflate=a.inflate)
        raise Unsupported("restriction of a weighted Hermitian norm to a non-coordinate subspace")
    if a.kind in ("max", "sum") and coord is not None and all(s in (1, -1) for _, s in coord):
        return ArchNorm(a.kind, [a.weights[i] for i, _ in coord])
    raise Unsupported(f"restriction of a {a.kind} norm to a non-coordinate subspace")


def _quotient_arch(a: ArchNorm, B, C):
    n, k = la.shape(B)
    if a.kind == "hermitian" and a.unweighted:
        G = [list(r) for r in a.gram]
        M = [list(B[i]) + [Fraction(int(i == c)) for c in C] for i in range(n)]
        H = la.matmul(la.transpose(M), la.matmul(G, M))
        HFF = [row[:k] for row in H[:k]]
        HFC = [row[k:] for row in H[:k]]
        HCF = [row[:k] for row in H[k:]]
        HCC = [row[k:] for row in H[k:]]
        corr = la.matmul(HCF, la.matmul(la.inverse(HFF), HFC))
        return ArchNorm("hermitian", [0] * (n - k),
                        [[HCC[i][j] - corr[i][j] for j in range(n - k)] for i in range(n - k)],
                        inflate=a.inflate)
    coord = _coordinate_columns(B)
    if coord is not None:
        F = {i for i, _ in coord}
        if a.kind in ("max", "sum") or (a.kind == "hermitian" and la.is_diagonal(a.gram)):
            rest = [i for i in range(n) if i not in F]
            if a.kind == "hermitian":
                return ArchNorm("hermitian", [a.weights[i] for i in rest],
                                [[a.gram[i][j] for j in rest] for i in rest], inflate=a.inflate)
            return ArchNorm(a.kind, [a.weights[i] for i in rest])
    raise Unsupported(f"quotient of a {a.kind} norm by a non-coordinate subspace")


def determinant_norm(xi: NormFamily) -> NormFamily:
    """Norm family on Lambda^n E in the coordinate of e_1 ^ ... ^ e_n."""
    n = xi.dim
    fin = {}
    for p, nm in xi.finite.items():
        # e_1^...^e_n = det(P)^{-1} (P e_1 ^ ... ^ P e_n)
        dP = la.det([list(r) for r in nm.basis])
        fin[p] = FiniteNorm(p, [[dP]], [sum(nm.weights, Fraction(0))])
    ident = la.identity(n)
    a = xi.arch
    if a.kind == "hermitian" and a.unweighted and not a.inflate:
        arch = ArchNorm("hermitian", [0], [[la.det([list(r) for r in a.gram])]])
    elif a.kind == "hermitian" and la.is_diagonal(a.gram) and not a.inflate:
        arch = ArchNorm("hermitian", [_wsum(a.weights)], [[la.det([list(r) for r in a.gram])]])
    elif a.kind == "sum":
        arch = ArchNorm("max", [_wsum(a.weights)])
    else:
        v = arch_wedge_log_norm(a, ident)
        c = float(v)
        arch = ArchNorm("bracket", lo=c - v.err, hi=c + v.err)
    return NormFamily(1, arch, fin, xi.twist * n)


def tensor_eps_pi(xi1: NormFamily, xi2: NormFamily) -> NormFamily:
    """epsilon-tensor at finite places, pi-tensor at infinity, for diagonal families."""
    n1, n2 = xi1.dim, xi2.dim
    fin = {}
    for p in sorted(set(xi1.finite) | set(xi2.finite)):
        a, b = xi1.norm_at(p), xi2.norm_at(p)
        if not (a.is_diagonal and b.is_diagonal):
            raise Unsupported("tensor product needs diagonal orthogonality bases")
        da = [a.basis[i][i] for i in range(n1)]
        db = [b.basis[j][j] for j in range(n2)]
        fin[p] = FiniteNorm(p, la.diag([x * y for x in da for y in db]),
                            [wa + wb for wa in a.weights for wb in b.weights])
    a1, a2 = xi1.arch, xi2.arch
    ws = [x + y for x in a1.weights for y in a2.weights]
    if a1.kind == "sum" and a2.kind == "sum":
        arch = ArchNorm("sum", ws)
    elif a1.kind == "hermitian" and a2.kind == "hermitian" and (n1 == 1 or n2 == 1):
        G = [[a1.gram[i][k] * a2.gram[j][l] for k in range(n1) for l in range(n2)]
             for i in range(n1) for j in range(n2)]
        arch = ArchNorm("hermitian", ws, G)
    elif {a1.kind, a2.kind} == {"sum", "hermitian"}:
        # a rank-one Hermitian factor with unit gram just rescales the other factor
        one, many = (a2, a1) if a1.kind == "sum" else (a1, a2)
        if one.dim != 1 or one.gram[0][0] != 1:
            raise Unsupported("pi-tensor of a weighted sum with a Hermitian norm needs "
                              "a rank-one unit-gram Hermitian factor")
        arch = ArchNorm("sum", ws)
    else:
        raise Unsupported("pi-tensor is only implemented for weighted-sum norms "
                          "or a Hermitian factor of rank one")
    return NormFamily(n1 * n2, arch, fin, xi1.twist + xi2.twist)


def metric_distance(xi1: NormFamily, xi2: NormFamily, place: Place) -> LogValue:
    """sup_x |ln(||x||_1 / ||x||_2)| at one place (twists included)."""
    if xi1.dim != xi2.dim:
        raise DimensionMismatch("families have different dimensions")
    tw = xi1.twist.at(place) - xi2.twist.at(place)
    if place.is_arch:
        d = _arch_distance(xi1.arch, xi2.arch, float(tw) if isinstance(tw, float) else tw)
        return d
    p = place.p
    a, b = xi1.norm_at(p), xi2.norm_at(p)
    # ||x||_a / ||x||_b is maximised on an orthogonality basis of b (ultrametric)
    up = _max_ratio_exponent(a, b)
    down = _max_ratio_exponent(b, a)
    tw = to_fraction(tw)
    # twist scales norm 1 by e^{-phi1}, norm 2 by e^{-phi2}
    cand = [LogValue({p: up}) - LogValue.rational(tw), LogValue({p: down}) + LogValue.rational(tw)]
    return max(cand[0], cand[1], LogValue())


def _max_ratio_exponent(a: FiniteNorm, b: FiniteNorm):
    # sup ||x||_a/||x||_b = max over b-orthogonal basis vectors (ultrametric)
    P = [list(r) for r in b.basis]
    best = None
    for j in range(b.dim):
        col = [P[i][j] for i in range(b.dim)]
        e = a.exponent(col) - b.exponent(col)
        if best is None or e > best:
            best = e
    return best


def _arch_distance(a: ArchNorm, b: ArchNorm, tw):
    if a.kind == "hermitian" and b.kind == "hermitian":
        if a.unweighted and b.unweighted and la.is_diagonal(a.gram) and la.is_diagonal(b.gram):
            ratios = [LogValue.log(a.gram[i][i] / b.gram[i][i]) / 2 for i in range(a.dim)]
            sh = LogValue.coerce(-tw if isinstance(tw, float) else -to_fraction(tw))
            cand = [r + sh for r in ratios] + [-(r + sh) for r in ratios]
            return _lv_maxof(cand + [LogValue()])
        # generalised eigenvalues of G1 relative to G2
        import scipy.linalg
        ev = scipy.linalg.eigh(a.float_gram, b.float_gram, eigvals_only=True)
        hi = 0.5 * math.log(max(ev)) - float(tw)
        lo = 0.5 * math.log(min(ev)) - float(tw)
        return LogValue.real(max(hi, -lo, 0.0), 1e-9)
    if a.kind in ("max", "sum") and b.kind == a.kind:
        diffs = [float(wb - wa) for wa, wb in zip(a.weights, b.weights)]
        return LogValue.real(max(max(d - float(tw) for d in diffs),
                                 max(-(d - float(tw)) for d in diffs), 0.0))
    raise Unsupported("metric distance between these archimedean norm kinds")


def _lv_maxof(vals):
    best = vals[0]
    for v in vals[1:]:
        if v > best:
            best = v
    return best


def delta_bound_check(xi: NormFamily) -> dict:
    """Rank-only upper bounds for ln Delta and ln delta, per place and summed."""
    r = xi.dim
    rlnr = LogValue({}) if r <= 1 else LogValue(dict((p, e * r) for p, e in rational_factor(r).items()))
    half_lnr = LogValue() if r <= 1 else LogValue.log(r) / 2
    finite_delta = {p: rlnr for p in xi.support}
    arch_Delta = half_lnr
    arch_delta = rlnr / 2
    total_Delta = sum(finite_delta.values(), LogValue()) + arch_Delta
    return {
        "rank": r,
        "ln_Delta_finite": finite_delta,
        "ln_Delta_arch": arch_Delta,
        "ln_delta_finite": {p: LogValue() for p in xi.support},
        "ln_delta_arch": arch_delta,
        "Delta": total_Delta,
        "delta": arch_delta,
    }
