"""Okounkov data of a graded series: the values g(n, alpha), the body and the
concave transform.

For one-dimensional series the Okounkov body is an interval and the concave
transform is approximated by the least concave majorant of the points
(alpha/n, g(n, alpha)/n).  Points with the same alpha/n coming from different
levels are merged by keeping the largest value, which is the Fekete
refinement along rays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import linalg as la
from .adelic_curve import LogValue
from .bundles import hn_filtration
from .divisor_series import GradedSeries
from .errors import EmptySpace, NotBig, UnboundedBelow
from .piecewise import PL, compose_integral, concave_majorant


HULL_TOL = 1e-12


def valuation_pivots(S: GradedSeries, n: int, cap: int = 4) -> dict:
    """{alpha: g(n, alpha)} as exact LogValues where possible."""
    if S.dim(n) == 0:
        raise EmptySpace(f"H^0 at level {n} is zero")
    alphas = S.valuations(n)
    if S.is_diagonal:
        return dict(zip(alphas, S.line_degrees(n)))
    E = S.bundle(n)
    hn = hn_filtration(E, cap=cap)
    out = {}
    for t, B in zip(hn.breakpoints, hn.subspaces):
        for j in _pivot_indices(B):
            out.setdefault(alphas[j], t)
    return out


def _pivot_indices(B):
    """Smallest-index pivots of span(B): the valuations realised by the subspace."""
    R, piv = la.rref(la.transpose(B))
    return piv


def g_values(S: GradedSeries, n: int) -> list:
    """Float g(n, alpha) aligned with ``S.valuations(n)``."""
    if S.is_diagonal:
        return S.float_line_degrees(n)
    piv = valuation_pivots(S, n)
    return [float(piv[a]) for a in S.valuations(n)]


@dataclass
class OkounkovData:
    gamma: dict  # n -> list of valuations
    g_table: dict  # (n, alpha) -> float
    body: tuple  # (lo, hi) hull of alpha/n, Fractions

    @property
    def length(self):
        return self.body[1] - self.body[0]


def _check_big(S: GradedSeries):
    if S.divisor.degree() <= 0:
        raise NotBig("divisor degree must be positive")


def okounkov_data(S: GradedSeries, n_max: int, n_min: int = 1) -> OkounkovData:
    _check_big(S)
    gamma, table = {}, {}
    lo = hi = None
    for n in range(n_min, n_max + 1):
        al = S.valuations(n)
        gamma[n] = list(al)
        if not al:
            continue
        for a, g in zip(al, g_values(S, n)):
            table[(n, a)] = g
        a_lo, a_hi = Fraction(al[0], n), Fraction(al[-1], n)
        lo = a_lo if lo is None else min(lo, a_lo)
        hi = a_hi if hi is None else max(hi, a_hi)
    if lo is None:
        raise NotBig(f"no sections for n <= {n_max}")
    return OkounkovData(gamma, table, (lo, hi))


def okounkov_body(S: GradedSeries, n_max: int):
    """Convex hull of alpha/n over n <= n_max; the true body lies within 1/n_max outside it."""
    _check_big(S)
    lo = hi = None
    for n in range(1, n_max + 1):
        al = S.valuations(n)
        if al:
            a_lo, a_hi = Fraction(al[0], n), Fraction(al[-1], n)
            lo = a_lo if lo is None else min(lo, a_lo)
            hi = a_hi if hi is None else max(hi, a_hi)
    if lo is None:
        raise NotBig(f"no sections for n <= {n_max}")
    return lo, hi


@dataclass
class ConcaveTransformApprox:
    n_used: int
    envelope: PL
    lower_envelope: PL
    body: tuple
    inf_value: float
    sup_value: float
    delta_n: float
    grid_error: float
    points: dict = field(repr=False, default_factory=dict)  # x -> refined value

    def level_set(self, t):
        return self.envelope.level_set(t)

    def level_sets(self, ts):
        return {t: self.level_set(t) for t in ts}

    def to_json(self):
        return {
            "n_used": self.n_used,
            "body": [str(self.body[0]), str(self.body[1])],
            "knots": self.envelope.to_json(),
            "lower_knots": self.lower_envelope.to_json(),
            "inf": self.inf_value,
            "sup": self.sup_value,
            "grid_error": self.grid_error,
        }


def concave_transform(S: GradedSeries, n_max: int, n_min: int = 1) -> ConcaveTransformApprox:
    data = okounkov_data(S, n_max, n_min)
    best, best_lower = {}, {}
    for (n, a), g in data.g_table.items():
        x = Fraction(a, n)
        v = g / n
        lv = (g - S.delta(n)) / n
        if x not in best or v > best[x]:
            best[x] = v
        if x not in best_lower or lv > best_lower[x]:
            best_lower[x] = lv
    env = concave_majorant(best.items(), HULL_TOL)
    lower = concave_majorant(best_lower.items(), HULL_TOL)
    slopes = env.slopes() or [0.0]
    lip = max(abs(s) for s in slopes)
    mag = max(abs(y) for y in env.ys)
    length = float(env.length)
    grid = (length * lip + 2 * mag) / n_max
    T = ConcaveTransformApprox(n_max, env, lower, data.body, min(env.ys), max(env.ys),
                               S.delta(n_max), grid, best)
    if not math.isfinite(T.inf_value) or T.inf_value < -1e12:
        raise UnboundedBelow("concave transform estimate diverges")
    return T


def level_set_volume(T: ConcaveTransformApprox, t) -> float:
    ls = T.envelope.level_set(t)
    if ls is None:
        return 0.0
    return float(ls[1] - ls[0])


def vol_I(T: ConcaveTransformApprox):
    """(integral of the envelope over the body, error bound)."""
    if not math.isfinite(T.inf_value):
        raise UnboundedBelow("infimum of the concave transform is -inf")
    value = float(T.envelope.integral())
    err = T.grid_error + float(T.envelope.length) * T.delta_n / T.n_used
    return value, err


def _encode_exact(by_level):
    """Integer rows (coefficient of ln p for each prime, constant) over a common denominator."""
    primes = sorted({p for _, vals in by_level.values() for v in vals for p in v.finite})
    den = 1
    for _, vals in by_level.values():
        for v in vals:
            if v.arch or v.err:
                raise ValueError("exact comparison needs finite-only values")
            for q in list(v.finite.values()) + [v.const]:
                den = math.lcm(den, q.denominator)
    rows = {}
    for n, (al, vals) in by_level.items():
        rows[n] = np.array([[int(v.finite.get(p, 0) * den) for p in primes] + [int(v.const * den)]
                            for v in vals], dtype=np.int64).reshape(len(vals), len(primes) + 1)
    weights = np.array([math.log(p) for p in primes] + [1.0]) / den
    return primes, den, rows, weights


def superadditivity_violations(S: GradedSeries, n_total: int, tol: float = 1e-9):
    """Count pairs with g(n+m, a+b) < g(n,a) + g(m,b) - delta(n) - delta(m) - tol.

    Diagonal finite-only models have delta = 0 and exact g values; there the
    comparison is exact and ``tol`` is ignored.
    """
    exact = S.is_diagonal and S.green.is_finite_only
    by_level = {}
    for n in range(1, n_total + 1):
        vals = S.line_degrees(n) if exact else g_values(S, n)
        by_level[n] = (list(S.valuations(n)), vals)
    if exact:
        primes, den, rows, weights = _encode_exact(by_level)
    else:
        rows = {n: np.asarray(vals, dtype=float) for n, (_, vals) in by_level.items()}
    # dense lookup of level n by valuation: index alpha - lo, -1 where absent
    lookup = {}
    for n, (al, _) in by_level.items():
        if al:
            lo = min(al)
            idx = np.full(max(al) - lo + 1, -1)
            idx[np.asarray(al) - lo] = np.arange(len(al))
            lookup[n] = (lo, idx)
    bad, checked = [], 0
    for n in range(1, n_total):
        for m in range(n, n_total - n + 1):
            if n not in lookup or m not in lookup or n + m not in lookup:
                continue
            A = np.asarray(by_level[n][0])
            B = np.asarray(by_level[m][0])
            lo, idx = lookup[n + m]
            pos = A[:, None] + B[None, :] - lo
            inside = (pos >= 0) & (pos < len(idx))
            j = np.where(inside, idx[np.clip(pos, 0, len(idx) - 1)], -1)
            ii, jj = np.nonzero(j >= 0)
            if not len(ii):
                continue
            checked += len(ii)
            if exact:
                d = rows[n + m][j[ii, jj]] - rows[n][ii] - rows[m][jj]
                nz = np.nonzero(d.any(axis=1))[0]
                approx = d[nz] @ weights
                low = []
                for r, x in zip(nz, approx):
                    if abs(x) > 1e-6:
                        neg = x < 0
                    else:
                        lv = LogValue({p: Fraction(int(c), den) for p, c in zip(primes, d[r][:-1])},
                                      Fraction(int(d[r][-1]), den))
                        neg = lv.sign() < 0
                    if neg:
                        low.append(r)
                low = np.asarray(low, dtype=int)
            else:
                slack = S.delta(n) + S.delta(m) + tol
                d = rows[n + m][j[ii, jj]] - rows[n][ii] - rows[m][jj]
                low = np.nonzero(d < -slack)[0]
            for r in low:
                bad.append((n, int(A[ii[r]]), m, int(B[jj[r]])))
    return {"checked": checked, "violations": len(bad), "examples": bad[:5], "exact": exact}


def multiset_identity(S: GradedSeries, n: int, cap: int = 4) -> bool:
    """sorted g(n, .) equals the sorted HN slopes of E_n."""
    piv = valuation_pivots(S, n, cap)
    hn = hn_filtration(S.bundle(n), cap=cap)
    a = sorted(piv.values(), key=float)
    b = sorted(hn.slopes, key=float)
    return len(a) == len(b) and all(x == y for x, y in zip(a, b))


def counterexample_means(ns):
    """Means of eta_n = (1/r) delta_{-r} + ((r-1)/r) delta_1 with r_n = n (exact)."""
    out = []
    for n in ns:
        r = Fraction(n)
        out.append((n, (1 / r) * (-r) + ((r - 1) / r) * 1))
    return out


def distribution_convergence_check(S: GradedSeries, f: PL, n_max: int, T=None) -> dict:
    T = T or concave_transform(S, n_max)
    vals = g_values(S, n_max)
    lhs = sum(_apply(f, g / n_max) for g in vals) / len(vals)
    length = float(T.envelope.length)
    if length > 0:
        rhs = compose_integral(f, T.envelope) / length
    else:
        rhs = _apply(f, T.envelope.ys[0])
    ns = [1, 2, 5, 10, 100, 1000]
    means = counterexample_means(ns)
    return {
        "n": n_max,
        "empirical": lhs,
        "limit": rhs,
        "gap": abs(lhs - rhs),
        "counterexample": {
            "means": [(n, str(m)) for n, m in means],
            "means_limit": "0",
            "weak_limit_mean": "1",
            "gap": "1",
        },
    }


def _apply(f: PL, y):
    if y <= f.lo:
        return float(f.ys[0])
    if y >= f.hi:
        return float(f.ys[-1])
    return float(f(Fraction(y) if not isinstance(y, float) else y))
