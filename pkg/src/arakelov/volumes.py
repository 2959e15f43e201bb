"""Volume estimators and the experiments built on them (curve case, d = 1).

Every asymptotic quantity is reported as a sequence, a point estimate, a
bracket and, where it makes sense, an a + b/n fit.  Degrees on diagonal
models are exact LogValues; brackets come from the norm comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .adelic_curve import LogValue, PlaceFunction, integrate_place_function, lv_sum, to_fraction
from . import linalg as la
from .bundles import (arakelov_degree, positive_degree_bracket, quotient_bundle, subspace_degree,
                      twist_by_phi)
from .divisor_series import GradedSeries, coordinates_in_level
from .errors import ModeMismatch, NotBig, ScheduleEmpty
from .okounkov import concave_transform, vol_I
from .piecewise import PL, product_integral, uniform_sum_density

D_PLUS_ONE = 2  # (d + 1)! / n^(d + 1) normalisation with d = 1


@dataclass
class VolumeEstimate:
    kind: str
    sequence: list  # (n, value, lo, hi)
    point_estimate: float
    bracket: tuple
    extrapolation: Optional[tuple] = None  # (a, b) for a + b/n

    def __post_init__(self):
        lo, hi = self.bracket
        if not lo - 1e-12 <= self.point_estimate <= hi + 1e-12:
            raise ValueError("point estimate outside its bracket")

    def contains(self, x, slack=0.0):
        return self.bracket[0] - slack <= x <= self.bracket[1] + slack

    @property
    def width(self):
        return self.bracket[1] - self.bracket[0]

    def to_json(self):
        return {
            "kind": self.kind,
            "sequence": [list(r) for r in self.sequence],
            "point_estimate": self.point_estimate,
            "bracket": list(self.bracket),
            "extrapolation": list(self.extrapolation) if self.extrapolation else None,
        }


def _check_big(S: GradedSeries):
    if S.divisor.degree() <= 0:
        raise NotBig("divisor degree must be positive")


def _exact_line_model(S: GradedSeries) -> bool:
    # l2 and l1 norms are exact on coordinate vectors; circle needs a bracket
    return S.is_diagonal and S.green.arch.kind in ("l2", "l1")


def level_degree(S: GradedSeries, n: int) -> LogValue:
    """deg(E_n, xi_ng), with a certified error for bracketed archimedean data."""
    if S.dim(n) == 0:
        return LogValue()
    if _exact_line_model(S):
        return lv_sum(S.line_degrees(n))
    return arakelov_degree(S.bundle(n))


def level_positive_degree(S: GradedSeries, n: int):
    """(lo, hi) floats bracketing deg_+(E_n)."""
    if S.dim(n) == 0:
        return 0.0, 0.0
    if _exact_line_model(S):
        pos = lv_sum(d for d in S.line_degrees(n) if d.sign() > 0)
        return float(pos), float(pos)
    lo, hi = positive_degree_bracket(S.bundle(n))
    return float(lo) - lo.err, float(hi) + hi.err


def fit_tail(seq):
    """Least-squares a + b/n over the second half of the sequence."""
    if len(seq) < 3:
        return None
    n_last = seq[-1][0]
    tail = [r for r in seq if 2 * r[0] >= n_last] or seq
    if len(tail) < 2:
        tail = seq[-3:]
    x = np.array([1.0 / r[0] for r in tail])
    y = np.array([r[1] for r in tail])
    A = np.vstack([np.ones_like(x), x]).T
    (a, b), *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(a), float(b)


def _estimate(kind, seq):
    n, v, lo, hi = seq[-1]
    fit = fit_tail(seq)
    if fit is not None:
        drift = abs(v - fit[0])
        centre_lo, centre_hi = min(v, fit[0]), max(v, fit[0])
    else:
        drift = abs(v - seq[-2][1]) if len(seq) > 1 else 0.0
        centre_lo = centre_hi = v
    bracket = (centre_lo - 3 * drift - (v - lo), centre_hi + 3 * drift + (hi - v))
    return VolumeEstimate(kind, seq, v, bracket, fit)


def _levels(n_max, ns):
    if ns is None:
        return list(range(1, n_max + 1))
    ns = sorted(set(int(n) for n in ns if 1 <= n <= n_max))
    if not ns or ns[-1] != n_max:
        ns.append(n_max)
    return ns


def vol_chi_estimate(S: GradedSeries, n_max: int, ns=None) -> VolumeEstimate:
    _check_big(S)
    seq = []
    for n in _levels(n_max, ns):
        d = level_degree(S, n)
        c = D_PLUS_ONE / n ** 2
        v = float(d) * c
        seq.append((n, v, v - d.err * c, v + d.err * c))
    return _estimate("vol_chi", seq)


def vol_estimate(S: GradedSeries, n_max: int, ns=None) -> VolumeEstimate:
    _check_big(S)
    seq = []
    for n in _levels(n_max, ns):
        lo, hi = level_positive_degree(S, n)
        c = D_PLUS_ONE / n ** 2
        seq.append((n, lo * c, lo * c, hi * c))
    return _estimate("vol", seq)


def vol_I_estimate(S: GradedSeries, n_max: int, ns=None) -> VolumeEstimate:
    _check_big(S)
    if ns is None:
        ns = [m for m in (n_max // 8, n_max // 4, n_max // 2) if m >= 1]
    seq = []
    for n in _levels(n_max, ns):
        v, err = vol_I(concave_transform(S, n))
        seq.append((n, v, v - err, v + err))
    n, v, lo, hi = seq[-1]
    return VolumeEstimate("vol_I", seq, v, (lo, hi), fit_tail(seq))


def chi_vs_I_check(S: GradedSeries, n_max: int) -> dict:
    """vol_chi = 2 vol_I when inf G is finite, within the combined brackets."""
    chi = vol_chi_estimate(S, n_max)
    vi = vol_I_estimate(S, n_max, ns=[n_max])
    lo, hi = D_PLUS_ONE * vi.bracket[0], D_PLUS_ONE * vi.bracket[1]
    ok = chi.bracket[0] <= hi and lo <= chi.bracket[1]
    return {"vol_chi": chi.point_estimate, "vol_chi_bracket": list(chi.bracket),
            "two_vol_I": D_PLUS_ONE * vi.point_estimate, "two_vol_I_bracket": [lo, hi],
            "pass": ok}


def vol_vs_positive_part(S: GradedSeries, n_max: int) -> dict:
    """vol = 2 * integral of max(G, 0) within brackets."""
    vol = vol_estimate(S, n_max)
    T = concave_transform(S, n_max)
    v, err = vol_I(T)
    target = D_PLUS_ONE * float(T.envelope.positive_part_integral(0.0))
    slack = D_PLUS_ONE * err
    ok = vol.bracket[0] - slack <= target <= vol.bracket[1] + slack
    return {"vol": vol.point_estimate, "bracket": list(vol.bracket), "two_int_G_plus": target,
            "slack": slack, "pass": ok}


# ---------------------------------------------------------------- shift identity

def shift_identity_check(S: GradedSeries, phi: PlaceFunction, n_max: int, ns=None) -> dict:
    """deg(E_n, e^{-n phi} xi) = deg(E_n, xi) + n dim(E_n) int(phi), exactly, for every n."""
    I = integrate_place_function(phi)
    violations, offsets = [], []
    for n in _levels(n_max, ns):
        if S.dim(n) == 0:
            continue
        E = S.bundle(n)
        lhs = arakelov_degree(twist_by_phi(E, phi * n))
        base = arakelov_degree(E)
        offset = I * (n * E.dim)
        if not lhs.identical(base + offset):
            violations.append(n)
        offsets.append((n, offset))
    # estimator level: vol_chi(D, g + phi) - vol_chi(D, g) -> 2 vol(D) int(phi)
    n = n_max
    est_gap = D_PLUS_ONE * float(I) * S.dim(n) / n
    limit_gap = D_PLUS_ONE * float(S.divisor.degree()) * float(I)
    return {"violations": violations, "pass": not violations, "offsets": offsets,
            "estimator_gap": est_gap, "limit_gap": limit_gap,
            "estimator_drift": abs(est_gap - limit_gap)}


# ---------------------------------------------------------------- homogeneity

def homogeneity_check(S: GradedSeries, alpha, n_max: int, rel_tol: float | None = None) -> dict:
    _check_big(S)
    alpha = to_fraction(alpha)
    T1 = concave_transform(S, n_max)
    Sa = S if alpha == 1 else S.scale(alpha)
    T2 = concave_transform(Sa, n_max)
    v1, e1 = vol_I(T1)
    v2, e2 = vol_I(T2)
    a = float(alpha)
    target = a ** D_PLUS_ONE * v1
    bound = e2 + a ** D_PLUS_ONE * e1
    gap = abs(v2 - target)
    inf_gap = abs(T2.inf_value - a * T1.inf_value)
    ok = gap <= bound if rel_tol is None else gap <= rel_tol * abs(target) + 1e-15
    return {"alpha": str(alpha), "vol_I_scaled": v2, "alpha_pow_vol_I": target, "gap": gap,
            "bound": bound, "inf_scaled": T2.inf_value, "alpha_inf": a * T1.inf_value,
            "inf_gap": inf_gap, "pass": ok}


# ---------------------------------------------------------------- Brunn-Minkowski type inequality

def expectation_inequality(G1: PL, G2: PL, G: PL) -> dict:
    """E[G(Z1 + Z2)] vs E[G1(Z1)] + E[G2(Z2)] for independent uniforms on the domains.

    Exact when the knots and values are Fractions.
    """
    L1, L2 = G1.length, G2.length
    e1 = G1.integral() / L1 if L1 else G1.ys[0]
    e2 = G2.integral() / L2 if L2 else G2.ys[0]
    if L1 == 0 and L2 == 0:
        lhs = G(G1.lo + G2.lo)
    else:
        dens = uniform_sum_density(G1.lo, G1.hi, G2.lo, G2.hi)
        lhs = product_integral(G, dens)
    return {"lhs": lhs, "rhs": e1 + e2, "slack": lhs - (e1 + e2), "holds": lhs >= e1 + e2}


def brunn_minkowski_check(S1: GradedSeries, S2: GradedSeries, n_max: int, S12=None) -> dict:
    _check_big(S1)
    _check_big(S2)
    S12 = S12 or (S1 + S2)
    T1, T2, T12 = (concave_transform(S, n_max) for S in (S1, S2, S12))
    (v1, e1), (v2, e2), (v12, e12) = vol_I(T1), vol_I(T2), vol_I(T12)
    d1, d2, d12 = (float(S.divisor.degree()) for S in (S1, S2, S12))
    lhs = v1 / d1 + v2 / d2
    rhs = v12 / d12
    err = e1 / d1 + e2 / d2 + e12 / d12
    exp = expectation_inequality(T1.envelope, T2.envelope, T12.envelope)
    grid = T1.grid_error / max(d1, 1e-300) + T2.grid_error / max(d2, 1e-300) + T12.grid_error / d12
    return {"normalized_lhs": lhs, "normalized_rhs": rhs, "bracket": err,
            "pass": lhs <= rhs + err,
            "expectation": {k: float(v) if k != "holds" else v for k, v in exp.items()},
            "expectation_pass": float(exp["slack"]) >= -grid}


# ---------------------------------------------------------------- continuity experiments

def _perturbed(S_D: GradedSeries, S_E: GradedSeries, eps) -> GradedSeries:
    eps = to_fraction(eps)
    if eps == 0:
        return S_D
    return S_D + S_E.scale(eps)


def _min_slope_over_n(S: GradedSeries, n: int) -> float:
    """Smallest basis degree divided by n (equals mu_min / n on diagonal models)."""
    return min(S.float_line_degrees(n)) / n


def continuity_experiment(S_D: GradedSeries, S_E: GradedSeries, schedule, n_max: int,
                          c1: float | None = None, c2: float = 3.0, track=(10, 50)) -> dict:
    schedule = [to_fraction(e) for e in schedule]
    if not schedule:
        raise ScheduleEmpty("continuity schedule is empty")
    _check_big(S_D)
    base_T = concave_transform(S_D, n_max)
    base_I, base_err = vol_I(base_T)
    ns = list(range(max(1, n_max // 2), n_max + 1))
    base_chi = vol_chi_estimate(S_D, n_max, ns)
    if c1 is None:
        c1 = 4 * base_I
    rows = []
    ok_I = ok_chi = ok_phi = ok_eff = True
    for eps in schedule:
        Se = _perturbed(S_D, S_E, eps)
        vI, eI = vol_I(concave_transform(Se, n_max))
        chi = vol_chi_estimate(Se, n_max, ns)
        env = c1 * float(eps) + c2 / n_max
        gap_I = abs(vI - base_I)
        gap_chi = abs(chi.point_estimate - base_chi.point_estimate)
        phi_path = _phi_shift_path(Se, n_max, ns)
        agree = abs(phi_path["vol_chi_via_phi"] - chi.point_estimate) <= chi.width + phi_path["width"]
        # effective perturbation: D + eps E >= D with h >= 0 and mu_min >= 0
        eff = chi.point_estimate >= base_chi.point_estimate - 1e-12
        mu_track = {n: _min_slope_over_n(Se, n) for n in track if n <= n_max and Se.is_diagonal}
        ok_I &= gap_I <= env
        ok_chi &= gap_chi <= env
        ok_phi &= agree
        ok_eff &= eff
        rows.append({"eps": str(eps), "vol_I": vI, "vol_I_err": eI, "gap_I": gap_I,
                     "vol_chi": chi.point_estimate, "vol_chi_bracket": list(chi.bracket),
                     "gap_chi": gap_chi, "envelope": env, "phi_path": phi_path,
                     "phi_path_agrees": agree, "ineq_eff": eff, "mu_min_over_n": mu_track})
    return {"n_max": n_max, "c1": c1, "c2": c2, "base_vol_I": base_I, "base_vol_chi":
            base_chi.point_estimate, "rows": rows, "vol_I_pass": ok_I, "vol_chi_pass": ok_chi,
            "phi_path_pass": ok_phi, "ineq_eff_pass": ok_eff,
            "pass": ok_I and ok_chi and ok_phi}


def _phi_shift_path(S: GradedSeries, n_max: int, ns=None) -> dict:
    """vol_chi(S) recovered as vol(S + phi) - 2 deg(D) c with phi a constant arch value c
    exceeding -mu_min/n, so that all slopes of the shifted series are >= 0."""
    if S.is_diagonal:
        lowest = min(_min_slope_over_n(S, n) for n in _levels(n_max, ns) if S.dim(n))
    else:
        lowest = -1.0
    c = Fraction(max(0, math.ceil(-lowest)) + 1)
    shifted = S.with_shift(PlaceFunction.constant_arch(c))
    vol = vol_estimate(shifted, n_max, ns)
    # at level n the shift adds exactly 2 c dim(E_n) / n
    corr = D_PLUS_ONE * float(c) * S.dim(n_max) / n_max
    return {"c": str(c), "vol_shifted": vol.point_estimate,
            "vol_chi_via_phi": vol.point_estimate - corr, "width": vol.width}


def exact_sequence_check(S_D: GradedSeries, S_E: GradedSeries, n: int) -> dict:
    """0 -> H^0(nD) --(.1)--> H^0(nD + E) -> coker -> 0 for effective E.

    Degrees are additive along the sequence, so deg(nD + E) equals the degree
    of the image plus the degree of the cokernel; the image degree differs
    from deg(nD) by the distortion of multiplication by 1, which is O(n) and
    vanishes after dividing by n^2.
    """
    if not S_E.divisor.is_effective:
        raise ValueError("E must be effective so that 1 is a section")
    nD = S_D.scale(n)
    tot = nD + S_E
    E_tot = tot.bundle(1)
    cols = []
    for b in nD.basis(1):
        c = coordinates_in_level(tot.divisor, 1, b.num, b.den)
        if c is None:
            raise ArithmeticError("image of a section is not in the target space")
        cols.append(c)
    B = la.transpose(cols)
    d_img = subspace_degree(E_tot, B)
    d_coker = arakelov_degree(quotient_bundle(E_tot, B)) if len(cols) < E_tot.dim else LogValue()
    d_tot = arakelov_degree(E_tot)
    d_nD = level_degree(nD, 1)
    diff = abs(float(d_tot - d_img - d_coker))
    return {"n": n, "deg_total": float(d_tot), "deg_image": float(d_img),
            "deg_coker": float(d_coker), "deg_nD": float(d_nD),
            "additive": diff <= d_tot.err + d_img.err + d_coker.err + 1e-9,
            "distortion_over_n": abs(float(d_img - d_nD)) / n}


def mod_big_search(S_D: GradedSeries, S_E: GradedSeries, cap: int = 32, n_max: int = 60,
                   tol: float = 1e-9) -> dict:
    """Smallest n <= cap with vol_I(n D + E) > tol, given vol_I(D) > tol."""
    v, _ = vol_I(concave_transform(S_D, n_max))
    if v <= tol:
        raise NotBig("vol_I of the base must be positive")
    for n in range(1, cap + 1):
        S = S_D.scale(n) + S_E
        if S.divisor.degree() <= 0:
            continue
        w, _ = vol_I(concave_transform(S, n_max))
        if w > tol:
            return {"found": True, "n": n, "vol_I": w}
    return {"found": False, "n": None}


# ---------------------------------------------------------------- trivially valued mode

@dataclass
class TrivialSeries:
    """Toric series a[inf] over a trivially valued field.

    The level-n space has basis t^j, 0 <= j <= floor(n a); the canonical norm is
    trivial and a perturbation f (constant or concave-free PL profile on [0, a])
    gives t^j the weight n f(j / n).  All degrees are exact Fractions.
    """

    a: Fraction
    f: object = Fraction(0)
    places: tuple = ("trivial",)

    def __post_init__(self):
        if len(self.places) != 1:
            raise ModeMismatch("trivially valued mode allows exactly one place")
        self.a = to_fraction(self.a)
        if self.a <= 0:
            raise NotBig("degree must be positive")
        if not isinstance(self.f, PL):
            self.f = to_fraction(self.f)

    def weight(self, n, j):
        x = Fraction(j, n)
        if isinstance(self.f, PL):
            return n * self.f(x)
        return n * self.f

    def weights(self, n):
        top = math.floor(n * self.a)
        return [self.weight(n, j) for j in range(top + 1)]

    def degree(self, n) -> Fraction:
        return sum(self.weights(n), Fraction(0))

    def nu_min(self, n) -> Fraction:
        return min(self.weights(n)) / n

    def chi_term(self, n) -> Fraction:
        return D_PLUS_ONE * self.degree(n) / n ** 2

    def perturbed(self, eps, h) -> "TrivialSeries":
        eps = to_fraction(eps)
        f = _as_pl(self.f, self.a)
        g = _as_pl(h, self.a)
        xs = sorted(set(f.xs) | set(g.xs))
        return TrivialSeries(self.a, PL(tuple(xs), tuple(f(x) + eps * g(x) for x in xs)), self.places)

    def grid(self) -> int:
        """Levels that are multiples of this put every knot and a on the lattice (1/n) Z."""
        dens = [self.a.denominator]
        if isinstance(self.f, PL):
            dens += [to_fraction(x).denominator for x in self.f.xs]
        return math.lcm(*dens)

    def vol_chi(self, n1: int | None = None) -> dict:
        """Richardson extrapolation of 2 deg / n^2 on two grid levels, checked on a third.

        On grid levels the sequence equals L + b/n exactly (trapezoid rule on a
        PL integrand), so the extrapolated value is the exact limit.
        """
        g = self.grid()
        n1 = n1 or g * 4
        n1 = max(g, (n1 // g) * g)
        n2, n3 = 2 * n1, 3 * n1
        v1, v2, v3 = self.chi_term(n1), self.chi_term(n2), self.chi_term(n3)
        L = (n2 * v2 - n1 * v1) / (n2 - n1)
        L_check = (n3 * v3 - n2 * v2) / (n3 - n2)
        return {"value": L, "exact": L == L_check, "levels": (n1, n2, n3)}


def _as_pl(f, a):
    if isinstance(f, PL):
        return f
    c = to_fraction(f)
    return PL.constant(c, Fraction(0), a)


def trivially_valued_experiment(a, f=0, h=None, schedule=(), places=("trivial",)) -> dict:
    base = TrivialSeries(a, f, tuple(places))
    r0 = base.vol_chi()
    deg = base.a
    out = {"degree": str(deg), "vol_chi": str(r0["value"]), "exact": r0["exact"], "rows": []}
    # nu_min >= inf f, exactly, at every tested level
    inf_f = min(_as_pl(f, base.a).ys)
    out["nu_min_ok"] = all(base.nu_min(n) >= inf_f for n in range(1, 41))
    if isinstance(f, PL):
        expected = None
    else:
        expected = D_PLUS_ONE * to_fraction(f) * deg
    out["expected"] = None if expected is None else str(expected)
    ok = r0["exact"] and out["nu_min_ok"] and (expected is None or r0["value"] == expected)
    violations = 0
    if h is not None:
        hp = _as_pl(h, base.a)
        if max(abs(y) for y in hp.ys) > 1:
            raise ValueError("perturbation must satisfy |h| <= 1")
        for eps in schedule:
            eps = to_fraction(eps)
            r = base.perturbed(eps, hp).vol_chi()
            gap = abs(r["value"] - r0["value"])
            bound = D_PLUS_ONE * deg * eps
            good = gap <= bound and r["exact"]
            violations += not good
            out["rows"].append({"eps": str(eps), "vol_chi": str(r["value"]), "gap": str(gap),
                                "bound": str(bound), "pass": good})
    elif schedule:
        raise ValueError("a schedule needs a perturbation h")
    out["violations"] = violations
    out["pass"] = ok and violations == 0
    return out
