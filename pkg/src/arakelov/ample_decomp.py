"""Writing a positive-degree divisor on P^1 as a positive combination of ample
integral divisors.

On a curve a divisor is ample exactly when its degree is positive.  The
decomposition follows the induction on the number of points: drop the point
with the most negative coefficient, decompose the rest, and borrow a little
of every part to pay for the dropped point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .divisor_series import RDivisorP1, _pkey
from .errors import NonIntegral, NonPositiveDegree

SAFETY = Fraction(1023, 1024)


def ample_test(D: RDivisorP1) -> bool:
    if not D.is_integral():
        raise NonIntegral("ample_test expects integer coefficients; use decompose_ample")
    return D.degree() > 0


@dataclass(frozen=True)
class AmpleDecomposition:
    parts: tuple  # ((coefficient, RDivisorP1), ...)

    def total(self) -> RDivisorP1:
        out = RDivisorP1()
        for c, P in self.parts:
            out = out + P * c
        return out

    def verify(self, D: RDivisorP1) -> dict:
        rec = self.total() == D
        pos = all(c > 0 for c, _ in self.parts)
        integral = all(P.is_integral() for _, P in self.parts)
        ample = integral and all(ample_test(P) for _, P in self.parts)
        return {"reconstructs": rec, "positive_coefficients": pos, "integral_parts": integral,
                "ample_parts": ample, "parts": len(self.parts),
                "pass": rec and pos and integral and ample}

    def to_json(self):
        return {"parts": [{"coefficient": str(c), "divisor": P.to_json()} for c, P in self.parts]}


def _split_scale(a_deg: Fraction, n_abs: Fraction, p_deg: int) -> Fraction:
    """Uniform ratio s with lambda_i = s a_i.

    Strictness needs p_deg / deg(D') < s < 1 / |n_r|; the midpoint is used,
    pulled inside by the safety factor when it would touch the upper end.
    """
    lo = Fraction(p_deg) / a_deg
    hi = 1 / n_abs
    s = (lo + hi) / 2
    if not s < hi:
        s = hi * SAFETY
    assert lo < s < hi
    return s


def _decompose(terms):
    """terms sorted by decreasing coefficient; returns [(coefficient, integral divisor)]."""
    n_r_point, n_r = terms[-1]
    if n_r >= 0:
        return [(c, RDivisorP1(((p, Fraction(1)),))) for p, c in terms]
    rest = terms[:-1]
    parts = _decompose(rest)
    n_abs = -n_r
    deg_rest = sum((a * P.degree() for a, P in parts), Fraction(0))
    s = _split_scale(deg_rest, n_abs, n_r_point.degree)
    lams = [a * s for a, _ in parts]
    out = [(a - n_abs * lam, P) for (a, P), lam in zip(parts, lams)]
    # n_abs (sum lam_i D_i - P_r) with the rational lam_i cleared into an integral divisor
    L = math.lcm(*(lam.denominator for lam in lams))
    last = RDivisorP1(((n_r_point, Fraction(-L)),))
    for lam, (_, P) in zip(lams, parts):
        last = last + P * (lam * L)
    out.append((n_abs / L, last))
    return out


def decompose_ample(D: RDivisorP1) -> AmpleDecomposition:
    if D.degree() <= 0:
        raise NonPositiveDegree(f"degree {D.degree()} is not positive")
    terms = sorted(D.terms, key=lambda pc: (-pc[1], _pkey(pc[0])))
    parts = _decompose(terms)
    r = len(terms)
    if len(parts) > 2 ** r:
        raise AssertionError("part count exceeded the 2^r safety cap")
    return AmpleDecomposition(tuple(parts))

