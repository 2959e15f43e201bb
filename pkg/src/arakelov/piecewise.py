"""Piecewise-linear functions on a closed interval.

Knot coordinates and values may be Fractions (exact) or floats.  Used for
Green weight profiles on toric divisors, concave envelopes and test functions.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class PL:
    xs: tuple
    ys: tuple

    def __post_init__(self):
        xs, ys = tuple(self.xs), tuple(self.ys)
        if len(xs) != len(ys) or not xs:
            raise ValueError("need matching, nonempty knot lists")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("knots must be strictly increasing")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @classmethod
    def linear(cls, u, v, lo, hi):
        """x -> u x + v on [lo, hi]."""
        if lo == hi:
            return cls((lo,), (u * lo + v,))
        return cls((lo, hi), (u * lo + v, u * hi + v))

    @classmethod
    def constant(cls, c, lo, hi):
        return cls.linear(0 * c, c, lo, hi)

    @property
    def lo(self):
        return self.xs[0]

    @property
    def hi(self):
        return self.xs[-1]

    @property
    def length(self):
        return self.xs[-1] - self.xs[0]

    def __call__(self, x):
        xs, ys = self.xs, self.ys
        if x < xs[0] or x > xs[-1]:
            raise ValueError(f"{x} outside [{xs[0]}, {xs[-1]}]")
        i = bisect_right(xs, x) - 1
        if i >= len(xs) - 1:
            return ys[-1]
        if x == xs[i]:
            return ys[i]
        t = (x - xs[i]) / (xs[i + 1] - xs[i])
        return ys[i] + t * (ys[i + 1] - ys[i])

    def slopes(self):
        return [(y1 - y0) / (x1 - x0) for x0, x1, y0, y1 in
                zip(self.xs, self.xs[1:], self.ys, self.ys[1:])]

    def is_concave(self, tol=0):
        s = self.slopes()
        return all(b <= a + tol for a, b in zip(s, s[1:]))

    def simplify(self):
        """Drop knots where the slope does not change (exact data only)."""
        if len(self.xs) <= 2:
            return self
        xs, ys = [self.xs[0]], [self.ys[0]]
        s = self.slopes()
        for i in range(1, len(self.xs) - 1):
            if s[i - 1] != s[i]:
                xs.append(self.xs[i])
                ys.append(self.ys[i])
        xs.append(self.xs[-1])
        ys.append(self.ys[-1])
        return PL(tuple(xs), tuple(ys))

    def integral(self):
        return sum(((x1 - x0) * (y0 + y1) / 2 for x0, x1, y0, y1 in
                    zip(self.xs, self.xs[1:], self.ys, self.ys[1:])), 0 * self.ys[0])

    def max(self):
        return max(self.ys)

    def min(self):
        return min(self.ys)

    def scale_homogeneous(self, a):
        """x -> a * f(x / a), the profile of a scaled divisor."""
        return PL(tuple(x * a for x in self.xs), tuple(y * a for y in self.ys))

    def add_constant(self, c):
        return PL(self.xs, tuple(y + c for y in self.ys))

    def level_set(self, t):
        """(a, b) with {x : f(x) >= t} = [a, b] for concave f, or None if empty."""
        xs, ys = self.xs, self.ys
        if max(ys) < t:
            return None
        i_max = max(range(len(ys)), key=lambda i: ys[i])
        a = _crossing_left(xs, ys, t, i_max)
        b = _crossing_right(xs, ys, t, i_max)
        return a, b

    def positive_part_integral(self, c=0):
        """Exact integral of max(f - c, 0)."""
        total = 0 * self.ys[0]
        for x0, x1, y0, y1 in zip(self.xs, self.xs[1:], self.ys, self.ys[1:]):
            a0, a1 = y0 - c, y1 - c
            if a0 >= 0 and a1 >= 0:
                total += (x1 - x0) * (a0 + a1) / 2
            elif a0 > 0 or a1 > 0:
                # single crossing inside the segment
                xc = x0 + (x1 - x0) * a0 / (a0 - a1)
                if a0 > 0:
                    total += (xc - x0) * a0 / 2
                else:
                    total += (x1 - xc) * a1 / 2
        return total

    def to_json(self):
        return [[_num_json(x), _num_json(y)] for x, y in zip(self.xs, self.ys)]


def _num_json(x):
    if isinstance(x, Fraction):
        return str(x)
    return float(x)


def _crossing_left(xs, ys, t, i_max):
    if ys[0] >= t:
        return xs[0]
    for i in range(i_max, 0, -1):
        if ys[i - 1] < t <= ys[i]:
            return xs[i - 1] + (xs[i] - xs[i - 1]) * (t - ys[i - 1]) / (ys[i] - ys[i - 1])
    return xs[i_max]


def _crossing_right(xs, ys, t, i_max):
    if ys[-1] >= t:
        return xs[-1]
    for i in range(i_max, len(xs) - 1):
        if ys[i + 1] < t <= ys[i]:
            return xs[i] + (xs[i + 1] - xs[i]) * (ys[i] - t) / (ys[i] - ys[i + 1])
    return xs[i_max]


def sup_convolution(f: PL, g: PL) -> PL:
    """(f box g)(z) = sup_{x+y=z} f(x) + g(y) for concave f, g."""
    segs = []
    for x0, x1, y0, y1 in zip(f.xs, f.xs[1:], f.ys, f.ys[1:]):
        segs.append(((y1 - y0) / (x1 - x0), x1 - x0))
    for x0, x1, y0, y1 in zip(g.xs, g.xs[1:], g.ys, g.ys[1:]):
        segs.append(((y1 - y0) / (x1 - x0), x1 - x0))
    segs.sort(key=lambda s: s[0], reverse=True)
    x, y = f.lo + g.lo, f.ys[0] + g.ys[0]
    xs, ys = [x], [y]
    for slope, length in segs:
        x = x + length
        y = y + slope * length
        xs.append(x)
        ys.append(y)
    return PL(tuple(xs), tuple(ys)).simplify() if isinstance(y, Fraction) else PL(tuple(xs), tuple(ys))


def concave_majorant(points, tol=0.0) -> PL:
    """Least concave majorant of finitely many (x, y) points (upper hull).

    With tol > 0, points within tol (in value) of a chord are dropped too,
    which removes float noise along straight pieces.
    """
    pts = sorted(points, key=lambda p: (p[0], p[1]))
    # keep the max y per x
    dedup = []
    for x, y in pts:
        if dedup and dedup[-1][0] == x:
            dedup[-1] = (x, max(dedup[-1][1], y))
        else:
            dedup.append((x, y))
    hull = []
    for x, y in dedup:
        while len(hull) >= 2:
            (x0, y0), (x1, y1) = hull[-2], hull[-1]
            # remove middle point if it is on or below the chord
            if (y1 - y0) * (x - x0) <= (y - y0) * (x1 - x0) + tol * (x - x0):
                hull.pop()
            else:
                break
        hull.append((x, y))
    return PL(tuple(p[0] for p in hull), tuple(p[1] for p in hull))


def compose_integral(f: PL, G: PL):
    """Exact integral over G's domain of f(G(x)) for PL f, G (f defined on G's range).

    f is extended constantly outside its knot range.
    """
    total = 0.0
    for x0, x1, y0, y1 in zip(G.xs, G.xs[1:], G.ys, G.ys[1:]):
        # split where G crosses a knot of f
        cuts = [x0, x1]
        lo, hi = min(y0, y1), max(y0, y1)
        for k in f.xs:
            if lo < k < hi:
                cuts.append(x0 + (x1 - x0) * (k - y0) / (y1 - y0))
        cuts.sort()
        for a, b in zip(cuts, cuts[1:]):
            ga = y0 + (y1 - y0) * (a - x0) / (x1 - x0)
            gb = y0 + (y1 - y0) * (b - x0) / (x1 - x0)
            total += (b - a) * (_ext(f, ga) + _ext(f, gb)) / 2
    return total


def _ext(f: PL, y):
    if y <= f.lo:
        return f.ys[0]
    if y >= f.hi:
        return f.ys[-1]
    return f(y)


def product_integral(f: PL, g: PL):
    """Exact integral of f * g over the intersection of their domains (Simpson per piece)."""
    lo, hi = max(f.lo, g.lo), min(f.hi, g.hi)
    if hi <= lo:
        return 0 * f.ys[0]
    cuts = sorted({lo, hi} | {x for x in f.xs if lo < x < hi} | {x for x in g.xs if lo < x < hi})
    total = 0 * f.ys[0] * g.ys[0]
    for a, b in zip(cuts, cuts[1:]):
        m = (a + b) / 2
        total += (b - a) * (f(a) * g(a) + 4 * f(m) * g(m) + f(b) * g(b)) / 6
    return total


def uniform_sum_density(a1, b1, a2, b2) -> PL:
    """Density of Z1 + Z2 for independent uniforms on [a1,b1] and [a2,b2]."""
    L1, L2 = b1 - a1, b2 - a2
    s, l = min(L1, L2), max(L1, L2)
    h = 1 / l
    lo = a1 + a2
    if s == 0:
        return PL((lo, lo + l), (h, h))
    xs = [lo, lo + s, lo + l, lo + s + l]
    ys = [0 * h, h, h, 0 * h]
    if s == l:
        xs = [lo, lo + s, lo + 2 * s]
        ys = [0 * h, h, 0 * h]
    return PL(tuple(xs), tuple(ys))


def clamp01() -> PL:
    return PL((Fraction(0), Fraction(1)), (Fraction(0), Fraction(1)))
