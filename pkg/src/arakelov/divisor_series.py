"""R-divisors on P^1 over Q, Riemann-Roch bases and graded adelic linear series.

The affine coordinate is t; closed points are infinity and monic irreducible
polynomials in t.  The flag point for valuations is t = 0, so the valuation of
a basis element h(t)/d(t) is ord_0(h) - ord_0(d).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional

import sympy

from . import linalg as la
from .adelic_curve import (LogValue, PlaceFunction, factor_int, integrate_place_function,
                           parse_rational, to_fraction, valuation)
from .bundles import AdelicBundle
from .errors import SchemaError, Unsupported
from .norms import ArchNorm, FiniteNorm, NormFamily
from .piecewise import PL, sup_convolution

_T = sympy.Symbol("t")


# ---------------------------------------------------------------- polynomials
# coefficient tuples, lowest degree first

def pnorm(c):
    c = [to_fraction(x) for x in c]
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(c) if c else (Fraction(0),)


def pmul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return pnorm(out)


def ppow(a, e):
    out = (Fraction(1),)
    for _ in range(e):
        out = pmul(out, a)
    return out


def pdeg(a):
    a = pnorm(a)
    return -1 if a == (0,) else len(a) - 1


def pdivmod(a, b):
    a = list(pnorm(a))
    b = pnorm(b)
    db = pdeg(b)
    if db < 0:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(1, len(a) - db)
    while pdeg(a) >= db and a != [0]:
        da = pdeg(a)
        f = a[da] / b[db]
        q[da - db] = f
        for i in range(db + 1):
            a[da - db + i] -= f * b[i]
        a = list(pnorm(a))
    return pnorm(q), pnorm(a)


def pord0(a):
    a = pnorm(a)
    for i, x in enumerate(a):
        if x != 0:
            return i
    raise ValueError("ord_0 of the zero polynomial")


def shift_t(a, j):
    """Multiply by t^j (j >= 0)."""
    return pnorm((Fraction(0),) * j + tuple(a))


def gauss_exponent(a, p, u):
    """log_p of the Gauss norm max_i |a_i|_p r^i at radius r = p^{-u}."""
    return max(-valuation(c, p) - u * i for i, c in enumerate(a) if c != 0)


# ---------------------------------------------------------------- points and divisors

@dataclass(frozen=True, order=True)
class Point:
    """Infinity (``coeffs == ()``) or a monic irreducible polynomial."""

    coeffs: tuple = ()

    def __post_init__(self):
        if self.coeffs:
            c = pnorm(self.coeffs)
            if pdeg(c) < 1 or c[-1] != 1:
                raise ValueError("a finite point is a monic polynomial of degree >= 1")
            poly = sympy.Poly(list(reversed(c)), _T, domain="QQ")
            if not poly.is_irreducible:
                raise ValueError(f"{poly.as_expr()} is not irreducible over Q")
            object.__setattr__(self, "coeffs", c)

    @classmethod
    def infinity(cls):
        return cls(())

    @classmethod
    def zero(cls):
        return cls((Fraction(0), Fraction(1)))

    @classmethod
    def parse(cls, s, path="point"):
        if isinstance(s, str) and s.strip().lower() in ("inf", "infinity", "oo"):
            return cls.infinity()
        try:
            expr = sympy.sympify(s, locals={"t": _T})
            poly = sympy.Poly(expr, _T, domain="QQ")
            poly = poly.monic()
            coeffs = tuple(Fraction(int(c.p), int(c.q)) for c in reversed(poly.all_coeffs()))
            return cls(coeffs)
        except (sympy.SympifyError, ValueError, TypeError, sympy.PolynomialError) as exc:
            raise SchemaError(f"cannot parse point {s!r}: {exc}", path) from None

    @property
    def is_infinity(self):
        return not self.coeffs

    @property
    def is_zero(self):
        return self.coeffs == (Fraction(0), Fraction(1))

    @property
    def degree(self):
        return 1 if self.is_infinity else len(self.coeffs) - 1

    def __str__(self):
        if self.is_infinity:
            return "inf"
        expr = sum(sympy.Rational(c.numerator, c.denominator) * _T ** i for i, c in enumerate(self.coeffs))
        return str(sympy.expand(expr)).replace("**", "^")


def _coerce_point(pt):
    if isinstance(pt, Point):
        return pt
    return Point.parse(pt)


@dataclass(frozen=True)
class RDivisorP1:
    """Finite formal sum of points with rational coefficients."""

    terms: tuple = ()  # sorted ((Point, Fraction), ...), nonzero coefficients

    def __post_init__(self):
        acc = {}
        for pt, c in self.terms:
            pt = _coerce_point(pt)
            acc[pt] = acc.get(pt, Fraction(0)) + to_fraction(c)
        clean = tuple(sorted(((p, c) for p, c in acc.items() if c != 0), key=lambda pc: _pkey(pc[0])))
        object.__setattr__(self, "terms", clean)

    @classmethod
    def of(cls, mapping):
        """From {point: coefficient}; points may be strings such as "inf" or "t-1"."""
        return cls(tuple(mapping.items()))

    @classmethod
    def inf(cls, c=1):
        return cls(((Point.infinity(), to_fraction(c)),))

    def coefficient(self, pt):
        pt = _coerce_point(pt)
        for p, c in self.terms:
            if p == pt:
                return c
        return Fraction(0)

    @property
    def points(self):
        return [p for p, _ in self.terms]

    def degree(self):
        return sum((c * p.degree for p, c in self.terms), Fraction(0))

    def __add__(self, other):
        return RDivisorP1(self.terms + other.terms)

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, k):
        k = to_fraction(k)
        return RDivisorP1(tuple((p, c * k) for p, c in self.terms))

    __rmul__ = __mul__

    def floor(self, n=1):
        """Coefficients of floor(n D) as {point: int}."""
        return {p: math.floor(c * n) for p, c in self.terms}

    def is_integral(self):
        return all(c.denominator == 1 for _, c in self.terms)

    def is_effective(self):
        return all(c >= 0 for _, c in self.terms)

    @property
    def is_toric(self):
        return all(p.is_infinity or p.is_zero for p, _ in self.terms)

    def to_json(self):
        return [{"point": str(p), "c": str(c)} for p, c in self.terms]

    @classmethod
    def from_json(cls, obj, path="divisor"):
        if not isinstance(obj, list):
            raise SchemaError("divisor must be a list of {point, c}", path)
        terms = []
        for i, item in enumerate(obj):
            ipath = f"{path}[{i}]"
            if not isinstance(item, dict) or "point" not in item or "c" not in item:
                raise SchemaError("each term needs 'point' and 'c'", ipath)
            try:
                pt = Point.parse(item["point"], ipath + ".point")
            except ValueError as exc:
                raise SchemaError(str(exc), ipath + ".point") from None
            terms.append((pt, parse_rational(item["c"], ipath + ".c")))
        return cls(tuple(terms))

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{c}[{p}]" for p, c in self.terms)


def _pkey(p):
    return (0, ()) if p.is_infinity else (1, (len(p.coeffs),) + p.coeffs)


# ---------------------------------------------------------------- Riemann-Roch

@dataclass(frozen=True)
class BasisFunction:
    """num(t) / den(t) with ``alpha`` its valuation at t = 0."""

    num: tuple
    den: tuple
    alpha: int

    def __str__(self):
        def show(c):
            e = sum(sympy.Rational(x.numerator, x.denominator) * _T ** i for i, x in enumerate(c))
            return str(sympy.factor(e)).replace("**", "^")
        return f"({show(self.num)})/({show(self.den)})"


def riemann_roch_basis(D: RDivisorP1, n: int = 1):
    """Basis of H^0(floor(nD)) ordered by increasing valuation at t = 0."""
    fl = RDivisorP1(tuple((p, c * n) for p, c in D.terms)).floor(1)
    den = (Fraction(1),)
    Q = (Fraction(1),)
    m_inf = 0
    for p, m in fl.items():
        if p.is_infinity:
            m_inf = m
        elif m > 0:
            den = pmul(den, ppow(p.coeffs, m))
        elif m < 0:
            Q = pmul(Q, ppow(p.coeffs, -m))
    top = pdeg(den) + m_inf - pdeg(Q)
    if top < 0:
        return []
    a0 = pord0(Q) - pord0(den)
    return [BasisFunction(shift_t(Q, j), den, a0 + j) for j in range(top + 1)]


def rr_dimension(D: RDivisorP1, n: int = 1) -> int:
    fl = RDivisorP1(tuple((p, c * n) for p, c in D.terms)).floor(1)
    return max(0, sum(m * p.degree for p, m in fl.items()) + 1)


def _level_data(D: RDivisorP1, n: int):
    """(Q, den, top) describing H^0(nD) as Q * k(t) / den with deg k <= top."""
    fl = RDivisorP1(tuple((p, c * n) for p, c in D.terms)).floor(1)
    den, Q, m_inf = (Fraction(1),), (Fraction(1),), 0
    for p, m in fl.items():
        if p.is_infinity:
            m_inf = m
        elif m > 0:
            den = pmul(den, ppow(p.coeffs, m))
        elif m < 0:
            Q = pmul(Q, ppow(p.coeffs, -m))
    return Q, den, pdeg(den) + m_inf - pdeg(Q)


def coordinates_in_level(D: RDivisorP1, n: int, num, den):
    """Coordinates of num/den in the level-n basis, or None if it is not a section."""
    Q, dn, top = _level_data(D, n)
    # num/den = Q k / dn  =>  k = num * dn / (den * Q)
    k, r = pdivmod(pmul(num, dn), pmul(den, Q))
    if r != (0,) or pdeg(k) > top:
        return None
    out = [Fraction(0)] * (top + 1)
    for i, c in enumerate(k):
        out[i] = c
    return out


# ---------------------------------------------------------------- Green models

@dataclass(frozen=True)
class LinearWeight:
    """Gauss weight: -log_p ||f||_{p^-u} + v n (finite), or u alpha + v n (arch)."""

    u: Fraction = Fraction(0)
    v: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "u", to_fraction(self.u))
        object.__setattr__(self, "v", to_fraction(self.v))

    @property
    def is_zero(self):
        return self.u == 0 and self.v == 0

    def scaled(self, a):
        return LinearWeight(self.u, self.v * a)

    def profile(self, lo, hi):
        return PL.linear(self.u, self.v, lo, hi)

    def to_json(self):
        return {"u": str(self.u), "v": str(self.v)}


@dataclass(frozen=True)
class ProfileWeight:
    """Toric weight n * psi(alpha / n) for a concave PL profile psi."""

    psi: PL

    def __post_init__(self):
        if not self.psi.is_concave():
            raise ValueError("weight profile must be concave")

    @property
    def is_zero(self):
        return all(y == 0 for y in self.psi.ys)

    def scaled(self, a):
        return ProfileWeight(self.psi.scale_homogeneous(a))

    def profile(self, lo, hi):
        return self.psi

    def to_json(self):
        return {"knots": self.psi.to_json()}


def _weight_from_json(obj, path):
    if "knots" in obj:
        try:
            xs = [parse_rational(k[0], path + ".knots") for k in obj["knots"]]
            ys = [parse_rational(k[1], path + ".knots") for k in obj["knots"]]
            return ProfileWeight(PL(tuple(xs), tuple(ys)))
        except (ValueError, IndexError, TypeError) as exc:
            if isinstance(exc, SchemaError):
                raise
            raise SchemaError(str(exc), path + ".knots") from None
    return LinearWeight(parse_rational(obj.get("u", "0"), path + ".u"),
                        parse_rational(obj.get("v", "0"), path + ".v"))


@dataclass(frozen=True)
class ArchGreen:
    """Archimedean part: kind "l2", "l1", "circle" (sup on |t| = radius) or "gram"."""

    kind: str = "l2"
    weight: object = field(default_factory=LinearWeight)
    radius: Fraction = Fraction(1)
    gram: Optional[Callable] = None  # n -> rational gram on the level-n basis

    def __post_init__(self):
        if self.kind not in ("l2", "l1", "circle", "gram"):
            raise ValueError(f"unknown arch kind {self.kind!r}")
        if self.kind == "gram" and self.gram is None:
            raise ValueError("kind 'gram' needs a gram function")
        object.__setattr__(self, "radius", to_fraction(self.radius))
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    @property
    def is_trivial(self):
        return self.kind == "l2" and self.weight.is_zero

    def to_json(self):
        out = {"kind": self.kind}
        if isinstance(self.weight, ProfileWeight):
            out.update(self.weight.to_json())
        else:
            out.update(self.weight.to_json())
        if self.kind == "circle":
            out["radius"] = str(self.radius)
        return out


@dataclass(frozen=True)
class GreenModel:
    finite: Mapping[int, object] = field(default_factory=dict)
    arch: ArchGreen = field(default_factory=ArchGreen)
    shift: PlaceFunction = field(default_factory=PlaceFunction)

    def __post_init__(self):
        fin = {}
        for p, w in sorted(self.finite.items()):
            if not sympy.isprime(int(p)):
                raise ValueError(f"{p} is not prime")
            if isinstance(w, tuple):
                w = LinearWeight(*w)
            fin[int(p)] = w
        object.__setattr__(self, "finite", fin)

    @classmethod
    def trivial(cls):
        return cls()

    @property
    def is_finite_only(self):
        """No archimedean weights: the Okounkov data are exactly superadditive."""
        return self.arch.is_trivial

    def to_json(self):
        out = {"finite": {str(p): w.to_json() for p, w in self.finite.items()},
               "arch": self.arch.to_json()}
        if not self.shift.is_zero():
            out["shift"] = self.shift.to_json()
        return out

    @classmethod
    def from_json(cls, obj, path="green"):
        if obj is None:
            return cls()
        if not isinstance(obj, dict):
            raise SchemaError("green model must be an object", path)
        fin = {}
        for p, w in obj.get("finite", {}).items():
            fpath = f"{path}.finite.{p}"
            try:
                pp = int(p)
            except ValueError:
                raise SchemaError("finite keys must be primes", fpath) from None
            if not sympy.isprime(pp):
                raise SchemaError(f"{p} is not prime", fpath)
            fin[pp] = _weight_from_json(w, fpath)
        a = obj.get("arch", {"kind": "l2"})
        apath = path + ".arch"
        kind = a.get("kind", "l2")
        if kind not in ("l2", "l1", "circle"):
            raise SchemaError(f"unsupported arch kind {kind!r}", apath + ".kind")
        try:
            arch = ArchGreen(kind, _weight_from_json(a, apath),
                             parse_rational(a.get("radius", "1"), apath + ".radius"))
        except ValueError as exc:
            if isinstance(exc, SchemaError):
                raise
            raise SchemaError(str(exc), apath) from None
        shift = PlaceFunction.from_json(obj.get("shift"), path + ".shift")
        return cls(fin, arch, shift)


# ---------------------------------------------------------------- graded series

class GradedSeries:
    """Graded linear series H^0(nD) with the norm families induced by a Green model.

    Level-n data are memoised; the cache is filled under a lock so concurrent
    readers always see complete, deterministic entries.
    """

    def __init__(self, divisor: RDivisorP1, green: GreenModel | None = None):
        self.divisor = divisor
        self.green = green or GreenModel()
        for p, w in self.green.finite.items():
            if isinstance(w, ProfileWeight) and not divisor.is_toric:
                raise Unsupported("profile weights are only defined for divisors supported on {0, inf}")
        if isinstance(self.green.arch.weight, ProfileWeight) and not divisor.is_toric:
            raise Unsupported("profile weights are only defined for divisors supported on {0, inf}")
        self._cache = {}
        self._lock = threading.Lock()
        # primes where point coefficients are not integral get Gauss norms too
        extra = set()
        for p in divisor.points:
            for c in p.coeffs:
                extra.update(q for q, _ in factor_int(c.denominator))
        self._primes = sorted(set(self.green.finite) | extra)

    def __repr__(self):
        return f"GradedSeries({self.divisor}, {self.green.to_json()})"

    # ----- structure
    @property
    def is_toric(self):
        return self.divisor.is_toric

    def body_bounds(self):
        """Exact Okounkov interval for toric divisors a[inf] + b[0]: [-b, a]."""
        if not self.is_toric:
            return None
        a = self.divisor.coefficient(Point.infinity())
        b = self.divisor.coefficient(Point.zero())
        return -b, a

    def finite_weight(self, p):
        return self.green.finite.get(p, LinearWeight())

    def delta(self, n):
        """Superadditivity defect recorded for the model at level n."""
        if self.green.is_finite_only:
            return 0.0
        return math.log(n + 1)

    # ----- level data
    def _compute(self, n):
        basis = riemann_roch_basis(self.divisor, n)
        alphas = [b.alpha for b in basis]
        fin_w = {}
        for p in self._primes:
            w = self.finite_weight(p)
            fin_w[p] = [self._finite_weight(w, b, n, p) for b in basis]
        arch_w = [self._arch_weight(b, n) for b in basis]
        return basis, alphas, fin_w, arch_w

    def level(self, n):
        with self._lock:
            hit = self._cache.get(n)
            if hit is None:
                hit = self._compute(n)
                self._cache[n] = hit
            return hit

    def _finite_weight(self, w, b, n, p):
        if isinstance(w, ProfileWeight):
            return n * w.psi(Fraction(b.alpha, n))
        return -gauss_exponent(b.num, p, w.u) + gauss_exponent(b.den, p, w.u) + w.v * n

    def _arch_weight(self, b, n):
        a = self.green.arch
        w = a.weight
        if isinstance(w, ProfileWeight):
            base = n * w.psi(Fraction(b.alpha, n))
        else:
            base = w.u * b.alpha + w.v * n
        if a.kind == "circle" and a.radius != 1:
            # |t|^alpha on the circle contributes rho^alpha
            return LogValue.rational(base) - LogValue.log(a.radius) * b.alpha
        return base

    def basis(self, n):
        return self.level(n)[0]

    def valuations(self, n):
        return self.level(n)[1]

    def dim(self, n):
        return len(self.level(n)[0])

    def weights(self, n):
        """(finite weights {p: [w_j]}, arch weights [w_j]) on the level-n basis."""
        _, _, fin_w, arch_w = self.level(n)
        return fin_w, arch_w

    @property
    def is_diagonal(self):
        return self.green.arch.kind != "gram"

    def line_degrees(self, n):
        """Exact degrees of the basis vectors at level n (diagonal models)."""
        fin_w, arch_w = self.weights(n)
        shift = integrate_place_function(self.green.shift) * n
        out = []
        for j in range(self.dim(n)):
            d = LogValue({p: fin_w[p][j] for p in fin_w}) + LogValue.coerce(arch_w[j]) + shift
            out.append(d)
        return out

    def float_line_degrees(self, n):
        fin_w, arch_w = self.weights(n)
        sh = float(integrate_place_function(self.green.shift)) * n
        lnp = {p: math.log(p) for p in fin_w}
        return [sum(float(fin_w[p][j]) * lnp[p] for p in fin_w) + float(arch_w[j]) + sh
                for j in range(self.dim(n))]

    def bundle(self, n, labels=False) -> AdelicBundle:
        basis, alphas, fin_w, arch_w = self.level(n)
        r = len(basis)
        fin = {p: FiniteNorm.diagonal(p, ws) for p, ws in fin_w.items()}
        a = self.green.arch
        if a.kind == "l2":
            arch = ArchNorm("hermitian", arch_w, la.identity(r))
        elif a.kind == "l1":
            arch = ArchNorm("sum", arch_w)
        elif a.kind == "circle":
            # l2 on the circle <= sup <= l1 <= sqrt(r) l2
            arch = ArchNorm("hermitian", arch_w, la.identity(r),
                            inflate=0.5 * math.log(r) if r > 1 else 0.0)
        else:
            arch = ArchNorm("hermitian", [0] * r, a.gram(n))
        fam = NormFamily(r, arch, fin, self.green.shift * n)
        return AdelicBundle(r, fam, tuple(str(b) for b in basis) if labels else None)

    # ----- operations on series
    def scale(self, a):
        """The series of (a D, a g)."""
        a = to_fraction(a)
        if a <= 0:
            raise ValueError("scale factor must be positive")
        g = self.green
        fin = {p: w.scaled(a) for p, w in g.finite.items()}
        arch = ArchGreen(g.arch.kind, g.arch.weight.scaled(a), g.arch.radius ** 1, g.arch.gram)
        if g.arch.kind == "circle" and g.arch.radius != 1:
            raise Unsupported("scaling a circle model with radius != 1")
        if g.arch.kind == "gram":
            raise Unsupported("scaling an explicit-gram model")
        return GradedSeries(self.divisor * a, GreenModel(fin, arch, g.shift * a))

    def with_shift(self, phi: PlaceFunction):
        g = self.green
        return GradedSeries(self.divisor, GreenModel(g.finite, g.arch, g.shift + phi))

    def __add__(self, other: "GradedSeries") -> "GradedSeries":
        D = self.divisor + other.divisor
        g1, g2 = self.green, other.green
        fin = {}
        for p in sorted(set(g1.finite) | set(g2.finite)):
            fin[p] = _add_weights(self, other, g1.finite.get(p, LinearWeight()),
                                  g2.finite.get(p, LinearWeight()))
        if g1.arch.kind != g2.arch.kind or g1.arch.kind in ("gram",) or (
                g1.arch.kind == "circle" and (g1.arch.radius != 1 or g2.arch.radius != 1)):
            raise Unsupported("sum of series with incompatible archimedean models")
        arch = ArchGreen(g1.arch.kind, _add_weights(self, other, g1.arch.weight, g2.arch.weight))
        return GradedSeries(D, GreenModel(fin, arch, g1.shift + g2.shift))


def _add_weights(s1, s2, w1, w2):
    if isinstance(w1, LinearWeight) and isinstance(w2, LinearWeight) and w1.u == w2.u:
        return LinearWeight(w1.u, w1.v + w2.v)
    if not (s1.is_toric and s2.is_toric):
        raise Unsupported("sum of non-toric series needs equal Gauss radii")
    b1, b2 = s1.body_bounds(), s2.body_bounds()
    if b1[0] > b1[1] or b2[0] > b2[1]:
        raise Unsupported("profile sum needs nonempty bodies; use equal Gauss radii instead")
    return ProfileWeight(sup_convolution(w1.profile(*b1), w2.profile(*b2)))


def series_from_json(obj, path="series") -> GradedSeries:
    if not isinstance(obj, dict) or "divisor" not in obj:
        raise SchemaError("series needs a 'divisor'", path)
    D = RDivisorP1.from_json(obj["divisor"], path + ".divisor")
    green = GreenModel.from_json(obj.get("green"), path + ".green")
    try:
        return GradedSeries(D, green)
    except (ValueError, Unsupported) as exc:
        raise SchemaError(str(exc), path) from None


def toric_series(a, b=0, finite=None, arch=None, shift=None):
    """Series of a[inf] + b[0] with weights given as {p: (u, v) | PL} and arch (u, v) | PL."""
    D = RDivisorP1.of({"inf": a, "t": b})
    fin = {}
    for p, w in (finite or {}).items():
        fin[p] = ProfileWeight(w) if isinstance(w, PL) else LinearWeight(*w)
    if arch is None:
        aw = LinearWeight()
    elif isinstance(arch, PL):
        aw = ProfileWeight(arch)
    else:
        aw = LinearWeight(*arch)
    return GradedSeries(D, GreenModel(fin, ArchGreen("l2", aw), shift or PlaceFunction()))


def graded_adelic_bundle(S: GradedSeries, n: int) -> AdelicBundle:
    return S.bundle(n)


def multiplication_surjectivity(S: GradedSeries, n: int, m: int) -> dict:
    """Is H^0(nD) x H^0(mD) -> H^0((n+m)D) onto?"""
    Bn, Bm = S.basis(n), S.basis(m)
    target = S.dim(n + m)
    rows = []
    for f in Bn:
        for g in Bm:
            c = coordinates_in_level(S.divisor, n + m, pmul(f.num, g.num), pmul(f.den, g.den))
            if c is None:
                raise ArithmeticError("product is not a section of the sum level")
            rows.append(c)
    rk = la.rank(rows) if rows else 0
    witness = None
    if rk < target:
        # a coordinate vector outside the image
        R, piv = la.rref(rows) if rows else ([], [])
        free = [j for j in range(target) if j not in piv]
        j = free[0]
        witness = {"index": j, "function": str(S.basis(n + m)[j])}
    return {"n": n, "m": m, "dims": (S.dim(n), S.dim(m), target), "rank": rk,
            "surjective": rk == target, "witness": witness}
