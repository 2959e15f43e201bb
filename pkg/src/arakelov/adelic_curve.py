"""The rationals as a proper adelic curve.

Places are the usual absolute value and the p-adic ones, each with measure 1.
Quantities of the form ``sum_w ln|.|_w`` are carried as :class:`LogValue`,
an exact element of Q + sum_p Q ln p with an optional float remainder.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

import mpmath
import sympy

from .errors import SchemaError, ZeroInput

# digits used when an exact LogValue has to be turned into a real
_BASE_DPS = 40


@lru_cache(maxsize=None)
def _ln_prime(p: int, dps: int) -> mpmath.mpf:
    with mpmath.workdps(dps):
        return mpmath.log(p)


@lru_cache(maxsize=4096)
def factor_int(n: int) -> tuple:
    """Prime factorisation of |n| as a sorted tuple of (p, e)."""
    n = abs(n)
    if n <= 1:
        return ()
    return tuple(sorted(sympy.factorint(n).items()))


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        raise TypeError("floats are not accepted where an exact rational is required")
    return Fraction(x)


def valuation(x, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    x = to_fraction(x)
    if x == 0:
        raise ZeroInput("valuation of zero")
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def rational_factor(x) -> dict:
    """{p: v_p(x)} for a nonzero rational."""
    x = to_fraction(x)
    if x == 0:
        raise ZeroInput("cannot factor zero")
    out = {}
    for p, e in factor_int(x.numerator):
        out[p] = out.get(p, 0) + e
    for p, e in factor_int(x.denominator):
        out[p] = out.get(p, 0) - e
    return out


@dataclass(frozen=True)
class Place:
    kind: str  # "arch" or "finite"
    p: int = 0
    weight: Fraction = Fraction(1)

    def __post_init__(self):
        if self.kind not in ("arch", "finite"):
            raise ValueError(f"unknown place kind {self.kind!r}")
        if self.kind == "finite" and not sympy.isprime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.kind == "arch" and self.p != 0:
            raise ValueError("the archimedean place has no prime")

    @classmethod
    def arch(cls) -> "Place":
        return cls("arch")

    @classmethod
    def finite(cls, p: int) -> "Place":
        return cls("finite", int(p))

    @property
    def is_arch(self) -> bool:
        return self.kind == "arch"

    def to_json(self):
        if self.is_arch:
            return {"kind": "arch"}
        return {"kind": "finite", "p": self.p}

    @classmethod
    def from_json(cls, obj, path="place"):
        if not isinstance(obj, dict) or "kind" not in obj:
            raise SchemaError("place must be an object with 'kind'", path)
        if obj["kind"] == "arch":
            return cls.arch()
        if obj["kind"] == "finite":
            try:
                return cls.finite(int(obj["p"]))
            except (KeyError, ValueError) as exc:
                raise SchemaError(str(exc), path + ".p") from None
        raise SchemaError(f"unknown kind {obj['kind']!r}", path + ".kind")


ARCH = Place.arch()


def _clean(finite: Mapping) -> dict:
    out = {}
    for p, q in finite.items():
        q = to_fraction(q)
        if q != 0:
            out[int(p)] = q
    return dict(sorted(out.items()))


@dataclass(frozen=True, eq=False)
class LogValue:
    """``sum_p finite[p]*ln p + const + arch``, with ``arch`` known to ``+-err``.

    ``finite`` and ``const`` are exact.  Because the ln p are linearly
    independent over Q and transcendental, an exact value is zero iff both
    exact parts vanish.
    """

    finite: Mapping[int, Fraction] = field(default_factory=dict)
    const: Fraction = Fraction(0)
    arch: float = 0.0
    err: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "finite", _clean(self.finite))
        object.__setattr__(self, "const", to_fraction(self.const))
        object.__setattr__(self, "arch", float(self.arch) + 0.0)
        object.__setattr__(self, "err", float(self.err))
        if self.err < 0:
            raise ValueError("error bound must be nonnegative")

    # construction helpers
    @classmethod
    def zero(cls) -> "LogValue":
        return cls()

    @classmethod
    def log(cls, x) -> "LogValue":
        """Exact ln|x| for a nonzero rational x."""
        return cls(rational_factor(x))

    @classmethod
    def rational(cls, q) -> "LogValue":
        return cls(const=to_fraction(q))

    @classmethod
    def real(cls, x: float, err: float = 0.0) -> "LogValue":
        return cls(arch=float(x), err=err)

    @classmethod
    def coerce(cls, x) -> "LogValue":
        if isinstance(x, LogValue):
            return x
        if isinstance(x, float):
            return cls.real(x)
        return cls.rational(x)

    # arithmetic
    def __add__(self, other):
        other = LogValue.coerce(other)
        fin = dict(self.finite)
        for p, q in other.finite.items():
            fin[p] = fin.get(p, 0) + q
        return LogValue(fin, self.const + other.const, self.arch + other.arch,
                        self.err + other.err)

    __radd__ = __add__

    def __neg__(self):
        return LogValue({p: -q for p, q in self.finite.items()}, -self.const,
                        -self.arch, self.err)

    def __sub__(self, other):
        return self + (-LogValue.coerce(other))

    def __rsub__(self, other):
        return LogValue.coerce(other) - self

    def __mul__(self, k):
        if isinstance(k, LogValue):
            raise TypeError("LogValue products are not in the Q-span of logs")
        if isinstance(k, float):
            return LogValue(arch=float(self) * k, err=self.err * abs(k))
        k = to_fraction(k)
        return LogValue({p: q * k for p, q in self.finite.items()}, self.const * k,
                        self.arch * float(k), self.err * abs(float(k)))

    __rmul__ = __mul__

    def __truediv__(self, k):
        if isinstance(k, float):
            return self * (1.0 / k)
        return self * (1 / to_fraction(k))

    # inspection
    @property
    def is_exact(self) -> bool:
        return self.arch == 0.0 and self.err == 0.0

    @property
    def exact_part(self) -> "LogValue":
        return LogValue(self.finite, self.const)

    def is_exact_zero(self) -> bool:
        return self.is_exact and not self.finite and self.const == 0

    def mp(self, dps: int = _BASE_DPS) -> mpmath.mpf:
        with mpmath.workdps(dps):
            s = mpmath.mpf(self.const.numerator) / self.const.denominator
            for p, q in self.finite.items():
                s += mpmath.mpf(q.numerator) / q.denominator * _ln_prime(p, dps)
            return s + self.arch

    def __float__(self):
        return float(self.mp())

    def sign(self, tol: float = 0.0) -> int:
        """Sign of the value; 0 when it is exactly zero or within err + tol of it."""
        if self.is_exact:
            if not self.finite and self.const == 0:
                return 0
            dps = _BASE_DPS
            while True:
                v = self.mp(dps)
                if abs(v) > mpmath.mpf(10) ** (10 - dps):
                    return 1 if v > 0 else -1
                dps *= 2
                if dps > 2000:  # cannot happen for a nonzero exact value of sane size
                    raise ArithmeticError("failed to separate exact LogValue from zero")
        v = float(self.mp())
        if abs(v) <= self.err + tol + 1e-12 * max(1.0, abs(self.arch)):
            return 0
        return 1 if v > 0 else -1

    def __eq__(self, other):
        if not isinstance(other, (LogValue, int, Fraction)):
            return NotImplemented
        return (self - LogValue.coerce(other)).sign() == 0

    def __hash__(self):
        return hash((tuple(self.finite.items()), self.const, round(self.arch, 9)))

    def __lt__(self, other):
        return (self - LogValue.coerce(other)).sign() < 0

    def __le__(self, other):
        return (self - LogValue.coerce(other)).sign() <= 0

    def __gt__(self, other):
        return (self - LogValue.coerce(other)).sign() > 0

    def __ge__(self, other):
        return (self - LogValue.coerce(other)).sign() >= 0

    def identical(self, other: "LogValue") -> bool:
        """Structural equality (exact parts equal, same float remainder)."""
        return (self.finite == other.finite and self.const == other.const
                and self.arch == other.arch and self.err == other.err)

    def __repr__(self):
        parts = [f"{q}*ln{p}" for p, q in self.finite.items()]
        if self.const:
            parts.append(str(self.const))
        if self.arch or not parts:
            parts.append(repr(self.arch))
        s = " + ".join(parts)
        if self.err:
            s += f" +- {self.err:.3g}"
        return f"LogValue({s})"

    def to_json(self):
        return {
            "finite": {str(p): str(q) for p, q in self.finite.items()},
            "const": str(self.const),
            "arch": self.arch,
            "err": self.err,
            "value": float(self),
        }


def log_value_eval(v: LogValue, dps: int = _BASE_DPS):
    """Evaluate to a float; returns (value, error_bound)."""
    x = v.mp(dps)
    # rounding of the final conversion is far below the tracked bound
    return float(x), v.err


def lv_max(values):
    values = list(values)
    best = values[0]
    for v in values[1:]:
        if v > best:
            best = v
    return best


def lv_min(values):
    values = list(values)
    best = values[0]
    for v in values[1:]:
        if v < best:
            best = v
    return best


def lv_sum(values) -> LogValue:
    total = LogValue()
    for v in values:
        total = total + v
    return total


def product_formula_check(a) -> LogValue:
    """sum over all places of ln|a|_w; exact zero for every nonzero rational."""
    a = to_fraction(a)
    if a == 0:
        raise ZeroInput("product formula needs a nonzero rational")
    total = LogValue.log(abs(a))  # the archimedean place
    for p, e in rational_factor(a).items():
        # |a|_p = p^{-e}
        total = total + LogValue({p: -e})
    return total


@dataclass(frozen=True)
class PlaceFunction:
    """A function on the places with finite support; values are plain reals."""

    finite: Mapping[int, Fraction] = field(default_factory=dict)
    arch_value: Fraction | float = Fraction(0)

    def __post_init__(self):
        for p in self.finite:
            if not sympy.isprime(int(p)):
                raise ValueError(f"{p} is not prime")
        object.__setattr__(self, "finite", _clean(self.finite))
        if not isinstance(self.arch_value, float):
            object.__setattr__(self, "arch_value", to_fraction(self.arch_value))

    @classmethod
    def constant_arch(cls, c) -> "PlaceFunction":
        return cls({}, c)

    def at(self, place: Place):
        if place.is_arch:
            return self.arch_value
        return self.finite.get(place.p, Fraction(0))

    def is_zero(self) -> bool:
        return not self.finite and self.arch_value == 0

    def __add__(self, other: "PlaceFunction") -> "PlaceFunction":
        fin = dict(self.finite)
        for p, q in other.finite.items():
            fin[p] = fin.get(p, 0) + q
        return PlaceFunction(fin, self.arch_value + other.arch_value)

    def __mul__(self, k) -> "PlaceFunction":
        k = to_fraction(k)
        return PlaceFunction({p: q * k for p, q in self.finite.items()},
                             self.arch_value * (float(k) if isinstance(self.arch_value, float) else k))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def to_json(self):
        a = self.arch_value
        return {"finite": {str(p): str(q) for p, q in self.finite.items()},
                "arch": repr(a) if isinstance(a, float) else str(a)}

    @classmethod
    def from_json(cls, obj, path="phi"):
        if obj is None:
            return cls()
        if not isinstance(obj, dict):
            raise SchemaError("place function must be an object", path)
        try:
            fin = {int(p): parse_rational(v, f"{path}.finite.{p}")
                   for p, v in obj.get("finite", {}).items()}
            return cls(fin, parse_rational(obj.get("arch", "0"), path + ".arch"))
        except ValueError as exc:
            raise SchemaError(str(exc), path) from None


def integrate_place_function(phi: PlaceFunction) -> LogValue:
    """sum_w nu(w) phi(w); every place has measure 1 over Q."""
    total = sum(phi.finite.values(), Fraction(0))
    if isinstance(phi.arch_value, float):
        return LogValue(const=total, arch=phi.arch_value)
    return LogValue(const=total + phi.arch_value)


def parse_rational(obj, path="value") -> Fraction:
    """Accepts ints and strings such as "3", "-1/2"; floats are rejected."""
    if isinstance(obj, bool) or isinstance(obj, float):
        raise SchemaError("rationals must be given as strings or integers", path)
    try:
        return to_fraction(obj)
    except (ValueError, TypeError, ZeroDivisionError):
        raise SchemaError(f"not a rational: {obj!r}", path) from None


def format_rational(q: Fraction) -> str:
    return str(to_fraction(q))
