"""Exact arithmetic in a real quadratic field F = Q(sqrt(D)).

Elements are stored as rational coordinates (a, b) with respect to the
integral basis (1, w), where w = sqrt(D) for D = 2, 3 mod 4 and
w = (1 + sqrt(D))/2 for D = 1 mod 4.  The two real embeddings send w to
the positive and negative square root respectively; all sign and
comparison questions are decided by exact rational arithmetic.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache


def _is_squarefree(n: int) -> bool:
    if n % 4 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        d += 2
    return True


@lru_cache(maxsize=None)
def RealQuadraticField(D: int) -> "_Field":
    """Return the (cached) real quadratic field of squarefree D > 1."""
    return _Field(D)


class _Field:
    def __init__(self, D: int):
        if D <= 1 or not _is_squarefree(D):
            raise ValueError("D must be a squarefree integer > 1")
        self.D = D
        if D % 4 == 1:
            self.disc = D
            self.omega_trace = 1
            self.omega_norm = (1 - D) // 4
        else:
            self.disc = 4 * D
            self.omega_trace = 0
            self.omega_norm = -D
        self.zero = FieldElement(self, Fraction(0), Fraction(0))
        self.one = FieldElement(self, Fraction(1), Fraction(0))
        self.omega = FieldElement(self, Fraction(0), Fraction(1))
        if self.omega_trace:
            self.sqrtD = FieldElement(self, Fraction(-1), Fraction(2))
        else:
            self.sqrtD = self.omega

    def __repr__(self):
        return f"Q(sqrt({self.D}))"

    def __eq__(self, other):
        return isinstance(other, _Field) and other.D == self.D

    def __hash__(self):
        return hash(("field", self.D))

    def element(self, a, b=0) -> "FieldElement":
        return FieldElement(self, Fraction(a), Fraction(b))

    def from_rational(self, q) -> "FieldElement":
        return FieldElement(self, Fraction(q), Fraction(0))

    def from_sqrt_coords(self, u, v) -> "FieldElement":
        """Element u + v*sqrt(D) written in the integral basis."""
        u, v = Fraction(u), Fraction(v)
        if self.omega_trace:
            return FieldElement(self, u - v, 2 * v)
        return FieldElement(self, u, v)

    def sqrt_bounds(self, digits: int = 30):
        """Rational lo < sqrt(D) < hi agreeing to ~`digits` decimals."""
        scale = 10 ** digits
        r = math.isqrt(self.D * scale * scale)
        return Fraction(r, scale), Fraction(r + 1, scale)


class FieldElement:
    __slots__ = ("field", "a", "b")

    def __init__(self, field: _Field, a: Fraction, b: Fraction):
        self.field = field
        self.a = a
        self.b = b

    # -- basic ring structure -------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        return FieldElement(self.field, self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, -self.a, -self.b)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        F = self.field
        a, b, c, d = self.a, self.b, other.a, other.b
        return FieldElement(
            F,
            a * c - b * d * F.omega_norm,
            a * d + b * c + b * d * F.omega_trace,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = self.field.one
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.field is not self.field and other.field != self.field:
                raise ValueError("elements of different fields")
            return other
        return FieldElement(self.field, Fraction(other), Fraction(0))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.a == other and self.b == 0
        return (
            isinstance(other, FieldElement)
            and self.field == other.field
            and self.a == other.a
            and self.b == other.b
        )

    def __hash__(self):
        return hash((self.field.D, self.a, self.b))

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def __repr__(self):
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}*w"
        return f"{self.a}{'+' if self.b > 0 else '-'}{abs(self.b)}*w"

    # -- field theory ----------------------------------------------------

    def conjugate(self) -> "FieldElement":
        return FieldElement(
            self.field, self.a + self.b * self.field.omega_trace, -self.b
        )

    def norm(self) -> Fraction:
        F = self.field
        return self.a * self.a + self.a * self.b * F.omega_trace + self.b * self.b * F.omega_norm

    def trace(self) -> Fraction:
        return 2 * self.a + self.b * self.field.omega_trace

    def inverse(self) -> "FieldElement":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("zero element of the field")
        c = self.conjugate()
        return FieldElement(self.field, c.a / n, c.b / n)

    def sqrt_coords(self):
        """Coordinates (u, v) with self = u + v*sqrt(D)."""
        if self.field.omega_trace:
            return self.a + self.b / 2, self.b / 2
        return self.a, self.b

    def sign_embedding(self, which: int) -> int:
        """Exact sign of theta_i(self); which = 0 is the positive root."""
        u, v = self.sqrt_coords()
        if which == 1:
            v = -v
        if v == 0:
            return 0 if u == 0 else (1 if u > 0 else -1)
        if u == 0:
            return 1 if v > 0 else -1
        if u > 0 and v > 0:
            return 1
        if u < 0 and v < 0:
            return -1
        # mixed signs: compare u^2 against v^2 * D
        t = u * u - v * v * self.field.D
        dominant = 1 if u > 0 else -1
        if t == 0:
            return 0
        return dominant if t > 0 else -dominant

    def is_totally_positive(self) -> bool:
        if not self:
            raise ValueError("totally positive is undefined for zero")
        return self.sign_embedding(0) > 0 and self.sign_embedding(1) > 0

    def compare_embedding(self, other, which: int = 0) -> int:
        """Exact sign of theta_which(self - other)."""
        return (self - self._coerce(other)).sign_embedding(which)

    def embedding_bounds(self, which: int, digits: int = 30):
        """Rational interval containing theta_which(self)."""
        u, v = self.sqrt_coords()
        if which == 1:
            v = -v
        lo, hi = self.field.sqrt_bounds(digits)
        if v >= 0:
            return u + v * lo, u + v * hi
        return u + v * hi, u + v * lo

    def denominator(self) -> int:
        return math.lcm(self.a.denominator, self.b.denominator)


def chi_value(alpha: FieldElement, exponents) -> FieldElement:
    """The weight character  theta_1(alpha)^n1 * theta_2(alpha)^n2  as an
    exact field element (theta_1 read as the identity embedding)."""
    n1, n2 = exponents
    return alpha ** n1 * alpha.conjugate() ** n2


def element_from_json(field: _Field, data) -> FieldElement:
    return FieldElement(field, Fraction(data["a"]), Fraction(data["b"]))


def element_to_json(x: FieldElement):
    return {"a": str(x.a), "b": str(x.b)}
