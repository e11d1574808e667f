"""Exact arithmetic in the quadratic field Q(sqrt2).

Every stepsize, multiplier, and slack-matrix entry in this package is a
number a + b*sqrt2 with rational a, b, so the whole verification pipeline
can run without a single floating-point operation.  The silver ratio
rho = 1 + sqrt2 is a unit of the ring Z[sqrt2] (rho * (rho - 2) = 1), which
is why its powers -- positive and negative alike -- keep integer components
and why all the divisions that occur stay inside the field.
"""

from __future__ import annotations

import math
from fractions import Fraction

_SQRT2_FLOAT = math.sqrt(2.0)


def _component(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(
        f"rational component must be int or Fraction, not {type(value).__name__}"
    )


class RadicalScalar:
    """Exact number a + b*sqrt2 with arbitrary-precision rational a, b.

    The representation is unique because sqrt2 is irrational, so equality
    is componentwise.  Instances are immutable in spirit: every operation
    returns a new value, and values hash consistently with plain rationals
    (a RadicalScalar with b == 0 equals, and hashes like, its rational part).
    """

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        self.a = _component(a)
        self.b = _component(b)

    # -- ring/field operations -------------------------------------------

    def __add__(self, other):
        if isinstance(other, RadicalScalar):
            return _raw(self.a + other.a, self.b + other.b)
        if isinstance(other, (int, Fraction)):
            return _raw(self.a + other, self.b)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, RadicalScalar):
            return _raw(self.a - other.a, self.b - other.b)
        if isinstance(other, (int, Fraction)):
            return _raw(self.a - other, self.b)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, (int, Fraction)):
            return _raw(other - self.a, -self.b)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, RadicalScalar):
            # (a1 + b1 r)(a2 + b2 r) with r^2 = 2
            return _raw(
                self.a * other.a + 2 * self.b * other.b,
                self.a * other.b + self.b * other.a,
            )
        if isinstance(other, (int, Fraction)):
            return _raw(self.a * other, self.b * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, RadicalScalar):
            return self * other._inverse()
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero in Q(sqrt2)")
            return _raw(self.a / other, self.b / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self._inverse() * other
        return NotImplemented

    def _inverse(self) -> "RadicalScalar":
        # 1/(a + b sqrt2) = (a - b sqrt2) / (a^2 - 2 b^2); the norm is zero
        # only for a = b = 0 since sqrt2 is irrational.
        norm = self.a * self.a - 2 * self.b * self.b
        if norm == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt2)")
        return _raw(self.a / norm, -self.b / norm)

    def __neg__(self):
        return _raw(-self.a, -self.b)

    def __pos__(self):
        return self

    def __abs__(self):
        return self if self.sign() >= 0 else -self

    # -- ordering ----------------------------------------------------------

    def sign(self) -> int:
        """Exact sign of the real number a + b*sqrt2: -1, 0, or +1."""
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sa == 0:
            return sb
        if sb == 0 or sa == sb:
            return sa
        # Mixed signs: |a| vs |b| sqrt2 reduces to comparing a^2 with 2 b^2.
        gap = self.a * self.a - 2 * self.b * self.b
        return sa * ((gap > 0) - (gap < 0))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __eq__(self, other):
        if isinstance(other, RadicalScalar):
            return self.a == other.a and self.b == other.b
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b))

    def _diff_sign(self, other) -> int:
        diff = self - other
        if diff is NotImplemented:
            raise TypeError(f"cannot compare RadicalScalar with {type(other).__name__}")
        return diff.sign()

    def __lt__(self, other):
        return self._diff_sign(other) < 0

    def __le__(self, other):
        return self._diff_sign(other) <= 0

    def __gt__(self, other):
        return self._diff_sign(other) > 0

    def __ge__(self, other):
        return self._diff_sign(other) >= 0

    # -- conversions ---------------------------------------------------------

    def to_float(self) -> float:
        return float(self.a) + float(self.b) * _SQRT2_FLOAT

    __float__ = to_float

    def exact_str(self) -> str:
        """Canonical serialization "a/b + c/d*sqrt2" in lowest terms."""
        return (
            f"{self.a.numerator}/{self.a.denominator}"
            f" + {self.b.numerator}/{self.b.denominator}*sqrt2"
        )

    @classmethod
    def from_exact_str(cls, text: str) -> "RadicalScalar":
        head, _, tail = text.partition(" + ")
        if not tail.endswith("*sqrt2"):
            raise ValueError(f"not a serialized RadicalScalar: {text!r}")
        return cls(Fraction(head), Fraction(tail[: -len("*sqrt2")]))

    def __repr__(self):
        return f"RadicalScalar({self.a}, {self.b})"

    def __str__(self):
        return self.exact_str()


def _raw(a: Fraction, b: Fraction) -> RadicalScalar:
    out = RadicalScalar.__new__(RadicalScalar)
    out.a = a
    out.b = b
    return out


ZERO = RadicalScalar(0, 0)
ONE = RadicalScalar(1, 0)
SQRT2 = RadicalScalar(0, 1)
RHO = RadicalScalar(1, 1)  # silver ratio 1 + sqrt2
RHO_INV = RadicalScalar(-1, 1)  # 1/rho = sqrt2 - 1

_rho_cache: dict[int, RadicalScalar] = {0: ONE, 1: RHO, -1: RHO_INV}


def rho_pow(j: int) -> RadicalScalar:
    """Exact rho**j for any integer j, memoized.

    Powers are built incrementally from rho and 1/rho = sqrt2 - 1; since
    rho is a unit, every power has integer components (Pell numbers).
    """
    value = _rho_cache.get(j)
    if value is None:
        value = rho_pow(j - 1) * RHO if j > 0 else rho_pow(j + 1) * RHO_INV
        _rho_cache[j] = value
    return value
