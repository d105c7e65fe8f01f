"""Exact scalars over the rationals or a prime field.

Every coefficient in the library is a :class:`Scalar`.  There is no
floating point anywhere; equality is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

__all__ = [
    "FieldError",
    "Field",
    "Scalar",
    "QQ",
    "GF",
    "field_make",
    "scalar_arith",
    "is_prime",
]


class FieldError(ValueError):
    """Bad field descriptor, mixed-field operation or zero inverse."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class Field:
    """The rationals (``p == 0``) or the prime field of order ``p``."""

    p: int = 0

    def __post_init__(self):
        if self.p != 0 and not is_prime(self.p):
            raise FieldError(f"modulus not prime: {self.p}")

    @property
    def kind(self) -> str:
        return "rationals" if self.p == 0 else "prime"

    @property
    def characteristic(self) -> int:
        return self.p

    def __call__(self, value) -> "Scalar":
        return Scalar.make(self, value)

    def zero(self) -> "Scalar":
        return Scalar(self, 0 if self.p else Fraction(0))

    def one(self) -> "Scalar":
        return Scalar(self, 1 if self.p else Fraction(1))

    def elements(self) -> Iterator["Scalar"]:
        """All elements of a prime field, in residue order."""
        if self.p == 0:
            raise FieldError("the rationals are infinite")
        return (Scalar(self, k) for k in range(self.p))

    def units(self) -> Iterator["Scalar"]:
        return (x for x in self.elements() if x)

    def signs(self) -> list["Scalar"]:
        """Distinct images of +1 and -1 (one element in characteristic 2)."""
        one = self.one()
        return [one] if self.p == 2 else [one, -one]

    def parse(self, text) -> "Scalar":
        """Parse ``"n"``, ``"n/d"`` or an int."""
        if isinstance(text, Scalar):
            return self(text)
        if isinstance(text, int) and not isinstance(text, bool):
            return self(text)
        if not isinstance(text, str):
            raise FieldError(f"cannot parse scalar from {text!r}")
        try:
            q = Fraction(text.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise FieldError(f"bad scalar literal {text!r}") from exc
        return self(q)

    def to_json(self) -> dict:
        if self.p == 0:
            return {"kind": "rationals"}
        return {"kind": "prime", "p": self.p}

    def __repr__(self):
        return "QQ" if self.p == 0 else f"GF({self.p})"


QQ = Field(0)


def GF(p: int) -> Field:
    return Field(p)


def field_make(spec) -> Field:
    """Build a field from a descriptor.

    Accepts a :class:`Field`, ``{"kind": "rationals"}``,
    ``{"kind": "prime", "p": 5}`` (``"prime-field"`` is also accepted),
    the strings ``"Q"``/``"rationals"``, or a bare prime ``int``.
    """
    if isinstance(spec, Field):
        return spec
    if isinstance(spec, bool):
        raise FieldError(f"bad field descriptor {spec!r}")
    if isinstance(spec, int):
        return Field(spec)
    if isinstance(spec, str):
        if spec.lower() in ("q", "qq", "rationals", "rational"):
            return QQ
        if spec.isdigit():
            return Field(int(spec))
        raise FieldError(f"bad field descriptor {spec!r}")
    if isinstance(spec, dict):
        kind = spec.get("kind")
        if kind in ("rationals", "rational", "Q"):
            return QQ
        if kind in ("prime", "prime-field"):
            p = spec.get("p", spec.get("modulus"))
            if isinstance(p, bool) or not isinstance(p, int):
                raise FieldError("prime field needs an integer modulus 'p'")
            return Field(p)
        raise FieldError(f"unknown field kind {kind!r}")
    raise FieldError(f"bad field descriptor {spec!r}")


Number = Union[int, Fraction, "Scalar"]


class Scalar:
    """An immutable element of a :class:`Field` in canonical form."""

    __slots__ = ("field", "value")

    def __init__(self, field: Field, value):
        # trusted constructor: value must already be canonical
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "value", value)

    def __setattr__(self, name, value):
        raise AttributeError("Scalar is immutable")

    def __reduce__(self):
        return (Scalar, (self.field, self.value))

    @classmethod
    def make(cls, field: Field, value) -> "Scalar":
        if isinstance(value, Scalar):
            if value.field != field:
                raise FieldError(f"mixed fields: {value.field} vs {field}")
            return value
        if isinstance(value, bool):
            value = int(value)
        if isinstance(value, str):
            return field.parse(value)
        if field.p == 0:
            if not isinstance(value, (int, Fraction)):
                raise FieldError(f"cannot coerce {value!r} into QQ")
            return cls(field, Fraction(value))
        if isinstance(value, Fraction):
            num = value.numerator % field.p
            den = value.denominator % field.p
            if den == 0:
                raise FieldError(f"{value} has no image in {field}")
            return cls(field, num * pow(den, -1, field.p) % field.p)
        if not isinstance(value, int):
            raise FieldError(f"cannot coerce {value!r} into {field}")
        return cls(field, value % field.p)

    def _coerce(self, other) -> "Scalar":
        if isinstance(other, Scalar):
            if other.field != self.field:
                raise FieldError(f"mixed fields: {self.field} vs {other.field}")
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return Scalar.make(self.field, other)
        return NotImplemented

    def _wrap(self, v) -> "Scalar":
        p = self.field.p
        return Scalar(self.field, v % p if p else v)

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self._wrap(self.value + o.value)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self._wrap(self.value - o.value)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self._wrap(o.value - self.value)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self._wrap(self.value * o.value)

    __rmul__ = __mul__

    def __neg__(self):
        return self._wrap(-self.value)

    def __pos__(self):
        return self

    def inv(self) -> "Scalar":
        if not self:
            raise ZeroDivisionError("zero inverse")
        p = self.field.p
        if p:
            return Scalar(self.field, pow(self.value, -1, p))
        return Scalar(self.field, 1 / self.value)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inv()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inv()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inv() ** (-n)
        p = self.field.p
        if p:
            return Scalar(self.field, pow(self.value, n, p))
        return Scalar(self.field, self.value**n)

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.field == other.field and self.value == other.value
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            try:
                return self == Scalar.make(self.field, other)
            except FieldError:
                return False
        return NotImplemented

    def __hash__(self):
        return hash((self.field.p, self.value))

    def __bool__(self):
        return self.value != 0

    def is_zero(self) -> bool:
        return self.value == 0

    def to_fraction(self) -> Fraction:
        if self.field.p:
            raise FieldError("prime-field residue has no rational value")
        return self.value

    def __str__(self):
        return str(self.value)

    def __repr__(self):
        return f"{self.field!r}({self.value})"


_ARITH = {
    "add": lambda x, y: x + y,
    "sub": lambda x, y: x - y,
    "mul": lambda x, y: x * y,
    "div": lambda x, y: x / y,
    "neg": lambda x, y: -x,
    "inv": lambda x, y: x.inv(),
    "eq": lambda x, y: x == y,
}


def scalar_arith(op: str, x: Scalar, y: Scalar | None = None):
    """Dispatch one of ``add sub mul div neg inv eq``."""
    try:
        fn = _ARITH[op]
    except KeyError:
        raise FieldError(f"unknown operation {op!r}") from None
    if op not in ("neg", "inv"):
        if y is None:
            raise FieldError(f"{op} needs two operands")
        if not isinstance(y, Scalar) or y.field != x.field:
            raise FieldError("mixed-field operands")
    return fn(x, y)
