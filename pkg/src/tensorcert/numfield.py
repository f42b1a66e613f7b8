"""Exact arithmetic in the number field Q(i, sqrt2, sqrt3).

Elements are stored sparsely over the basis ``sqrt2**p * sqrt3**q * i**r``
with ``p, q, r`` in {0, 1}; the basis index is the bit pattern ``p | q<<1 | r<<2``.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational

_SQRT2, _SQRT3, _I = 1, 2, 4

# product of two basis elements: (basis index, rational factor)
_MUL = [[None] * 8 for _ in range(8)]
for _a in range(8):
    for _b in range(8):
        _f = 1
        if _a & _b & _SQRT2:
            _f *= 2
        if _a & _b & _SQRT3:
            _f *= 3
        if _a & _b & _I:
            _f = -_f
        _MUL[_a][_b] = (_a ^ _b, _f)

_BASIS_NAMES = {
    0: "",
    _SQRT2: "sqrt2",
    _SQRT3: "sqrt3",
    _SQRT2 | _SQRT3: "sqrt2*sqrt3",
    _I: "i",
    _I | _SQRT2: "i*sqrt2",
    _I | _SQRT3: "i*sqrt3",
    _I | _SQRT2 | _SQRT3: "i*sqrt2*sqrt3",
}


class Surd:
    """Immutable element of Q(i, sqrt2, sqrt3)."""

    __slots__ = ("_c", "_hash")

    def __init__(self, value=0, _raw=None):
        if _raw is not None:
            self._c = _raw
        elif isinstance(value, Surd):
            self._c = value._c
        else:
            if not isinstance(value, (int, Fraction, Rational)):
                raise TypeError(f"cannot build Surd from {type(value).__name__}")
            v = Fraction(value)
            self._c = {0: v} if v else {}
        self._hash = None

    # constructors -------------------------------------------------------
    @classmethod
    def _make(cls, comps: dict) -> "Surd":
        return cls(_raw={k: v for k, v in comps.items() if v})

    @classmethod
    def basis(cls, index: int, coeff=1) -> "Surd":
        return cls._make({index: Fraction(coeff)})

    @classmethod
    def from_components(cls, comps) -> "Surd":
        """Build from a length-8 sequence indexed by basis bit pattern."""
        return cls._make({k: Fraction(v) for k, v in enumerate(comps)})

    # inspection ---------------------------------------------------------
    def components(self) -> tuple:
        return tuple(self._c.get(k, Fraction(0)) for k in range(8))

    def items(self):
        return sorted(self._c.items())

    def is_zero(self) -> bool:
        return not self._c

    def is_rational(self) -> bool:
        return all(k == 0 for k in self._c)

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self._c.get(0, Fraction(0))

    def real_part(self) -> "Surd":
        """Component without the imaginary unit (an element of Q(sqrt2, sqrt3))."""
        return Surd._make({k: v for k, v in self._c.items() if not k & _I})

    def imag_part(self) -> "Surd":
        return Surd._make({k ^ _I: v for k, v in self._c.items() if k & _I})

    def leading(self) -> Fraction:
        """Coefficient of the lowest basis element present; used for sign normalisation."""
        if not self._c:
            return Fraction(0)
        return self._c[min(self._c)]

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._c)
        for k, v in other._c.items():
            out[k] = out.get(k, 0) + v
        return Surd._make(out)

    __radd__ = __add__

    def __neg__(self):
        return Surd(_raw={k: -v for k, v in self._c.items()})

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if len(other._c) == 1 and 0 in other._c:
            f = other._c[0]
            return Surd(_raw={k: v * f for k, v in self._c.items()})
        out = {}
        for a, va in self._c.items():
            row = _MUL[a]
            for b, vb in other._c.items():
                k, f = row[b]
                out[k] = out.get(k, 0) + f * va * vb
        return Surd._make(out)

    __rmul__ = __mul__

    def conjugate(self, flips: int) -> "Surd":
        """Apply the Galois automorphism negating the generators in ``flips``."""
        return Surd(_raw={k: (-v if bin(k & flips).count("1") % 2 else v)
                          for k, v in self._c.items()})

    def norm(self) -> Fraction:
        y = self * self.conjugate(_I)
        z = y * y.conjugate(_SQRT2)
        w = z * z.conjugate(_SQRT3)
        return w.to_fraction()

    def inverse(self) -> "Surd":
        if not self._c:
            raise ZeroDivisionError("inverse of zero in Q(i, sqrt2, sqrt3)")
        if len(self._c) == 1 and 0 in self._c:
            return Surd(_raw={0: 1 / self._c[0]})
        c1 = self.conjugate(_I)
        y = self * c1
        c2 = y.conjugate(_SQRT2)
        z = y * c2
        c3 = z.conjugate(_SQRT3)
        n = (z * c3).to_fraction()
        return c1 * c2 * c3 * Surd(Fraction(1) / n)

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return _coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out, base = Surd(1), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # comparison ---------------------------------------------------------
    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return False
        return self._c == other._c

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._c.items()))
        return self._hash

    def __bool__(self):
        return bool(self._c)

    def __repr__(self):
        return f"Surd({self})"

    def __str__(self):
        return format_surd(self)


def _coerce(x):
    if isinstance(x, Surd):
        return x
    if isinstance(x, (int, Fraction)):
        return Surd(x)
    return NotImplemented


def _format_rational(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def format_surd(x: Surd) -> str:
    """Render as a sum of ``rational*basis`` pieces parseable by the expression grammar."""
    if x.is_zero():
        return "0"
    parts = []
    for k, v in x.items():
        name = _BASIS_NAMES[k]
        mag = abs(v)
        if not name:
            body = _format_rational(mag)
        elif mag == 1:
            body = name
        elif mag.denominator == 1:
            body = f"{mag.numerator}*{name}"
        else:
            body = f"({_format_rational(mag)})*{name}"
        parts.append(("-" if v < 0 else "+", body))
    sign, body = parts[0]
    text = ("-" if sign == "-" else "") + body
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


ZERO = Surd(0)
ONE = Surd(1)
I = Surd.basis(_I)
SQRT2 = Surd.basis(_SQRT2)
SQRT3 = Surd.basis(_SQRT3)
