"""Rational functions in named scalar symbols over Q(i, sqrt2, sqrt3).

A :class:`Coeff` keeps its denominator as a product of monic irreducible
polynomials ("atoms") raised to positive powers, and its numerator free of
any of those atoms.  With atoms irreducible and monic that representation is
unique, so structural equality decides equality of rational functions.
Factorisation of new denominators is delegated to sympy and cached.
"""
from __future__ import annotations

import functools
from fractions import Fraction

from .numfield import Surd, ONE, ZERO

# A monomial is a tuple of (variable name, exponent) pairs sorted by name.
Monomial = tuple

_ONE_MONO: Monomial = ()


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    d = dict(m1)
    for v, e in m2:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def _mono_div(m1: Monomial, m2: Monomial):
    """m1 / m2 when m2 divides m1, else None."""
    d = dict(m1)
    for v, e in m2:
        r = d.get(v, 0) - e
        if r < 0:
            return None
        if r:
            d[v] = r
        else:
            d.pop(v, None)
    return tuple(sorted(d.items()))


def _mono_cmp(m1: Monomial, m2: Monomial) -> int:
    """Pure lex order, variables ranked by name (earlier name dominates)."""
    i = 0
    while True:
        if i >= len(m1) and i >= len(m2):
            return 0
        if i >= len(m1):
            return -1
        if i >= len(m2):
            return 1
        (v1, e1), (v2, e2) = m1[i], m2[i]
        if v1 != v2:
            return 1 if v1 < v2 else -1
        if e1 != e2:
            return 1 if e1 > e2 else -1
        i += 1


_mono_key = functools.cmp_to_key(_mono_cmp)


class Poly:
    """Sparse multivariate polynomial with :class:`Surd` coefficients."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms=None):
        self.terms = {m: c for m, c in (terms or {}).items() if c}
        self._hash = None

    @classmethod
    def const(cls, c) -> "Poly":
        return cls({_ONE_MONO: Surd(c)})

    @classmethod
    def var(cls, name: str) -> "Poly":
        return cls({((name, 1),): ONE})

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return all(m == _ONE_MONO for m in self.terms)

    def const_value(self) -> Surd:
        return self.terms.get(_ONE_MONO, ZERO)

    def variables(self) -> set:
        return {v for m in self.terms for v, _ in m}

    def total_degree(self) -> int:
        return max((sum(e for _, e in m) for m in self.terms), default=0)

    def leading(self):
        m = max(self.terms, key=_mono_key)
        return m, self.terms[m]

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: _mono_key(t[0]), reverse=True)

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, ZERO) + c
        return Poly(out)

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, ZERO) + c1 * c2
        return Poly(out)

    def scale(self, c: Surd) -> "Poly":
        if not c:
            return Poly()
        return Poly({m: v * c for m, v in self.terms.items()})

    def __pow__(self, n: int) -> "Poly":
        out = Poly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def divide_exact(self, d: "Poly"):
        """Quotient if ``d`` divides ``self`` exactly, else None."""
        if d.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        lm, lc = d.leading()
        inv = lc.inverse()
        rem = dict(self.terms)
        quot = {}
        while rem:
            m = max(rem, key=_mono_key)
            q = _mono_div(m, lm)
            if q is None:
                return None
            c = rem[m] * inv
            quot[q] = quot.get(q, ZERO) + c
            for dm, dc in d.terms.items():
                k = _mono_mul(q, dm)
                v = rem.get(k, ZERO) - c * dc
                if v:
                    rem[k] = v
                else:
                    rem.pop(k, None)
        return Poly(quot)

    def monic(self):
        """(leading coefficient, monic polynomial)."""
        _, lc = self.leading()
        return lc, self.scale(lc.inverse())

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def sort_key(self):
        return tuple((_mono_key(m), tuple(c.components())) for m, c in self.sorted_terms())

    def __repr__(self):
        return f"Poly({format_poly(self)})"


def format_monomial(m: Monomial) -> str:
    return "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)


def format_poly(p: Poly) -> str:
    if p.is_zero():
        return "0"
    pieces = []
    for m, c in p.sorted_terms():
        neg = c.leading() < 0 if len(c.items()) == 1 else False
        cc = -c if neg else c
        ms = format_monomial(m)
        if not ms:
            body = str(cc)
        elif cc == ONE:
            body = ms
        elif len(cc.items()) == 1:
            body = f"{cc}*{ms}"
        else:
            body = f"({cc})*{ms}"
        if len(cc.items()) > 1 and not ms:
            body = f"({cc})"
        pieces.append(("-" if neg else "+", body))
    text = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
    for s, b in pieces[1:]:
        text += f" {s} {b}"
    return text


# ---------------------------------------------------------------------------
# denominator atoms


@functools.lru_cache(maxsize=None)
def factor_atoms(p: Poly):
    """Split a non-zero polynomial into (unit, ((monic irreducible atom, exponent), ...))."""
    if p.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if p.is_const():
        return p.const_value(), ()
    atoms = {}
    # monomial content
    mons = list(p.terms)
    content = dict(mons[0])
    for m in mons[1:]:
        md = dict(m)
        content = {v: min(e, md.get(v, 0)) for v, e in content.items() if md.get(v, 0)}
    rest = p
    if content:
        cm = tuple(sorted(content.items()))
        rest = Poly({_mono_div(m, cm): c for m, c in p.terms.items()})
        for v, e in content.items():
            atoms[Poly.var(v)] = e
    if rest.is_const():
        return rest.const_value(), _sorted_atoms(atoms)
    lc, mon = rest.monic()
    if rest.total_degree() == 1 or len(rest.terms) == 1:
        atoms[mon] = atoms.get(mon, 0) + 1
        return lc, _sorted_atoms(atoms)
    unit, facs = _sympy_factor(rest)
    for f, e in facs:
        atoms[f] = atoms.get(f, 0) + e
    return unit, _sorted_atoms(atoms)


def _sorted_atoms(atoms: dict):
    return tuple(sorted(atoms.items(), key=lambda t: t[0].sort_key()))


def _sympy_factor(p: Poly):
    import sympy

    gens = sorted(p.variables())
    syms = [sympy.Symbol(g) for g in gens]
    expr = sum(surd_to_sympy(c) * sympy.Mul(*[syms[gens.index(v)] ** e for v, e in m])
               for m, c in p.terms.items())
    unit, facs = sympy.factor_list(expr, *syms,
                                   extension=[sympy.sqrt(2), sympy.sqrt(3), sympy.I])
    out_unit = surd_from_sympy(unit)
    out = []
    for f, e in facs:
        fp = poly_from_sympy(sympy.expand(f), gens, syms)
        lc, mon = fp.monic()
        out_unit = out_unit * lc ** e
        out.append((mon, e))
    return out_unit, out


def surd_to_sympy(c: Surd):
    import sympy

    s2, s3 = sympy.sqrt(2), sympy.sqrt(3)
    total = sympy.Integer(0)
    for k, v in c.items():
        b = sympy.Integer(1)
        if k & 1:
            b *= s2
        if k & 2:
            b *= s3
        if k & 4:
            b *= sympy.I
        total += sympy.Rational(v.numerator, v.denominator) * b
    return total


def surd_from_sympy(x) -> Surd:
    import sympy

    x = sympy.expand(x)
    out = ZERO
    for term, coeff in x.as_coefficients_dict().items():
        idx = 0
        rest = sympy.Integer(1)
        for f in sympy.Mul.make_args(term):
            if f == sympy.sqrt(2):
                idx |= 1
            elif f == sympy.sqrt(3):
                idx |= 2
            elif f == sympy.sqrt(6):
                idx |= 3
            elif f == sympy.I:
                idx |= 4
            else:
                rest *= f
        if not rest.is_Rational:
            raise ValueError(f"coefficient {x} leaves Q(i, sqrt2, sqrt3)")
        q = sympy.Rational(coeff) * rest
        out = out + Surd.basis(idx, Fraction(int(q.p), int(q.q)))
    return out


def poly_from_sympy(expr, gens, syms) -> Poly:
    import sympy

    terms = {}
    for mono, coeff in sympy.Poly(expr, *syms).terms():
        m = tuple(sorted((gens[i], e) for i, e in enumerate(mono) if e))
        terms[m] = terms.get(m, ZERO) + surd_from_sympy(coeff)
    return Poly(terms)


# ---------------------------------------------------------------------------
# rational functions


class Coeff:
    """Element of Q(i, sqrt2, sqrt3)(x1, ..., xn) in unique reduced form."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Poly, den=()):
        self.num = num
        self.den = den  # tuple of (monic atom, positive exponent)
        self._hash = None

    # constructors
    @classmethod
    def const(cls, c) -> "Coeff":
        return cls(Poly.const(c))

    @classmethod
    def symbol(cls, name: str) -> "Coeff":
        return cls(Poly.var(name))

    @classmethod
    def from_poly_ratio(cls, num: Poly, den: Poly) -> "Coeff":
        unit, atoms = factor_atoms(den)
        return _normalise(num.scale(unit.inverse()), dict(atoms))

    # predicates
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return not self.den and self.num.is_const() and self.num.const_value() == ONE

    def is_const(self) -> bool:
        return not self.den and self.num.is_const()

    def const_value(self) -> Surd:
        if not self.is_const():
            raise ValueError(f"{self} is not constant")
        return self.num.const_value()

    def variables(self) -> set:
        out = set(self.num.variables())
        for a, _ in self.den:
            out |= a.variables()
        return out

    def den_poly(self) -> Poly:
        out = Poly.const(1)
        for a, e in self.den:
            out = out * a ** e
        return out

    # arithmetic
    def __add__(self, other):
        other = as_coeff(other)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        d1, d2 = dict(self.den), dict(other.den)
        common = dict(d1)
        for a, e in d2.items():
            common[a] = max(common.get(a, 0), e)
        n1 = self.num * _atoms_poly({a: e - d1.get(a, 0) for a, e in common.items()})
        n2 = other.num * _atoms_poly({a: e - d2.get(a, 0) for a, e in common.items()})
        return _normalise(n1 + n2, common)

    __radd__ = __add__

    def __neg__(self):
        return Coeff(-self.num, self.den)

    def __sub__(self, other):
        return self + (-as_coeff(other))

    def __rsub__(self, other):
        return as_coeff(other) - self

    def __mul__(self, other):
        other = as_coeff(other)
        if self.is_zero() or other.is_zero():
            return ZERO_COEFF
        if other.is_const():
            return Coeff(self.num.scale(other.num.const_value()), self.den)
        if self.is_const():
            return Coeff(other.num.scale(self.num.const_value()), other.den)
        atoms = dict(self.den)
        for a, e in other.den:
            atoms[a] = atoms.get(a, 0) + e
        return _normalise(self.num * other.num, atoms)

    __rmul__ = __mul__

    def inverse(self) -> "Coeff":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero coefficient")
        unit, atoms = factor_atoms(self.num)
        return _normalise(_atoms_poly(dict(self.den)).scale(unit.inverse()), dict(atoms))

    def __truediv__(self, other):
        return self * as_coeff(other).inverse()

    def __rtruediv__(self, other):
        return as_coeff(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = ONE_COEFF
        for _ in range(n):
            out = out * self
        return out

    def subs(self, values: dict) -> "Coeff":
        """Substitute variables by Coeff values (variables not in ``values`` stay)."""
        if not (self.variables() & set(values)):
            return self
        num = _eval_poly(self.num, values)
        den = ONE_COEFF
        for a, e in self.den:
            den = den * _eval_poly(a, values) ** e
        return num / den

    def evaluate(self, values: dict) -> Surd:
        """Numeric value with every variable bound to a Surd."""
        missing = self.variables() - set(values)
        if missing:
            raise KeyError(f"unassigned scalar(s): {', '.join(sorted(missing))}")
        num = _eval_poly_num(self.num, values)
        den = ONE
        for a, e in self.den:
            den = den * _eval_poly_num(a, values) ** e
        if den.is_zero():
            raise ZeroDivisionError("coefficient denominator vanishes at sample point")
        return num / den

    # identity
    def __eq__(self, other):
        if not isinstance(other, Coeff):
            try:
                other = as_coeff(other)
            except TypeError:
                return False
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def is_negative_form(self) -> bool:
        """True when printing would naturally lead with a minus sign."""
        if self.is_zero():
            return False
        _, lc = self.num.sorted_terms()[0]
        return lc.leading() < 0

    def __repr__(self):
        return f"Coeff({format_coeff(self)})"

    def __str__(self):
        return format_coeff(self)


def _atoms_poly(atoms: dict) -> Poly:
    out = Poly.const(1)
    for a, e in atoms.items():
        if e:
            out = out * a ** e
    return out


def _normalise(num: Poly, atoms: dict) -> Coeff:
    if num.is_zero():
        return ZERO_COEFF
    atoms = {a: e for a, e in atoms.items() if e > 0}
    for a in list(atoms):
        while atoms.get(a, 0) > 0:
            q = num.divide_exact(a)
            if q is None:
                break
            num = q
            atoms[a] -= 1
    return Coeff(num, _sorted_atoms({a: e for a, e in atoms.items() if e > 0}))


def _eval_poly(p: Poly, values: dict) -> Coeff:
    total = ZERO_COEFF
    for m, c in p.terms.items():
        t = Coeff(Poly.const(c))
        rest = []
        for v, e in m:
            if v in values:
                t = t * as_coeff(values[v]) ** e
            else:
                rest.append((v, e))
        if rest:
            t = t * Coeff(Poly({tuple(rest): ONE}))
        total = total + t
    return total


def _eval_poly_num(p: Poly, values: dict) -> Surd:
    total = ZERO
    for m, c in p.terms.items():
        t = c
        for v, e in m:
            t = t * values[v] ** e
        total = total + t
    return total


def as_coeff(x) -> Coeff:
    if isinstance(x, Coeff):
        return x
    if isinstance(x, (int, Fraction, Surd)):
        return Coeff.const(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Coeff")


def format_coeff(c: Coeff) -> str:
    """Text form accepted by the expression parser."""
    if c.is_zero():
        return "0"
    num = format_poly(c.num)
    if not c.den:
        return num
    pieces = []
    for a, e in c.den:
        s = format_poly(a)
        if len(a.terms) > 1:
            s = f"({s})"
        pieces.append(s if e == 1 else f"{s}^{e}")
    den = "*".join(pieces)
    if len(pieces) > 1:
        den = f"({den})"
    simple = len(c.num.terms) == 1 and len(next(iter(c.num.terms.values())).items()) == 1
    numtxt = num if simple else f"({num})"
    return f"{numtxt}/{den}"


ZERO_COEFF = Coeff(Poly())
ONE_COEFF = Coeff.const(1)
