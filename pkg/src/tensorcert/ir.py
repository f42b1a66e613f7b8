"""Immutable expression representation for abstract-index tensor calculus.

An :class:`Expr` is a sum of :class:`Term` objects; a term is a scalar
:class:`~tensorcert.scalars.Coeff` times a product of :class:`Factor` objects.
Factors refer to tensors by name, so every semantic operation takes the
:class:`SymbolTable` the names resolve against.
"""
from __future__ import annotations

import itertools
import re
import threading
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from .scalars import Coeff, ONE_COEFF, ZERO_COEFF, as_coeff


class TensorError(Exception):
    """Base class for all errors raised by the engine."""


class DeclarationError(TensorError):
    pass


class IndexStructureError(TensorError):
    pass


INDEX_NAME = re.compile(r"[A-Za-z][0-9]*")
METRIC = "g"


@dataclass(frozen=True, order=True)
class Index:
    name: str
    up: bool = False

    def flipped(self) -> "Index":
        return Index(self.name, not self.up)

    def __str__(self):
        return ("^" if self.up else "_") + self.name


def up(name: str) -> Index:
    return Index(name, True)


def down(name: str) -> Index:
    return Index(name, False)


# ---------------------------------------------------------------------------
# symbols


@dataclass(frozen=True)
class TensorSymbol:
    """A declared tensor.

    ``symmetries`` holds signed generators ``(perm, sign)`` where ``perm`` is a
    1-based permutation of the slots; ``traceless_pairs`` and ``cyclic`` use
    1-based slot numbers too.  ``charge`` is a coefficient (0 or a charge
    symbol such as ``e``).
    """

    name: str
    rank: int
    symmetries: tuple = ()
    traceless_pairs: tuple = ()
    charge: Coeff = ZERO_COEFF
    cyclic: tuple = ()

    def __post_init__(self):
        if self.rank < 0:
            raise DeclarationError(f"{self.name}: negative rank")
        for perm, sign in self.symmetries:
            if sorted(perm) != list(range(1, self.rank + 1)):
                raise DeclarationError(
                    f"{self.name}: symmetry generator {perm} is not a permutation of 1..{self.rank}")
            if sign not in (1, -1):
                raise DeclarationError(f"{self.name}: generator sign must be +1 or -1")
        for pair in self.traceless_pairs:
            if len(pair) != 2 or pair[0] == pair[1] or not all(1 <= s <= self.rank for s in pair):
                raise DeclarationError(f"{self.name}: bad traceless pair {pair}")
        for trip in self.cyclic:
            if len(set(trip)) != 3 or not all(1 <= s <= self.rank for s in trip):
                raise DeclarationError(f"{self.name}: bad cyclic triple {trip}")
        if _group_closure(self.rank, self.symmetries) is None:
            raise DeclarationError(f"{self.name}: symmetry generators force the tensor to vanish")

    @property
    def group(self) -> tuple:
        """All signed slot permutations (0-based images) generated by the symmetries."""
        return _group_closure(self.rank, self.symmetries)

    @property
    def traceless_closure(self) -> frozenset:
        """0-based slot pairs with vanishing trace, closed under the symmetry group."""
        return _traceless_closure(self.rank, self.symmetries, self.traceless_pairs)

    @property
    def is_charged(self) -> bool:
        return not self.charge.is_zero()


_GROUP_CACHE: dict = {}


def _group_closure(rank: int, gens: tuple):
    key = (rank, gens)
    if key in _GROUP_CACHE:
        return _GROUP_CACHE[key]
    ident = tuple(range(rank))
    elems = {ident: 1}
    frontier = [ident]
    g0 = [(tuple(p - 1 for p in perm), sign) for perm, sign in gens]
    ok = True
    while frontier and ok:
        nxt = []
        for e in frontier:
            for p, s in g0:
                # compose: apply generator after e (slot j of result reads slot p[j] of e-image)
                c = tuple(e[p[j]] for j in range(rank))
                sign = elems[e] * s
                if c in elems:
                    if elems[c] != sign:
                        ok = False
                        break
                else:
                    elems[c] = sign
                    nxt.append(c)
            if not ok:
                break
        frontier = nxt
    result = tuple(sorted(elems.items())) if ok else None
    _GROUP_CACHE[key] = result
    return result


def _traceless_closure(rank, gens, pairs) -> frozenset:
    group = _group_closure(rank, gens)
    out = set()
    for a, b in pairs:
        for perm, _ in group:
            # slot j of the permuted tensor holds original slot perm[j]
            inv = {perm[j]: j for j in range(rank)}
            x, y = inv[a - 1], inv[b - 1]
            out.add((min(x, y), max(x, y)))
    return frozenset(out)


def sym(*slots) -> tuple:
    """Generator for symmetry under swapping two slots (1-based)."""
    return (_swap(slots), 1)


def antisym(*slots) -> tuple:
    return (_swap(slots), -1)


def _swap(slots):
    # slots is (i, j) or, for a pair-exchange, ((i, j), (k, l))
    if isinstance(slots[0], tuple):
        (i, j), (k, l) = slots
        n = max(i, j, k, l)
        perm = list(range(1, n + 1))
        perm[i - 1], perm[k - 1] = k, i
        perm[j - 1], perm[l - 1] = l, j
        return tuple(perm)
    i, j = slots
    n = max(i, j)
    perm = list(range(1, n + 1))
    perm[i - 1], perm[j - 1] = j, i
    return tuple(perm)


def _pad(gen, rank):
    perm, sign = gen
    return tuple(perm) + tuple(range(len(perm) + 1, rank + 1)), sign


class SymbolTable:
    """Append-only registry of tensor symbols and scalar names.

    The metric ``g`` (rank 2, symmetric, neutral, covariantly constant) is
    always present.  ``riemann``, ``ricci`` and ``field_strength`` name the
    symbols the calculus layer emits when it expands commutators.
    """

    def __init__(self, dim: int = 4, scalars=(), riemann="R", ricci="Ric",
                 field_strength="F"):
        if dim < 1:
            raise DeclarationError("dimension must be a positive integer")
        self.dim = dim
        self.riemann = riemann
        self.ricci = ricci
        self.field_strength = field_strength
        self._symbols: dict = {}
        self._scalars: set = set()
        self._lock = threading.Lock()
        self._symbols[METRIC] = TensorSymbol(METRIC, 2, (((2, 1), 1),))
        for s in scalars:
            self.declare_scalar(s)

    def declare(self, name, rank, symmetries=(), traceless_pairs=(), charge=0,
                cyclic=()) -> TensorSymbol:
        if not re.fullmatch(r"[A-Za-z][A-Za-z0-9]*", name):
            raise DeclarationError(f"invalid tensor name {name!r}")
        if name in ("D", "Nabla", "i", "sqrt2", "sqrt3"):
            raise DeclarationError(f"{name!r} is reserved")
        gens = tuple(_pad(gen, rank) for gen in symmetries)
        sym_ = TensorSymbol(name, rank, gens, tuple(tuple(p) for p in traceless_pairs),
                            as_coeff(charge) if not isinstance(charge, str) else Coeff.symbol(charge),
                            tuple(tuple(t) for t in cyclic))
        with self._lock:
            if name in self._symbols or name in self._scalars:
                raise DeclarationError(f"duplicate declaration of {name!r}")
            self._symbols[name] = sym_
        for v in sym_.charge.variables():
            if v not in self._scalars:
                self.declare_scalar(v)
        return sym_

    def declare_scalar(self, name: str):
        if not re.fullmatch(r"[A-Za-z][A-Za-z0-9]*", name):
            raise DeclarationError(f"invalid scalar name {name!r}")
        with self._lock:
            if name in self._symbols:
                raise DeclarationError(f"{name!r} already names a tensor")
            self._scalars.add(name)

    def __getitem__(self, name) -> TensorSymbol:
        try:
            return self._symbols[name]
        except KeyError:
            raise DeclarationError(f"unknown tensor {name!r}") from None

    def __contains__(self, name):
        return name in self._symbols

    def is_scalar(self, name) -> bool:
        return name in self._scalars

    @property
    def scalars(self) -> frozenset:
        return frozenset(self._scalars)

    def symbols(self):
        return list(self._symbols.values())

    def derived(self, **overrides) -> "SymbolTable":
        """Copy with some symbols replaced, e.g. to impose an extra trace condition."""
        t = SymbolTable.__new__(SymbolTable)
        t.dim, t.riemann, t.ricci, t.field_strength = (self.dim, self.riemann, self.ricci,
                                                       self.field_strength)
        t._symbols = dict(self._symbols)
        t._scalars = set(self._scalars)
        t._lock = threading.Lock()
        for name, sym_ in overrides.items():
            t._symbols[name] = sym_
        return t

    def with_traceless(self, name: str, pair) -> "SymbolTable":
        s = self[name]
        new = TensorSymbol(s.name, s.rank, s.symmetries, s.traceless_pairs + (tuple(pair),),
                           s.charge, s.cyclic)
        return self.derived(**{name: new})

    def with_dim(self, dim: int) -> "SymbolTable":
        t = self.derived()
        t.dim = dim
        return t


# ---------------------------------------------------------------------------
# expressions


@dataclass(frozen=True, order=True)
class Factor:
    name: str
    deriv: tuple = ()
    slots: tuple = ()

    def indices(self):
        return self.deriv + self.slots

    def renamed(self, mapping: dict) -> "Factor":
        """Rename indices.  ``mapping`` sends a name either to a new name or to a
        ``(new name, flip)`` pair, ``flip`` toggling the variance."""
        return Factor(self.name,
                      tuple(_ren(i, mapping) for i in self.deriv),
                      tuple(_ren(i, mapping) for i in self.slots))


def _ren(i: Index, mapping: dict) -> Index:
    r = mapping.get(i.name)
    if r is None:
        return i
    if isinstance(r, str):
        return Index(r, i.up)
    name, flip = r
    return Index(name, i.up != flip)


@dataclass(frozen=True)
class Term:
    coeff: Coeff
    factors: tuple = ()

    def indices(self):
        return [i for f in self.factors for i in f.indices()]

    def index_names(self) -> set:
        return {i.name for i in self.indices()}

    def free(self) -> tuple:
        cnt = Counter(i.name for i in self.indices())
        return tuple(sorted(i for i in self.indices() if cnt[i.name] == 1))

    def dummies(self) -> list:
        cnt = Counter(i.name for i in self.indices())
        seen, out = set(), []
        for i in self.indices():
            if cnt[i.name] == 2 and i.name not in seen:
                seen.add(i.name)
                out.append(i.name)
        return out

    def renamed(self, mapping: dict) -> "Term":
        return Term(self.coeff, tuple(f.renamed(mapping) for f in self.factors))

    def scaled(self, c) -> "Term":
        return Term(self.coeff * as_coeff(c), self.factors)


class Expr:
    """Finite formal sum of terms; the empty sum is zero."""

    __slots__ = ("terms",)

    def __init__(self, terms=()):
        self.terms = tuple(t for t in terms if not t.coeff.is_zero())

    @classmethod
    def scalar(cls, c) -> "Expr":
        return cls([Term(as_coeff(c))])

    @classmethod
    def factor(cls, f: Factor, c=1) -> "Expr":
        return cls([Term(as_coeff(c), (f,))])

    def is_empty(self) -> bool:
        return not self.terms

    def free(self):
        """Free-index tuple shared by all terms (None for the zero expression)."""
        return self.terms[0].free() if self.terms else None

    def __add__(self, other: "Expr") -> "Expr":
        return check_sum(Expr(self.terms + other.terms))

    def __sub__(self, other: "Expr") -> "Expr":
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c) -> "Expr":
        c = as_coeff(c)
        if c.is_zero():
            return Expr()
        return Expr([t.scaled(c) for t in self.terms])

    def __mul__(self, other):
        if isinstance(other, Expr):
            return product(self, other)
        return self.scale(other)

    __rmul__ = scale

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __repr__(self):
        from .parser import print_expr
        return f"Expr({print_expr(self)!r})"

    def __eq__(self, other):
        return isinstance(other, Expr) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)


# ---------------------------------------------------------------------------
# validation


def validate_term(term: Term, table: SymbolTable | None = None) -> Term:
    seen: dict = {}
    for i in term.indices():
        seen.setdefault(i.name, []).append(i)
        if not INDEX_NAME.fullmatch(i.name):
            raise IndexStructureError(f"invalid index name {i.name!r}")
    for name, occ in seen.items():
        if len(occ) > 2:
            raise IndexStructureError(f"index {name!r} occurs {len(occ)} times in one term")
        if len(occ) == 2 and occ[0].up == occ[1].up:
            kind = "upper" if occ[0].up else "lower"
            raise IndexStructureError(f"index {name!r} repeated as {kind} index twice")
    if table is not None:
        for f in term.factors:
            s = table[f.name]
            if len(f.slots) != s.rank:
                raise IndexStructureError(
                    f"{f.name} has rank {s.rank} but {len(f.slots)} slot indices")
    return term


def check_sum(e: Expr) -> Expr:
    ref = None
    for t in e.terms:
        fr = t.free()
        if ref is None:
            ref = fr
        elif fr != ref:
            raise IndexStructureError(
                f"free-index mismatch: {_fmt_free(ref)} vs {_fmt_free(fr)}")
    return e


def _fmt_free(free) -> str:
    return "{" + " ".join(str(i) for i in free) + "}"


def validate(e, table: SymbolTable | None = None):
    """Check index structure of a Term or Expr; returns the argument unchanged."""
    if isinstance(e, Term):
        return validate_term(e, table)
    for t in e.terms:
        validate_term(t, table)
    return check_sum(e)


def combine(pairs) -> Expr:
    """Formal linear combination ``sum(c * e)``; not canonicalised."""
    terms = []
    for c, e in pairs:
        c = as_coeff(c)
        terms.extend(t.scaled(c) for t in e.terms)
    return check_sum(Expr(terms))


# ---------------------------------------------------------------------------
# fresh index names

_POOL = "mnpqrstuvwxyzhjkl"


def name_pool():
    for k in itertools.count():
        suffix = "" if k == 0 else str(k)
        for ch in _POOL:
            yield ch + suffix


def fresh_names(used, n: int) -> list:
    used = set(used)
    out = []
    for nm in name_pool():
        if len(out) == n:
            break
        if nm not in used:
            out.append(nm)
    return out


def separate_dummies(term: Term, avoid) -> Term:
    """Rename the term's dummies away from the names in ``avoid``."""
    avoid = set(avoid)
    clash = [d for d in term.dummies() if d in avoid]
    if not clash:
        return term
    new = fresh_names(avoid | term.index_names(), len(clash))
    return term.renamed(dict(zip(clash, new)))


def product(a: Expr, b: Expr) -> Expr:
    """Tensor product; equal free names with opposite variance become contractions."""
    out = []
    for ta in a.terms:
        for tb in b.terms:
            tb2 = separate_dummies(tb, ta.index_names())
            ta2 = separate_dummies(ta, tb2.index_names() - set(i.name for i in tb2.free()))
            t = Term(ta2.coeff * tb2.coeff, ta2.factors + tb2.factors)
            out.append(validate_term(t))
    return check_sum(Expr(out))


def fraction(x) -> Coeff:
    return Coeff.const(Fraction(x))
