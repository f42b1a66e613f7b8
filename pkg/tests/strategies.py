"""Hypothesis strategies for random coefficients, terms and expressions."""
from __future__ import annotations

from fractions import Fraction

from hypothesis import strategies as st

from tensorcert.derivation import load_data
from tensorcert.ir import Expr, Factor, Index, SymbolTable, Term
from tensorcert.numfield import Surd
from tensorcert.parser import parse_declarations
from tensorcert.scalars import Coeff

NAMES = list("abcdefghjk")


def fields_table(dim: int = 4) -> SymbolTable:
    return parse_declarations(load_data("fields.decl"), SymbolTable(dim=dim))


# ---------------------------------------------------------------------------
# scalars

fractions = st.fractions(min_value=-6, max_value=6, max_denominator=5)


@st.composite
def surds(draw, max_terms: int = 3):
    comps = [Fraction(0)] * 8
    for _ in range(draw(st.integers(0, max_terms))):
        comps[draw(st.integers(0, 7))] += draw(fractions)
    return Surd.from_components(comps)


@st.composite
def coeffs(draw, variables=("mu", "M"), allow_den: bool = True):
    c = Coeff.const(draw(surds()))
    for _ in range(draw(st.integers(0, 2))):
        term = Coeff.const(draw(surds(1)))
        for _ in range(draw(st.integers(0, 2))):
            term = term * Coeff.symbol(draw(st.sampled_from(variables)))
        c = c + term
    if allow_den and draw(st.booleans()):
        den = Coeff.symbol(draw(st.sampled_from(variables))) + Coeff.const(draw(st.integers(0, 3)))
        c = c / den
    return c


@st.composite
def nonzero_coeffs(draw, **kw):
    c = draw(coeffs(**kw))
    return c if not c.is_zero() else Coeff.const(1)


# ---------------------------------------------------------------------------
# tensors

# neutral symbols cover Riemann-type, antisymmetric, symmetric traceless,
# no symmetry, mixed rank-3 and vectors
CANON_SYMBOLS = ["R", "F", "PsiS", "A", "PhiA", "PsiM", "PsiT", "PsiA1", "Psi", "PhiN"]
FIELD_SYMBOLS = ["PsiS", "A", "PhiA", "PsiA1", "Psi", "PhiN", "B", "tPhiS", "PsiM"]
BACKGROUND = {"R", "Ric", "F", "g"}


@st.composite
def terms(draw, table: SymbolTable, free=(), max_indices: int = 6, symbols=CANON_SYMBOLS,
          max_deriv: int = 1, coeff_strategy=None, metric: bool = True, min_factors: int = 1):
    """A valid term with exactly the given free indices and at most ``max_indices`` slots."""
    free = list(free)
    pool = list(symbols) + (["g"] if metric else [])
    nfac = draw(st.integers(min_factors, 3))
    facs = []
    total = 0
    for _ in range(nfac):
        name = draw(st.sampled_from(pool))
        rank = table[name].rank
        nd = 0 if name in BACKGROUND else draw(st.integers(0, max_deriv))
        if total + rank + nd > max_indices:
            continue
        facs.append((name, nd))
        total += rank + nd
    # pad with vectors, or drop factors, until the slot count fits the free indices
    while total < len(free) or (total - len(free)) % 2:
        if total + 1 <= max_indices:
            facs.append(("PsiA1", 0))
            total += 1
        else:
            name, nd = facs.pop()
            total -= table[name].rank + nd
    if not facs:
        facs.append(("Psi", 0))
    ndum = (total - len(free)) // 2
    dummy_names = [n for n in NAMES if n not in {i.name for i in free}][:ndum]
    labels = list(free)
    for d in dummy_names:
        labels += [Index(d, True), Index(d, False)]
    labels = draw(st.permutations(labels))
    out = []
    pos = 0
    for name, nd in facs:
        rank = table[name].rank
        idx = labels[pos:pos + nd + rank]
        pos += nd + rank
        out.append(Factor(name, tuple(idx[:nd]), tuple(idx[nd:])))
    c = draw(coeff_strategy) if coeff_strategy is not None else draw(nonzero_coeffs())
    return Term(c, tuple(out))


@st.composite
def free_sets(draw, max_free: int = 2):
    n = draw(st.integers(0, max_free))
    names = draw(st.permutations(NAMES[:4]))[:n]
    return tuple(Index(nm, draw(st.booleans())) for nm in sorted(names))


@st.composite
def exprs(draw, table: SymbolTable, max_terms: int = 3, **kw):
    free = draw(free_sets())
    n = draw(st.integers(1, max_terms))
    return Expr([draw(terms(table, free=free, **kw)) for _ in range(n)])


@st.composite
def equivalent_variants(draw, table: SymbolTable, t: Term):
    """Apply a random slot symmetry, dummy renaming, dummy variance flip and factor shuffle.

    Returns the variant with its coefficient adjusted so that it equals ``t``.
    """
    sign = 1
    facs = []
    for f in t.factors:
        perm, s = draw(st.sampled_from(table[f.name].group))
        sign *= s
        facs.append(Factor(f.name, f.deriv, tuple(f.slots[j] for j in perm)))
    dummies = t.dummies()
    fresh = [n for n in NAMES + list("mnpqrs") if n not in {i.name for i in t.free()}]
    targets = draw(st.permutations(fresh))[:len(dummies)]
    mapping = {d: (nm, draw(st.booleans())) for d, nm in zip(dummies, targets)}
    facs = [f.renamed(mapping) for f in facs]
    facs = draw(st.permutations(facs))
    return Term(t.coeff * sign, tuple(facs))
