"""Canonical forms for tensor expressions.

Two expressions are equal when their difference canonicalises to the empty
sum.  The canonical form absorbs metric factors, drops traces over declared
traceless slot pairs, picks the smallest representative of each term over
the slot-symmetry groups, factor orderings and dummy relabelings, and then
collects like terms.
"""
from __future__ import annotations

import itertools
from collections import Counter

from .ir import (METRIC, Expr, Factor, Index, IndexStructureError, SymbolTable, Term,
                 check_sum, name_pool, validate_term)
from .kernel import canon_search
from .scalars import ZERO_COEFF, as_coeff


class CanonicalExpr(Expr):
    """An :class:`Expr` produced by :func:`canonicalize`.

    ``certified`` records that the free-index multiset was checked against
    the input.
    """

    __slots__ = ("certified",)

    def __init__(self, terms=(), certified=False):
        super().__init__(terms)
        self.certified = certified


# ---------------------------------------------------------------------------
# metric handling


def absorb_metrics(term: Term, dim: int) -> Term:
    """Raise/lower indices through metric factors and evaluate metric traces."""
    factors = list(term.factors)
    coeff = term.coeff
    changed = True
    while changed:
        changed = False
        for k, f in enumerate(factors):
            if f.name != METRIC or f.deriv:
                continue
            p, q = f.slots
            if p.name == q.name:
                coeff = coeff * dim
                del factors[k]
                changed = True
                break
            for keep, drop in ((p, q), (q, p)):
                hit = _find_partner(factors, k, drop)
                if hit is None:
                    continue
                j, where, pos = hit
                g = factors[j]
                idx = list(g.deriv) if where == "d" else list(g.slots)
                idx[pos] = keep
                factors[j] = Factor(g.name, tuple(idx), g.slots) if where == "d" else \
                    Factor(g.name, g.deriv, tuple(idx))
                del factors[k]
                changed = True
                break
            if changed:
                break
    return Term(coeff, tuple(factors))


def _find_partner(factors, k, idx: Index):
    for j, g in enumerate(factors):
        if j == k:
            continue
        for pos, i in enumerate(g.deriv):
            if i.name == idx.name:
                return j, "d", pos
        for pos, i in enumerate(g.slots):
            if i.name == idx.name:
                return j, "s", pos
    return None


def _has_vanishing_trace(f: Factor, table: SymbolTable) -> bool:
    pairs = table[f.name].traceless_closure
    if not pairs:
        return False
    for a, b in pairs:
        if f.slots[a].name == f.slots[b].name:
            return True
    return False


# ---------------------------------------------------------------------------
# single-term canonical form


def canonical_term(term: Term, table: SymbolTable):
    """Canonical representative of one term, or None when it vanishes."""
    validate_term(term, table)
    term = absorb_metrics(term, table.dim)
    if term.coeff.is_zero():
        return None
    for f in term.factors:
        if _has_vanishing_trace(f, table):
            return None
    if not term.factors:
        return term
    free = term.free()
    free_names = [i.name for i in free]
    code = {nm: k for k, nm in enumerate(free_names)}
    nfree = len(free_names)
    for j, nm in enumerate(term.dummies()):
        code[nm] = nfree + j

    facs = sorted(term.factors, key=lambda f: (f.name, len(f.deriv)))
    names = sorted({f.name for f in facs})
    sym_ids = [names.index(f.name) for f in facs]
    ties = []
    start = 0
    for k in range(1, len(facs) + 1):
        if k == len(facs) or (facs[k].name, len(facs[k].deriv)) != \
                (facs[start].name, len(facs[start].deriv)):
            if k - start > 1:
                ties.append((start, k))
            start = k
    derivs = [tuple(code[i.name] for i in f.deriv) for f in facs]
    slots = [tuple(code[i.name] for i in f.slots) for f in facs]
    groups = [table[f.name].group for f in facs]
    order, choice, sign, zero = canon_search(sym_ids, derivs, slots, groups, ties, nfree)
    if zero:
        return None
    rebuilt = []
    for pos, fi in enumerate(order):
        f = facs[fi]
        perm = groups[fi][choice[pos]][0]
        rebuilt.append(Factor(f.name, f.deriv, tuple(f.slots[j] for j in perm)))
    # canonical dummy names, first occurrence upper
    pool = (nm for nm in name_pool() if nm not in free_names)
    rename = {}
    seen = set()
    out = []
    for f in rebuilt:
        new_d, new_s = [], []
        for target, seq in ((new_d, f.deriv), (new_s, f.slots)):
            for i in seq:
                if i.name in free_names:
                    target.append(i)
                    continue
                if i.name not in rename:
                    rename[i.name] = next(pool)
                first = i.name not in seen
                seen.add(i.name)
                target.append(Index(rename[i.name], first))
        out.append(Factor(f.name, tuple(new_d), tuple(new_s)))
    return Term(term.coeff * sign, tuple(out))


def term_key(t: Term):
    return tuple((f.name, len(f.deriv), tuple((i.name, i.up) for i in f.indices()))
                 for f in t.factors)


def collect(terms) -> list:
    acc: dict = {}
    order = []
    for t in terms:
        k = t.factors
        if k in acc:
            acc[k] = acc[k] + t.coeff
        else:
            acc[k] = t.coeff
            order.append(k)
    out = [Term(acc[k], k) for k in order if not acc[k].is_zero()]
    out.sort(key=term_key)
    return out


def canonicalize(e: Expr, table: SymbolTable, multiterm: bool = False) -> CanonicalExpr:
    """Canonical form of ``e``; ``multiterm`` enables the declared cyclic identities."""
    check_sum(e)
    free_in = e.free()
    terms = []
    for t in e.terms:
        c = canonical_term(t, table)
        if c is not None:
            terms.append(c)
    terms = collect(terms)
    if multiterm:
        terms = _cyclic_reduce(terms, table)
    out = CanonicalExpr(terms)
    free_out = out.free()
    if free_out is not None and free_in is not None and free_out != free_in:
        raise IndexStructureError("canonicalisation changed the free indices")
    out.certified = True
    return out


def is_zero(e: Expr, table: SymbolTable, multiterm: bool = False) -> bool:
    return canonicalize(e, table, multiterm).is_empty()


def equal(a: Expr, b: Expr, table: SymbolTable, multiterm: bool = False) -> bool:
    return is_zero(a - b, table, multiterm)


# ---------------------------------------------------------------------------
# cyclic (first Bianchi type) identities, opt-in


def _cyclic_reduce(terms, table, max_rounds=50):
    for _ in range(max_rounds):
        changed = False
        new_terms = []
        for t in terms:
            repl = _cyclic_rewrite(t, table)
            if repl is None:
                new_terms.append(t)
            else:
                new_terms.extend(repl)
                changed = True
        terms = collect([c for t in new_terms
                         for c in [canonical_term(t, table)] if c is not None])
        if not changed:
            return terms
    return terms


def _cyclic_rewrite(t: Term, table: SymbolTable):
    for fi, f in enumerate(t.factors):
        for trip in table[f.name].cyclic:
            s = [x - 1 for x in trip]
            labels = [f.slots[j] for j in s]
            if len({i.name for i in labels}) < 3:
                continue
            variants = []
            for r in range(3):
                rot = labels[r:] + labels[:r]
                slots = list(f.slots)
                for j, lab in zip(s, rot):
                    slots[j] = lab
                nf = Factor(f.name, f.deriv, tuple(slots))
                facs = t.factors[:fi] + (nf,) + t.factors[fi + 1:]
                c = canonical_term(Term(as_coeff(1), facs), table)
                if c is not None:
                    variants.append(c)
            combo = collect(variants)
            if not combo:
                continue
            top = max(combo, key=term_key)
            if top.factors != t.factors:
                continue
            ratio = t.coeff / top.coeff
            return [Term(-ratio * c.coeff, c.factors) for c in combo if c is not top]
    return None


# ---------------------------------------------------------------------------
# explicit rewrites


def ricci_rewrite(e: Expr, table: SymbolTable, convention: int = 1) -> Expr:
    """Replace self-contracted Riemann factors by the Ricci symbol.

    With ``convention=+1`` the Ricci tensor is ``R_{bd} = R^{a}_{b a d}``
    (contraction of the first and third slots); ``-1`` flips the sign.
    """
    out = []
    for t in e.terms:
        out.extend(_ricci_term(t, table, convention))
    return check_sum(Expr(out))


_RICCI_SLOTS = {(0, 2): ((1, 3), 1), (1, 3): ((0, 2), 1),
                (0, 3): ((1, 2), -1), (1, 2): ((0, 3), -1),
                (0, 1): (None, 0), (2, 3): (None, 0)}


def _ricci_term(t: Term, table, convention):
    for k, f in enumerate(t.factors):
        if f.name != table.riemann:
            continue
        names = [i.name for i in f.slots]
        for (a, b), (rest, sign) in _RICCI_SLOTS.items():
            if names[a] != names[b]:
                continue
            if sign == 0:
                return []
            ric = Factor(table.ricci, f.deriv, tuple(f.slots[j] for j in rest))
            nt = Term(t.coeff * (sign * convention), t.factors[:k] + (ric,) + t.factors[k + 1:])
            return _ricci_term(nt, table, convention)
    return [t]


def zero_symbols(e: Expr, names) -> Expr:
    """Drop every term containing one of the named tensors (e.g. flat, neutral background)."""
    names = set(names)
    return Expr([t for t in e.terms if not any(f.name in names for f in t.factors)])


# ---------------------------------------------------------------------------
# brute-force oracle

MAX_BRUTE_INDICES = 8


def brute_equiv(a: Term, b: Term, table: SymbolTable) -> bool:
    """Decide equality of two terms by exhaustive enumeration.

    Every combination of slot-group elements, dummy relabelings and dummy
    variance flips is applied to ``a``; ``b`` must appear among the images
    with a matching sign-adjusted coefficient.  Independent of
    :func:`canonicalize`.
    """
    for t in (a, b):
        if len(t.indices()) > MAX_BRUTE_INDICES:
            raise ValueError(f"brute_equiv limited to {MAX_BRUTE_INDICES} indices per term")
    a = _brute_metric(a, table.dim)
    b = _brute_metric(b, table.dim)
    za = a.coeff.is_zero() or _brute_vanishes(a, table)
    zb = b.coeff.is_zero() or _brute_vanishes(b, table)
    if za or zb:
        return za and zb
    target = _rep(b)
    for rep, sign in _brute_orbit(a, table, dummy_names=b.dummies()):
        if rep == target and a.coeff * sign == b.coeff:
            return True
    return False


def _rep(t: Term):
    return tuple(sorted((f.name, tuple((i.name, i.up) for i in f.deriv),
                         tuple((i.name, i.up) for i in f.slots)) for f in t.factors))


def _brute_orbit(t: Term, table, dummy_names=None):
    dummies = t.dummies()
    targets = list(dummy_names) if dummy_names is not None else dummies
    if len(targets) != len(dummies):
        return
    group_lists = [table[f.name].group for f in t.factors]
    for elems in itertools.product(*group_lists):
        sign = 1
        facs = []
        for f, (perm, s) in zip(t.factors, elems):
            sign *= s
            facs.append(Factor(f.name, f.deriv, tuple(f.slots[j] for j in perm)))
        for names in itertools.permutations(targets):
            for flips in itertools.product((False, True), repeat=len(dummies)):
                m = {d: (nm, fl) for d, nm, fl in zip(dummies, names, flips)}
                yield _rep(Term(t.coeff, tuple(x.renamed(m) for x in facs))), sign


def _brute_vanishes(t: Term, table) -> bool:
    for f in t.factors:
        s = table[f.name]
        for a_, b_ in s.traceless_pairs:
            for perm, _ in s.group:
                inv = {perm[j]: j for j in range(s.rank)}
                if f.slots[inv[a_ - 1]].name == f.slots[inv[b_ - 1]].name:
                    return True
    me = _rep(t)
    return any(rep == me and sign == -1 for rep, sign in _brute_orbit(t, table))


def _brute_metric(t: Term, dim: int) -> Term:
    facs = list(t.factors)
    coeff = t.coeff
    progress = True
    while progress:
        progress = False
        cnt = Counter(i.name for f in facs for i in f.indices())
        for gi, g in enumerate(facs):
            if g.name != METRIC or g.deriv:
                continue
            p, q = g.slots
            if p.name == q.name:
                coeff = coeff * dim
                facs.pop(gi)
                progress = True
                break
            if cnt[q.name] == 2:
                other, keep = q, p
            elif cnt[p.name] == 2:
                other, keep = p, q
            else:
                continue
            facs.pop(gi)
            # the partner occurrence has variance opposite to `other`; it becomes `keep`
            facs = [f.renamed({other.name: (keep.name, other.up == keep.up)}) for f in facs]
            progress = True
            break
    return Term(coeff, tuple(facs))
