"""Covariant derivatives, commutator expansion, normal ordering and projections."""
from __future__ import annotations

import itertools
import math

from .canon import canonicalize
from .ir import (METRIC, Expr, Factor, Index, IndexStructureError, SymbolTable, TensorError,
                 Term, check_sum, fresh_names, product, separate_dummies, validate_term)
from .numfield import I as SURD_I
from .scalars import as_coeff


class NormalOrderError(TensorError):
    pass


def derive(e: Expr, idx: Index) -> Expr:
    """Leibniz-rule derivative without the collision check.

    Dummies clashing with ``idx`` are renamed; the metric is covariantly
    constant.  A free index of ``e`` with the opposite variance contracts.
    """
    out = []
    for t in e.terms:
        t = separate_dummies(t, {idx.name})
        for k, f in enumerate(t.factors):
            if f.name == METRIC:
                continue
            nf = Factor(f.name, (idx,) + f.deriv, f.slots)
            out.append(validate_term(Term(t.coeff, t.factors[:k] + (nf,) + t.factors[k + 1:])))
    return check_sum(Expr(out))


def covariant_derivative(e: Expr, idx: Index, table: SymbolTable | None = None) -> Expr:
    """``D_idx e``; raises when ``idx`` collides with a free index of the same variance."""
    free = e.free() or ()
    for i in free:
        if i.name == idx.name and i.up == idx.up:
            raise IndexStructureError(f"derivative index {idx} collides with a free index")
    return derive(e, idx)


# ---------------------------------------------------------------------------
# commutators


def commutator_value(f: Factor, p: Index, q: Index, table: SymbolTable, avoid=()) -> Expr:
    """``[D_p, D_q]`` acting on the factor ``f`` (all of whose indices are acted on)."""
    used = set(avoid) | {i.name for i in f.indices()} | {p.name, q.name}
    (n,) = fresh_names(used, 1)
    idx = list(f.indices())
    nd = len(f.deriv)
    terms = []
    for k, s in enumerate(idx):
        new = idx[:]
        if s.up:
            new[k] = Index(n, True)
            riem = Factor(table.riemann, (), (Index(s.name, True), Index(n, False), p, q))
            c = 1
        else:
            new[k] = Index(n, False)
            riem = Factor(table.riemann, (), (Index(n, True), Index(s.name, False), p, q))
            c = -1
        body = Factor(f.name, tuple(new[:nd]), tuple(new[nd:]))
        terms.append(Term(as_coeff(c), (riem, body)))
    charge = table[f.name].charge if f.name in table else as_coeff(0)
    if not charge.is_zero():
        fs = Factor(table.field_strength, (), (p, q))
        terms.append(Term(charge * SURD_I, (fs, f)))
    return check_sum(Expr(terms))


def expand_commutator(f: Factor, pos: int, table: SymbolTable, avoid=()) -> Expr:
    """``f - f'`` where ``f'`` swaps derivatives ``pos`` and ``pos + 1`` (outermost first)."""
    if not 0 <= pos < len(f.deriv) - 1:
        raise IndexStructureError(f"no adjacent derivative pair at position {pos}")
    outer = f.deriv[:pos]
    p, q = f.deriv[pos], f.deriv[pos + 1]
    inner = Factor(f.name, f.deriv[pos + 2:], f.slots)
    avoid = set(avoid) | {i.name for i in f.indices()}
    val = commutator_value(inner, p, q, table, avoid)
    for o in reversed(outer):
        val = derive(val, o)
    return val


def commutator(f: Factor, p: Index, q: Index, table: SymbolTable) -> Expr:
    """Value of ``D_p D_q f - D_q D_p f``."""
    return commutator_value(f, p, q, table)


def _needs_swap(f: Factor, free_names) -> int | None:
    def key(i):
        return (i.name not in free_names, i.name)
    for k in range(len(f.deriv) - 1):
        if key(f.deriv[k]) > key(f.deriv[k + 1]):
            return k
    return None


def normal_order(e: Expr, table: SymbolTable, max_rounds: int = 200) -> Expr:
    """Sort every derivative string (free indices first, then by name), adding
    commutator terms, and canonicalise; iterates to a fixpoint."""
    cur = canonicalize(e, table)
    for _ in range(max_rounds):
        out = []
        changed = False
        for t in cur.terms:
            free_names = {i.name for i in t.free()}
            hit = None
            for k, f in enumerate(t.factors):
                pos = _needs_swap(f, free_names)
                if pos is not None:
                    hit = (k, pos)
                    break
            if hit is None:
                out.append(t)
                continue
            changed = True
            k, pos = hit
            f = t.factors[k]
            d = list(f.deriv)
            d[pos], d[pos + 1] = d[pos + 1], d[pos]
            swapped = Factor(f.name, tuple(d), f.slots)
            out.append(Term(t.coeff, t.factors[:k] + (swapped,) + t.factors[k + 1:]))
            rest = Term(t.coeff, t.factors[:k] + t.factors[k + 1:])
            val = expand_commutator(f, pos, table, avoid=t.index_names())
            out.extend(product(Expr([rest]), val).terms)
        if not changed:
            return cur
        cur = canonicalize(check_sum(Expr(out)), table)
    raise NormalOrderError("normal ordering did not reach a fixpoint")


# ---------------------------------------------------------------------------
# projections


def _permuted(e: Expr, names, perm) -> Expr:
    mapping = {a: names[p] for a, p in zip(names, perm)}
    return Expr([t.renamed(mapping) for t in e.terms])


def _perm_sign(perm) -> int:
    sign = 1
    seen = set()
    for s in range(len(perm)):
        if s in seen:
            continue
        j, length = s, 0
        while j not in seen:
            seen.add(j)
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def project(e: Expr, mode: str, names, table: SymbolTable) -> Expr:
    """Projection over the listed free indices.

    ``symmetrize`` and ``antisymmetrize`` average over permutations.
    ``traceless`` returns the unnormalised sum over permutations minus its
    traces (ranks 2 and 3), e.g. ``X_ab + X_ba - (2/d) g_ab X^c_c``.
    """
    names = list(names)
    free = e.free()
    if free is None:
        return Expr()
    fmap = {i.name: i for i in free}
    for nm in names:
        if nm not in fmap:
            raise IndexStructureError(f"{nm!r} is not a free index")
    if len({fmap[nm].up for nm in names}) > 1:
        raise IndexStructureError("projection indices must share a variance")
    n = len(names)
    perms = list(itertools.permutations(range(n)))
    if mode in ("symmetrize", "antisymmetrize"):
        terms = []
        for perm in perms:
            s = _perm_sign(perm) if mode == "antisymmetrize" else 1
            terms.extend(_permuted(e, names, perm).scale(as_coeff(s) / math.factorial(n)).terms)
        return canonicalize(check_sum(Expr(terms)), table)
    if mode != "traceless":
        raise ValueError(f"unknown projection mode {mode!r}")
    up_ = fmap[names[0]].up
    s = Expr([t for perm in perms for t in _permuted(e, names, perm).terms])
    d = table.dim
    if n == 2:
        a, b = names
        tr = _trace(s, a, b, up_)
        g = Expr.factor(Factor(METRIC, (), (Index(a, up_), Index(b, up_))))
        res = s - product(g, tr).scale(as_coeff(1) / d)
    elif n == 3:
        a, b, c = names
        corr = Expr()
        for x, y, z in ((a, b, c), (a, c, b), (b, c, a)):
            tr = _trace(s, x, y, up_)
            g = Expr.factor(Factor(METRIC, (), (Index(x, up_), Index(y, up_))))
            corr = corr + product(g, tr)
        res = s - corr.scale(as_coeff(1) / (d + 2))
    else:
        raise ValueError("traceless projection supports two or three indices")
    return canonicalize(res, table)


def _trace(e: Expr, a: str, b: str, up_: bool) -> Expr:
    """Contract free indices ``a`` and ``b`` with the inverse metric."""
    g = Expr.factor(Factor(METRIC, (), (Index(a, not up_), Index(b, not up_))))
    return product(g, e)
