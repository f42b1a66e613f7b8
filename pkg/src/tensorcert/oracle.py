"""Exact numeric oracle for tensor identities.

An identity is checked by evaluating it at random points: a random rational
metric, a random algebraic curvature tensor, a random field strength and
random jets (values, first and second derivatives) of every field.  Second
derivatives are built so that their antisymmetric part equals the commutator
action of the sampled curvature and field strength.  All arithmetic is exact
over Q(i) with the surds sqrt2, sqrt3 and sqrt6 carried as separate
components, so a nonzero result is a genuine counterexample.
"""
from __future__ import annotations

import itertools
import random
import string
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from sympy.polys.domains import QQ, QQ_I
from sympy.polys.matrices import DomainMatrix

from .ir import METRIC, Expr, SymbolTable, TensorError
from .numfield import Surd
from .scalars import Coeff

_ZERO = QQ_I(0, 0)
# surd basis bits (sqrt2, sqrt3) -> label
_SURD_BASIS = {0: "1", 1: "sqrt2", 2: "sqrt3", 3: "sqrt6"}


class OracleError(TensorError):
    """The oracle cannot evaluate the expression."""


def _q(x) -> QQ_I:
    x = Fraction(x)
    return QQ_I(QQ(x.numerator, x.denominator), 0)


def _gauss(re, im) -> QQ_I:
    re, im = Fraction(re), Fraction(im)
    return QQ_I(QQ(re.numerator, re.denominator), QQ(im.numerator, im.denominator))


def _zeros(shape) -> np.ndarray:
    a = np.empty(shape, dtype=object)
    a.fill(_ZERO)
    return a


def _obj(a) -> np.ndarray:
    out = np.empty(np.shape(a), dtype=object)
    for idx in itertools.product(*(range(n) for n in np.shape(a))):
        out[idx] = a[idx] if isinstance(a[idx], type(_ZERO)) else _q(a[idx])
    return out


def _as_array(x) -> np.ndarray:
    if isinstance(x, np.ndarray):
        return x
    out = np.empty((), dtype=object)
    out[()] = x
    return out


def _is_zero(a: np.ndarray) -> bool:
    return all(x == _ZERO for x in np.asarray(a).flat)


def _rand_rat(rng: random.Random, lo=-5, hi=5, nonzero=False) -> Fraction:
    while True:
        x = Fraction(rng.randint(lo, hi), rng.randint(1, 3))
        if x or not nonzero:
            return x


# ---------------------------------------------------------------------------
# linear algebra


def _perm_axes(a: np.ndarray, perm) -> np.ndarray:
    """Array whose slot j holds slot perm[j] of ``a``."""
    return np.transpose(a, perm) if len(perm) else a


def constraint_nullspace(rank: int, dim: int, group, trace_pairs, cyclic, ginv) -> list:
    """Exact basis (flat rational vectors) of tensors obeying the given constraints."""
    n = dim ** rank
    if n == 1:
        return [[Fraction(1)]]
    idx = np.arange(n).reshape((dim,) * rank)
    rows = []
    for perm, sign in group:
        if list(perm) == list(range(rank)):
            continue
        moved = _perm_axes(idx, perm).reshape(-1)
        for k in range(n):
            row = {}
            row[k] = row.get(k, 0) + 1
            row[int(moved[k])] = row.get(int(moved[k]), 0) - sign
            rows.append(row)
    for a, b in trace_pairs:
        rest = [s for s in range(rank) if s not in (a, b)]
        for fixed in itertools.product(range(dim), repeat=len(rest)):
            row = {}
            for i in range(dim):
                for j in range(dim):
                    if ginv[i][j]:
                        pos = [0] * rank
                        for s, v in zip(rest, fixed):
                            pos[s] = v
                        pos[a], pos[b] = i, j
                        k = int(idx[tuple(pos)])
                        row[k] = row.get(k, 0) + ginv[i][j]
            rows.append(row)
    for trip in cyclic:
        s0, s1, s2 = (s - 1 for s in trip)
        for pos in itertools.product(range(dim), repeat=rank):
            row = {}
            for p in ((s0, s1, s2), (s1, s2, s0), (s2, s0, s1)):
                q = list(pos)
                q[s0], q[s1], q[s2] = pos[p[0]], pos[p[1]], pos[p[2]]
                k = int(idx[tuple(q)])
                row[k] = row.get(k, 0) + 1
            rows.append(row)
    rows = [r for r in rows if any(r.values())]
    if not rows:
        return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    dense = [[QQ(Fraction(r.get(j, 0)).numerator, Fraction(r.get(j, 0)).denominator)
              for j in range(n)] for r in rows]
    ns = DomainMatrix(dense, (len(rows), n), QQ).nullspace()
    return [[Fraction(int(x.numerator), int(x.denominator)) for x in row]
            for row in ns.to_Matrix().tolist()] if ns.shape[0] else []


def _random_in_span(basis, shape, rng, complex_=True) -> np.ndarray:
    out = _zeros(shape)
    flat = out.reshape(-1)
    for vec in basis:
        c = _gauss(_rand_rat(rng), _rand_rat(rng) if complex_ else 0)
        if c == _ZERO:
            continue
        for k, v in enumerate(vec):
            if v:
                flat[k] = flat[k] + c * _q(v)
    return out


# ---------------------------------------------------------------------------
# samples


@dataclass
class GeometrySample:
    dim: int
    g: np.ndarray
    ginv: np.ndarray
    ginv_frac: list
    riemann: np.ndarray
    ricci: np.ndarray
    field_strength: np.ndarray
    scalars: dict = field(default_factory=dict)


def _metric(dim, rng, flat):
    eta = [[Fraction(0)] * dim for _ in range(dim)]
    for i in range(dim):
        eta[i][i] = Fraction(1 if i == 0 else -1)
    if not flat:
        for i in range(dim):
            for j in range(i, dim):
                d = Fraction(rng.randint(-1, 1), rng.randint(3, 6))
                eta[i][j] += d
                if i != j:
                    eta[j][i] += d
    from sympy import Matrix, Rational
    m = Matrix(dim, dim, lambda i, j: Rational(eta[i][j].numerator, eta[i][j].denominator))
    if m.det() == 0:
        raise ZeroDivisionError("degenerate metric")
    inv = m.inv()
    ginv = [[Fraction(int(inv[i, j].p), int(inv[i, j].q)) for j in range(dim)]
            for i in range(dim)]
    return eta, ginv


def _riemann(dim, rng, cyclic) -> np.ndarray:
    x = np.empty((dim,) * 4, dtype=object)
    for idx in itertools.product(range(dim), repeat=4):
        x[idx] = Fraction(rng.randint(-4, 4))
    a = (x - x.transpose(1, 0, 2, 3) - x.transpose(0, 1, 3, 2) + x.transpose(1, 0, 3, 2)) / 4
    b = (a + a.transpose(2, 3, 0, 1)) / 2
    if cyclic:
        # r_abcd = b_abcd - (b_abcd + b_acdb + b_adbc) / 3
        b = b - (b + b.transpose(0, 2, 3, 1) + b.transpose(0, 3, 1, 2)) / 3
    return b


def sample_geometry(table: SymbolTable, rng: random.Random, *, convention: int = 1,
                    cyclic: bool = True, flat: bool = False, neutral: bool = False
                    ) -> GeometrySample:
    dim = table.dim
    if dim < 2:
        raise OracleError("the oracle needs dimension >= 2")
    for _ in range(50):
        try:
            g, ginv = _metric(dim, rng, flat)
            break
        except ZeroDivisionError:
            continue
    else:
        raise OracleError("no invertible metric after 50 draws")
    if flat:
        r = np.full((dim,) * 4, Fraction(0), dtype=object)
    else:
        r = _riemann(dim, rng, cyclic)
    gi = np.array(ginv, dtype=object)
    ric = convention * np.einsum("ae,ebad->bd", gi, r)
    f = np.full((dim, dim), Fraction(0), dtype=object)
    if not neutral:
        for i in range(dim):
            for j in range(i + 1, dim):
                v = _rand_rat(rng)
                f[i, j], f[j, i] = v, -v
    _check_riemann(r, cyclic)
    return GeometrySample(dim, _obj(np.array(g, dtype=object)), _obj(gi), ginv,
                          _obj(r), _obj(ric), _obj(f))


def _check_riemann(r, cyclic):
    assert (r == -r.transpose(1, 0, 2, 3)).all()
    assert (r == -r.transpose(0, 1, 3, 2)).all()
    assert (r == r.transpose(2, 3, 0, 1)).all()
    if cyclic:
        assert (r + r.transpose(0, 2, 3, 1) + r.transpose(0, 3, 1, 2) == 0).all()


@dataclass
class Jet:
    """Lower-index jet of one field: value, first and second covariant derivatives.

    ``d1[p, ...]`` is D_p X and ``d2[p, q, ...]`` is D_p D_q X.
    """

    value: np.ndarray
    d1: np.ndarray
    d2: np.ndarray


def _commutator_action(x: np.ndarray, geo: GeometrySample, charge) -> np.ndarray:
    """C[p, q, ...] = ([D_p, D_q] X)_... for the sampled curvature and field strength."""
    dim = geo.dim
    rank = x.ndim
    # R^n_{s p q} with the first slot raised
    rup = np.einsum("nm,mspq->nspq", geo.ginv, geo.riemann)
    letters = string.ascii_lowercase[:rank]
    out = _zeros((dim, dim) + x.shape)
    for k in range(rank):
        src = letters[:k] + "z" + letters[k + 1:]
        term = np.einsum(f"z{letters[k]}PQ,{src}->PQ{letters}", rup, x)
        out = out - term
    if charge != _ZERO:
        out = out + np.einsum(f"PQ,{letters}->PQ{letters}" if rank else "PQ,->PQ",
                              geo.field_strength, x) * (QQ_I(0, 1) * charge)
    return out


def _field_basis(sym, geo: GeometrySample):
    return constraint_nullspace(sym.rank, geo.dim, sym.group, sorted(sym.traceless_closure),
                                sym.cyclic, geo.ginv_frac)


def sample_jet(sym, geo: GeometrySample, rng: random.Random, charge) -> Jet:
    dim, rank = geo.dim, sym.rank
    basis = _field_basis(sym, geo)
    shape = (dim,) * rank
    value = _random_in_span(basis, shape, rng)
    d1 = _zeros((dim,) + shape)
    for p in range(dim):
        d1[p] = _random_in_span(basis, shape, rng)
    s = _zeros((dim, dim) + shape)
    for p in range(dim):
        for q in range(p, dim):
            v = _random_in_span(basis, shape, rng)
            s[p, q] = v
            s[q, p] = v
    c = _commutator_action(value, geo, charge)
    half = QQ_I(QQ(1, 2), 0)
    return Jet(value, d1, s + c * half)


def _charge_value(sym, scalars: dict) -> QQ_I:
    if sym.charge.is_zero():
        return _ZERO
    comps = _surd_parts(sym.charge.evaluate(scalars))
    if set(comps) - {0}:
        raise OracleError(f"charge of {sym.name} is not in Q(i)")
    return comps.get(0, _ZERO)


def sample_jets(names, table: SymbolTable, geo: GeometrySample, rng: random.Random) -> dict:
    jets = {}
    for name in sorted(names):
        sym = table[name]
        jets[name] = sample_jet(sym, geo, rng, _charge_value(sym, geo.scalars))
    return jets


# ---------------------------------------------------------------------------
# evaluation


def _surd_parts(s: Surd) -> dict:
    """Split into {surd basis bits: Q(i) value}."""
    c = s.components()
    out = {}
    for b in range(4):
        v = _gauss(c[b], c[b | 4])
        if v != _ZERO:
            out[b] = v
    return out


def _factor_array(f, table, geo: GeometrySample, jets: dict) -> np.ndarray:
    depth = len(f.deriv)
    if f.name == METRIC:
        return _zeros((geo.dim,) * (depth + 2)) if depth else geo.g
    fixed = {table.riemann: geo.riemann, table.ricci: geo.ricci,
             table.field_strength: geo.field_strength}
    if f.name in fixed:
        if depth:
            raise OracleError(f"derivatives of {f.name} are not sampled")
        return fixed[f.name]
    if depth > 2:
        raise OracleError(f"derivative order {depth} of {f.name} exceeds the sampled jet")
    jet = jets[f.name]
    return (jet.value, jet.d1, jet.d2)[depth]


def _raise_axis(a: np.ndarray, axis: int, ginv: np.ndarray) -> np.ndarray:
    moved = np.moveaxis(a, axis, 0)
    raised = np.tensordot(ginv, moved, axes=([1], [0]))
    return np.moveaxis(raised, 0, axis)


def eval_term(term, table, geo: GeometrySample, jets: dict, free_order) -> np.ndarray:
    letters = {}
    pool = iter(string.ascii_letters)
    operands, specs = [], []
    for f in term.factors:
        a = _factor_array(f, table, geo, jets)
        spec = ""
        for axis, ix in enumerate(f.indices()):
            if ix.up:
                a = _raise_axis(a, axis, geo.ginv)
            if ix.name not in letters:
                letters[ix.name] = next(pool)
            spec += letters[ix.name]
        operands.append(a)
        specs.append(spec)
    out = "".join(letters[n] for n in free_order)
    if not operands:
        return np.array(QQ_I(1, 0), dtype=object)
    if len(operands) == 1 and specs[0] == out:
        return operands[0]
    res = np.einsum(",".join(specs) + "->" + out, *operands,
                    optimize="greedy" if len(operands) > 2 else False)
    return _as_array(res)


def _needed_fields(e: Expr, table: SymbolTable) -> set:
    skip = {METRIC, table.riemann, table.ricci, table.field_strength}
    return {f.name for t in e.terms for f in t.factors if f.name not in skip}


def eval_expr(e: Expr, table: SymbolTable, geo: GeometrySample, jets: dict) -> dict:
    """Value of ``e`` as {surd basis bits: array over the sorted free indices}."""
    free = sorted({i.name for i in e.free()}) if e.terms else []
    acc: dict = {}
    for term in e.terms:
        parts = _surd_parts(term.coeff.evaluate(geo.scalars))
        if not parts:
            continue
        val = eval_term(term, table, geo, jets, free)
        for b, c in parts.items():
            v = _as_array(val * c)
            acc[b] = v if b not in acc else _as_array(acc[b] + v)
    return acc


# ---------------------------------------------------------------------------
# driver


@dataclass
class OracleResult:
    passed: bool
    trials: int
    seed: int
    witness: str = ""
    mode: str = ""
    cyclic_needed: bool | None = None

    def summary(self) -> str:
        state = "no counterexample" if self.passed else "counterexample found"
        mode = f", {self.mode}" if self.mode else ""
        out = f"{self.trials} trials, seed {self.seed}{mode}: {state}"
        if self.cyclic_needed is not None:
            out += ("; fails without the cyclic identity" if self.cyclic_needed
                    else "; holds without the cyclic identity")
        return out


def _scalar_values(e: Expr, table: SymbolTable, assignment, rng) -> tuple:
    subs = assignment.subs_map() if assignment is not None else {}
    coeffs = [t.coeff.subs(subs) if subs else t.coeff for t in e.terms]
    names = set()
    for c in coeffs:
        names |= c.variables()
    for name in _needed_fields(e, table):
        names |= table[name].charge.variables()
    values = {n: Surd(_rand_rat(rng, nonzero=True)) for n in sorted(names)}
    return coeffs, values


def oracle_check(e: Expr, table: SymbolTable, *, trials: int = 10, seed: int = 0,
                 assignment=None, convention: int = 1, cyclic: bool = True,
                 flat: bool = False, neutral: bool = False,
                 probe_cyclic: bool = False) -> OracleResult:
    """Test ``e == 0`` at ``trials`` random exact sample points.

    With ``probe_cyclic`` a passing check is repeated on curvature samples
    without the cyclic identity, recording whether the identity depends on it.
    """
    if table.dim < 2:
        raise OracleError("the oracle needs dimension >= 2")
    res = _run_trials(e, table, trials, seed, assignment, convention, cyclic, flat, neutral)
    if probe_cyclic and res.passed and cyclic and not flat:
        alt = _run_trials(e, table, trials, seed, assignment, convention, False, flat, neutral)
        res.cyclic_needed = not alt.passed
    return res


def _run_trials(e, table, trials, seed, assignment, convention, cyclic, flat,
                neutral) -> OracleResult:
    from .ir import Term
    mode = ", ".join(m for m, on in (("no cyclic identity", not cyclic), ("flat", flat),
                                     ("neutral", neutral)) if on)
    fields = _needed_fields(e, table)
    for t in range(trials):
        rng = random.Random(seed * 1000 + t)
        for _attempt in range(20):
            coeffs, values = _scalar_values(e, table, assignment, rng)
            try:
                sub = Expr([Term(c, term.factors) for c, term in zip(coeffs, e.terms)])
                geo = sample_geometry(table, rng, convention=convention, cyclic=cyclic,
                                      flat=flat, neutral=neutral)
                geo.scalars = values
                jets = sample_jets(fields, table, geo, rng)
                val = eval_expr(sub, table, geo, jets)
                break
            except ZeroDivisionError:
                continue
        else:
            raise OracleError("could not find a regular sample point")
        bad = {b: a for b, a in val.items() if not _is_zero(a)}
        if bad:
            b, a = min(bad.items())
            pos = next(k for k in itertools.product(*(range(n) for n in a.shape))
                       if a[k] != _ZERO) if a.ndim else ()
            comp = a[pos] if a.ndim else a.item()
            where = f"component {list(pos)}" if a.ndim else "value"
            witness = (f"trial {t} (seed {seed * 1000 + t}): {where} = "
                       f"({comp}) * {_SURD_BASIS[b]}")
            return OracleResult(False, t + 1, seed, witness, mode)
    return OracleResult(True, trials, seed, "", mode)
