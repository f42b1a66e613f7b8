import random

import numpy as np
import pytest
from hypothesis import given, settings
from sympy.polys.domains import QQ_I

from strategies import FIELD_SYMBOLS, exprs, fields_table
from tensorcert.calculus import normal_order
from tensorcert.canon import canonicalize
from tensorcert.ir import SymbolTable
from tensorcert.numfield import Surd
from tensorcert.oracle import (OracleError, _commutator_action, eval_expr, oracle_check,
                               sample_geometry, sample_jets)
from tensorcert.parser import parse_expr

TABLE = fields_table()
ZERO = QQ_I(0, 0)


def _all_zero(a):
    return all(x == ZERO for x in np.asarray(a).flat)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_geometry_invariants(table, seed):
    geo = sample_geometry(table, random.Random(seed))
    eye = np.einsum("ab,bc->ac", geo.g, geo.ginv)
    for i in range(4):
        for j in range(4):
            assert eye[i, j] == QQ_I(int(i == j), 0)
    r = geo.riemann
    assert _all_zero(r + r.transpose(1, 0, 2, 3))
    assert _all_zero(r + r.transpose(0, 1, 3, 2))
    assert _all_zero(r - r.transpose(2, 3, 0, 1))
    assert _all_zero(r + r.transpose(0, 2, 3, 1) + r.transpose(0, 3, 1, 2))
    ric = np.einsum("ae,ebad->bd", geo.ginv, r)
    assert _all_zero(geo.ricci - ric)
    assert _all_zero(geo.field_strength + geo.field_strength.T)


def test_geometry_without_cyclic_identity_breaks_it(table):
    geo = sample_geometry(table, random.Random(3), cyclic=False)
    r = geo.riemann
    assert not _all_zero(r + r.transpose(0, 2, 3, 1) + r.transpose(0, 3, 1, 2))


def test_flat_geometry(table):
    geo = sample_geometry(table, random.Random(0), flat=True, neutral=True)
    assert _all_zero(geo.riemann) and _all_zero(geo.ricci) and _all_zero(geo.field_strength)
    assert [geo.g[i, i] for i in range(4)] == [QQ_I(1, 0)] + [QQ_I(-1, 0)] * 3


def test_dimension_one_is_rejected():
    with pytest.raises(OracleError):
        sample_geometry(SymbolTable(dim=1), random.Random(0))


def test_jet_invariants(table):
    rng = random.Random(5)
    geo = sample_geometry(table, rng)
    geo.scalars = {"e": Surd(2)}
    jets = sample_jets({"PsiS", "PsiM", "Psi"}, table, geo, rng)
    s = jets["PsiS"]
    assert _all_zero(np.einsum("ab,ab->", geo.ginv, s.value))
    assert _all_zero(s.value - s.value.T)
    m = jets["PsiM"].value
    assert _all_zero(m + m.transpose(0, 2, 1))
    assert _all_zero(m + m.transpose(1, 2, 0) + m.transpose(2, 0, 1))
    for name in ("PsiS", "Psi"):
        j = jets[name]
        anti = j.d2 - np.swapaxes(j.d2, 0, 1)
        charge = QQ_I(2, 0)
        assert _all_zero(anti - _commutator_action(j.value, geo, charge))


def test_metric_trace_evaluates_to_dimension(table):
    rng = random.Random(0)
    geo = sample_geometry(table, rng)
    val = eval_expr(parse_expr("g^{a b}*g_{a b}", table), table, geo, {})
    assert val[0].item() == QQ_I(4, 0)


def test_commutator_rule_holds_numerically(table):
    e = parse_expr("[D^{c}, D_{a}] tPhiS_{b c} - i*e*F_{c a}*tPhiS_{b}^{c}"
                   " - R_{c a b n}*tPhiS^{c n} - Ric_{a c}*tPhiS^{c}_{b}", table)
    assert oracle_check(e, table, trials=5, seed=1).passed


@pytest.mark.parametrize("bad", [
    "- i*e*F_{c a}*tPhiS_{b}^{c} - R_{c a b n}*tPhiS^{c n} + Ric_{a c}*tPhiS^{c}_{b}",
    "- i*e*F_{c a}*tPhiS_{b}^{c} - R_{c a b n}*tPhiS^{c n}",
    "- i*e*F_{c a}*tPhiS_{b}^{c} + R_{c a b n}*tPhiS^{c n} - Ric_{a c}*tPhiS^{c}_{b}",
    "+ i*e*F_{c a}*tPhiS_{b}^{c} - R_{c a b n}*tPhiS^{c n} - Ric_{a c}*tPhiS^{c}_{b}",
])
def test_oracle_detects_single_term_mutations(table, bad):
    res = oracle_check(parse_expr("[D^{c}, D_{a}] tPhiS_{b c} " + bad, table), table,
                       trials=3, seed=1)
    assert not res.passed
    assert "component" in res.witness


def test_wrong_ricci_convention_is_detected(table):
    e = parse_expr("[D^{c}, D_{a}] PhiN_{b c} - R_{c a b n}*PhiN^{c n}"
                   " - Ric_{a c}*PhiN^{c}_{b}", table)
    assert oracle_check(e, table, trials=3, seed=2, convention=1).passed
    assert not oracle_check(e, table, trials=3, seed=2, convention=-1).passed


def test_flat_neutral_mode_commutes_derivatives(table):
    e = parse_expr("[D_{a}, D_{b}] PsiS_{c d}", table)
    assert oracle_check(e, table, trials=3, flat=True, neutral=True).passed
    assert not oracle_check(e, table, trials=3).passed


def test_determinism(table):
    e = parse_expr("D_{a} PsiA1_{b} - D_{b} PsiA1_{a}", table)
    r1 = oracle_check(e, table, trials=2, seed=7)
    r2 = oracle_check(e, table, trials=2, seed=7)
    assert (r1.passed, r1.witness) == (r2.passed, r2.witness)
    assert not r1.passed


def test_errors(table):
    with pytest.raises(OracleError, match="derivative order"):
        oracle_check(parse_expr("D_{a} D_{b} D_{c} Psi", table), table, trials=1)
    with pytest.raises(OracleError, match="not sampled"):
        oracle_check(parse_expr("D_{a} F_{b c}", table), table, trials=1)


def test_surd_coefficients_are_exact(table):
    e = parse_expr("sqrt2*sqrt3*PsiA1_{a} - sqrt2*sqrt3*PsiA1_{a}", table)
    assert oracle_check(e, table, trials=2).passed
    e = parse_expr("sqrt2*PsiA1_{a} - PsiA1_{a}", table)
    res = oracle_check(e, table, trials=1)
    assert not res.passed


@given(exprs(TABLE, max_deriv=2, symbols=FIELD_SYMBOLS, max_terms=2))
@settings(max_examples=50)
def test_canonicalize_preserves_value(e):
    c = canonicalize(e, TABLE)
    assert oracle_check(e - c, TABLE, trials=1, seed=3).passed


@given(exprs(TABLE, max_deriv=2, symbols=FIELD_SYMBOLS, max_terms=2))
@settings(max_examples=50)
def test_normal_order_preserves_value(e):
    n = normal_order(e, TABLE)
    assert oracle_check(e - n, TABLE, trials=1, seed=4).passed


@given(exprs(TABLE, max_deriv=1, symbols=[s for s in FIELD_SYMBOLS if s != "PsiM"], max_terms=2))
@settings(max_examples=25)
def test_nonzero_canonical_forms_are_numerically_nonzero(e):
    # without multiterm identities in play, a nonzero canonical form is a nonzero tensor
    can = canonicalize(e, TABLE)
    if can.is_empty():
        return
    assert not oracle_check(can, TABLE, trials=1, seed=5).passed
