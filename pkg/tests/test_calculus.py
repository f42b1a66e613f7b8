import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strategies import FIELD_SYMBOLS, fields_table, free_sets, terms
from tensorcert.calculus import (commutator, covariant_derivative, derive, expand_commutator,
                                 normal_order, project)
from tensorcert.canon import canonicalize, equal, is_zero
from tensorcert.ir import Expr, Index, IndexStructureError, product
from tensorcert.parser import parse_expr, print_expr

TABLE = fields_table()


@given(st.data())
@settings(max_examples=100)
def test_leibniz_rule(data):
    free = data.draw(free_sets(1))
    a = Expr([data.draw(terms(TABLE, free=free, max_indices=4, symbols=FIELD_SYMBOLS))])
    b = Expr([data.draw(terms(TABLE, free=(), max_indices=2, symbols=FIELD_SYMBOLS))])
    idx = Index("z", False)
    lhs = derive(product(a, b), idx)
    rhs = product(derive(a, idx), b) + product(a, derive(b, idx))
    assert equal(lhs, rhs, TABLE)


def test_derivative_is_linear(table):
    a = parse_expr("PsiS_{a b}", table)
    b = parse_expr("mu*A_{a b}", table)
    idx = Index("c", False)
    assert equal(derive(a + b, idx), derive(a, idx) + derive(b, idx), table)


def test_metric_is_covariantly_constant(table):
    e = parse_expr("g_{a b}*Psi", table)
    assert equal(derive(e, Index("c", False)), parse_expr("g_{a b}*D_{c} Psi", table), table)


def test_derivative_collision_is_rejected(table):
    with pytest.raises(IndexStructureError):
        covariant_derivative(parse_expr("PsiA1_{a}", table), Index("a", False), table)


def test_commutator_on_charged_scalar(table):
    f = parse_expr("Psi", table).terms[0].factors[0]
    val = commutator(f, Index("a", False), Index("b", False), table)
    assert equal(val, parse_expr("i*e*F_{a b}*Psi", table), table)


def test_commutator_on_neutral_lower_vector(table):
    t = fields_table()
    f = parse_expr("PhiN_{c d}", t).terms[0].factors[0]
    val = commutator(f, Index("a", False), Index("b", False), t)
    ref = parse_expr("-R^{n}_{c a b}*PhiN_{n d} - R^{n}_{d a b}*PhiN_{c n}", t)
    assert equal(val, ref, t)


def test_commutator_on_upper_slot(table):
    f = parse_expr("PhiN^{c}_{d}", table).terms[0].factors[0]
    val = commutator(f, Index("a", False), Index("b", False), table)
    ref = parse_expr("R^{c}_{n a b}*PhiN^{n}_{d} - R^{n}_{d a b}*PhiN^{c}_{n}", table)
    assert equal(val, ref, table)


def test_expand_commutator_under_outer_derivative(table):
    f = parse_expr("D_{c} D_{a} D_{b} Psi", table).terms[0].factors[0]
    val = expand_commutator(f, 1, table)
    assert equal(val, parse_expr("i*e*D_{c} (F_{a b}*Psi)", table), table)


def test_normal_order_sorts_and_adds_curvature(table):
    e = parse_expr("D_{b} D_{a} PsiA1_{c}", table)
    n = normal_order(e, table)
    swapped = parse_expr("D_{a} D_{b} PsiA1_{c} + R^{n}_{c a b}*PsiA1_{n}"
                         " - i*e*F_{a b}*PsiA1_{c}", table)
    assert equal(n, swapped, table)
    assert normal_order(n, table) == n


def test_project_symmetrize_and_traceless(table):
    e = parse_expr("A_{a b}", table)
    s = project(e, "symmetrize", ["a", "b"], table)
    assert equal(s, parse_expr("(1/2)*(A_{a b} + A_{b a})", table), table)
    tl = project(e, "traceless", ["a", "b"], table)
    assert is_zero(product(parse_expr("g^{a b}", table), tl), table)
    with pytest.raises(IndexStructureError):
        project(e, "symmetrize", ["a", "z"], table)


def test_printing_of_expanded_commutator_is_stable(table):
    e = canonicalize(parse_expr("[D_{a}, D_{b}] PsiS_{c d}", table), table)
    assert print_expr(e) == print_expr(canonicalize(parse_expr(print_expr(e), table), table))
