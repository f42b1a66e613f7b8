"""Equation registry, step engine and the bundled reduction suite.

A script is executed step by step against a :class:`SymbolTable`; named
steps store expressions (``eq``-like steps), replacement rules (``rule``,
``solve``) or lambda assignments.  Intermediate expressions are kept as
produced and canonicalised only at assertion points.
"""
from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

from .calculus import derive, normal_order, project
from .canon import canonicalize, ricci_rewrite, zero_symbols
from .ir import (Expr, Factor, Index, IndexStructureError, SymbolTable, TensorError, Term,
                 check_sum, fresh_names, product, separate_dummies)
from .parser import (ParseError, Script, parse_declaration, parse_expr, parse_script,
                     print_expr)
from .scalars import Coeff, Poly, as_coeff, format_coeff


class DerivationError(TensorError):
    pass


# ---------------------------------------------------------------------------
# rules


@dataclass(frozen=True)
class Rule:
    """``symbol_{pattern} := replacement``; the replacement's free indices equal the pattern."""

    symbol: str
    pattern: tuple
    replacement: Expr
    name: str = ""

    def text(self) -> str:
        lhs = print_expr(Expr.factor(Factor(self.symbol, (), self.pattern)))
        return f"{lhs} := {print_expr(self.replacement)}"


def parse_pattern(text: str, table: SymbolTable):
    """Parse a bare tensor occurrence such as ``PsiA1_{a}`` into (symbol, slots)."""
    e = parse_expr(text, table)
    if len(e.terms) != 1 or len(e.terms[0].factors) != 1 or not e.terms[0].coeff.is_one():
        raise DerivationError(f"rule left-hand side {text!r} must be a single tensor")
    f = e.terms[0].factors[0]
    if f.deriv:
        raise DerivationError("rule left-hand side must not carry derivatives")
    return f.name, f.slots


def make_rule(symbol: str, pattern, replacement: Expr, table: SymbolTable, name: str = "",
              check_symmetry: bool = True) -> Rule:
    """Build a rule after checking index pattern, symmetries and trace conditions."""
    sym_ = table[symbol]
    pattern = tuple(pattern)
    if len(pattern) != sym_.rank:
        raise DerivationError(f"{symbol} has rank {sym_.rank}, pattern has {len(pattern)} slots")
    names = [i.name for i in pattern]
    if len(set(names)) != len(names):
        raise DerivationError(f"repeated index in pattern of {symbol}")
    free = replacement.free()
    if free is not None and tuple(free) != tuple(sorted(pattern)):
        raise IndexStructureError(
            f"replacement free indices {_fmt(free)} do not match pattern {_fmt(sorted(pattern))}")
    for t in replacement.terms:
        if any(f.name == symbol for f in t.factors):
            raise DerivationError(f"replacement for {symbol} mentions {symbol}")
    rule = Rule(symbol, pattern, replacement, name)
    if check_symmetry and not replacement.is_empty():
        _check_rule_symmetry(rule, table)
    return rule


def _fmt(idx) -> str:
    return "{" + " ".join(str(i) for i in idx) + "}"


def _check_rule_symmetry(rule: Rule, table: SymbolTable):
    s = table[rule.symbol]
    p = rule.pattern
    r = rule.replacement
    if len({i.up for i in p}) <= 1:
        for perm, sign in s.symmetries:
            mapping = {p[k].name: p[perm[k] - 1].name for k in range(len(p))}
            moved = Expr([t.renamed(mapping) for t in r.terms])
            if not canonicalize(moved - r.scale(sign), table).is_empty():
                raise DerivationError(
                    f"replacement for {rule.symbol} violates a declared slot symmetry")
    for i, j in s.traceless_pairs:
        a, b = p[i - 1], p[j - 1]
        mapping = {b.name: (a.name, b.up == a.up)}
        traced = Expr([separate_dummies(t, {a.name}).renamed(mapping) for t in r.terms])
        if not canonicalize(traced, table).is_empty():
            raise DerivationError(
                f"replacement for {rule.symbol} has a nonzero trace over slots ({i},{j})")


def solve_for(e: Expr, symbol: str, table: SymbolTable, name: str = "") -> Rule:
    """Solve ``e = 0`` for the tensor ``symbol`` occurring linearly in one term."""
    ce = canonicalize(e, table)
    hits = [k for k, t in enumerate(ce.terms) if any(f.name == symbol for f in t.factors)]
    if not hits:
        raise DerivationError(f"{symbol} does not occur in the equation")
    if len(hits) > 1:
        raise DerivationError(f"{symbol} occurs in {len(hits)} terms; refusing to choose one")
    t = ce.terms[hits[0]]
    occ = [f for f in t.factors if f.name == symbol]
    if len(occ) > 1:
        raise DerivationError(f"{symbol} occurs non-linearly")
    f = occ[0]
    if f.deriv:
        raise DerivationError(f"{symbol} occurs under a derivative")
    if len(t.factors) > 1:
        raise DerivationError(f"{symbol} is multiplied by other tensors")
    free = {i.name for i in t.free()}
    if any(i.name not in free for i in f.slots):
        raise DerivationError(f"{symbol} carries a contracted slot")
    rest = Expr(ce.terms[:hits[0]] + ce.terms[hits[0] + 1:])
    replacement = rest.scale(-t.coeff.inverse())
    return make_rule(symbol, f.slots, replacement, table, name)


def _instantiate(rule: Rule, f: Factor, avoid) -> Expr:
    """The rule's replacement placed at occurrence ``f`` (derivatives applied)."""
    pattern_names = {i.name for i in rule.pattern}
    used = set(avoid) | {i.name for i in f.indices()} | pattern_names
    terms = [separate_dummies(t, used) for t in rule.replacement.terms]
    mapping = {}
    for p, s in zip(rule.pattern, f.slots):
        mapping[p.name] = (s.name, p.up != s.up)
    # simultaneous rename via temporary names avoids chains like a->b, b->a
    tmp = fresh_names(used | {i.name for t in terms for i in t.indices()}, len(mapping))
    first = {k: tmp[n] for n, k in enumerate(mapping)}
    second = {tmp[n]: v for n, (k, v) in enumerate(mapping.items())}
    val = Expr([t.renamed(first).renamed(second) for t in terms])
    for d in reversed(f.deriv):
        val = derive(val, d)
    return val


def substitute(e: Expr, rule: Rule, table: SymbolTable | None = None) -> Expr:
    """Replace every occurrence of ``rule.symbol`` (also under derivatives)."""
    out = []
    work = list(e.terms)
    guard = 0
    while work:
        guard += 1
        if guard > 100000:
            raise DerivationError("substitution did not terminate")
        t = work.pop()
        k = next((n for n, f in enumerate(t.factors) if f.name == rule.symbol), None)
        if k is None:
            out.append(t)
            continue
        f = t.factors[k]
        rest = Term(t.coeff, t.factors[:k] + t.factors[k + 1:])
        val = _instantiate(rule, f, rest.index_names())
        work.extend(product(Expr([rest]), val).terms)
    out.reverse()
    return check_sum(Expr(out))


# ---------------------------------------------------------------------------
# lambda constraints

LAMBDAS = tuple(f"lambda{k}" for k in range(1, 13))
DEFAULT_CHOICES = {"lambda1": 1, "lambda2": 0, "lambda4": 1, "lambda5": 0, "lambda8": 1,
                   "lambda9": "mu", "lambda10": 1, "lambda12": 1}


def _sym(n):
    return Coeff.symbol(n)


def relations() -> list:
    """Named constraint polynomials, each required to vanish."""
    l = {n: _sym(n) for n in LAMBDAS}
    mu = _sym("mu")
    return [
        ("2*lambda10*lambda11 - (2/3)*lambda9*lambda12 - 1",
         2 * l["lambda10"] * l["lambda11"] - Fraction(2, 3) * l["lambda9"] * l["lambda12"] - 1),
        ("lambda4*lambda7 + lambda6*lambda8 + (8/9)*lambda9*lambda12 - 1/3",
         l["lambda4"] * l["lambda7"] + l["lambda6"] * l["lambda8"]
         + Fraction(8, 9) * l["lambda9"] * l["lambda12"] - Fraction(1, 3)),
        ("lambda1*lambda3 + lambda2*lambda5 + 1/4",
         l["lambda1"] * l["lambda3"] + l["lambda2"] * l["lambda5"] + Fraction(1, 4)),
        ("(lambda1*lambda4 + lambda2*lambda6)*(lambda3*lambda7 + lambda5*lambda8) + 1/12",
         (l["lambda1"] * l["lambda4"] + l["lambda2"] * l["lambda6"])
         * (l["lambda3"] * l["lambda7"] + l["lambda5"] * l["lambda8"]) + Fraction(1, 12)),
        ("lambda9*lambda12 - mu", l["lambda9"] * l["lambda12"] - mu),
    ]


def composites() -> dict:
    l = {n: _sym(n) for n in LAMBDAS}
    return {
        "lambda1*lambda4 + lambda2*lambda6": l["lambda1"] * l["lambda4"] + l["lambda2"] * l["lambda6"],
        "lambda3*lambda7 + lambda5*lambda8": l["lambda3"] * l["lambda7"] + l["lambda5"] * l["lambda8"],
        "lambda4*lambda7 + lambda6*lambda8": l["lambda4"] * l["lambda7"] + l["lambda6"] * l["lambda8"],
        "lambda1*lambda8 - lambda2*lambda7": l["lambda1"] * l["lambda8"] - l["lambda2"] * l["lambda7"],
    }


@dataclass
class LambdaAssignment:
    """Exact values for lambda1..lambda12 (and optionally mu) in free parameters."""

    values: dict
    free: tuple = ()

    def subs_map(self) -> dict:
        return dict(self.values)

    def residuals(self) -> list:
        vals = self.subs_map()
        return [(txt, r.subs(vals)) for txt, r in relations()]

    def composite_values(self) -> dict:
        vals = self.subs_map()
        return {k: v.subs(vals) for k, v in composites().items()}

    def product(self) -> Coeff:
        c = self.composite_values()
        return c["lambda1*lambda4 + lambda2*lambda6"] * c["lambda3*lambda7 + lambda5*lambda8"]

    def to_dict(self) -> dict:
        return {
            "values": {k: format_coeff(v) for k, v in sorted(self.values.items(), key=_lam_key)},
            "free": list(self.free),
            "composites": {k: format_coeff(v) for k, v in self.composite_values().items()},
            "product": format_coeff(self.product()),
            "residuals": {txt: format_coeff(r) for txt, r in self.residuals()},
        }

    def to_text(self) -> str:
        d = self.to_dict()
        lines = [f"{k} = {v}" for k, v in d["values"].items()]
        lines.append("free: " + (", ".join(d["free"]) or "(none)"))
        for k, v in d["composites"].items():
            lines.append(f"{k} = {v}")
        lines.append(f"product of composites = {d['product']}")
        for k, v in d["residuals"].items():
            lines.append(f"[{k}] -> {v}")
        return "\n".join(lines)


def _lam_key(item):
    k = item[0]
    m = re.fullmatch(r"lambda(\d+)", k)
    return (0, int(m.group(1)), "") if m else (1, 0, k)


def parse_scalar(text, extra=()) -> Coeff:
    """Parse a scalar value such as ``mu`` or ``-8*mu/9``."""
    if isinstance(text, Coeff):
        return text
    if isinstance(text, (int, Fraction)):
        return as_coeff(text)
    names = set(re.findall(r"[A-Za-z][A-Za-z0-9]*", str(text))) - {"i", "sqrt2", "sqrt3"}
    table = SymbolTable(scalars=sorted(names | set(LAMBDAS) | {"mu"} | set(extra)))
    e = parse_expr(str(text), table)
    if any(t.factors for t in e.terms):
        raise DerivationError(f"{text!r} is not a scalar")
    total = as_coeff(0)
    for t in e.terms:
        total = total + t.coeff
    return total


def _linear_split(r: Coeff, v: str):
    """(a, b) with r = a*v + b, or None when r is not linear in v."""
    if any(v in a.variables() for a, _ in r.den):
        return None
    a_terms, b_terms = {}, {}
    for m, c in r.num.terms.items():
        e = dict(m).get(v, 0)
        if e > 1:
            return None
        if e == 1:
            a_terms[tuple(x for x in m if x[0] != v)] = c
        else:
            b_terms[m] = c
    den = r.den_poly()
    return (Coeff.from_poly_ratio(Poly(a_terms), den), Coeff.from_poly_ratio(Poly(b_terms), den))


def lambda_solve(choices: dict | None = None) -> LambdaAssignment:
    """Complete a partial choice of lambdas to an exact solution of the relations."""
    raw = dict(DEFAULT_CHOICES if choices is None else choices)
    known = {}
    for k, v in raw.items():
        if k not in LAMBDAS and k != "mu":
            raise DerivationError(f"unknown constant {k!r}")
        known[k] = parse_scalar(v)
    if "mu" in known:
        known = {k: v if k == "mu" else v.subs({"mu": known["mu"]}) for k, v in known.items()}
    unknown = [n for n in LAMBDAS if n not in known]
    rels = relations()
    for _ in range(len(LAMBDAS) + 1):
        cur = [(txt, r.subs(known)) for txt, r in rels]
        progress = False
        for txt, r in cur:
            vs = r.variables() & set(unknown)
            if not vs:
                if not r.is_zero():
                    raise DerivationError(
                        f"inconsistent choices: [{txt}] reduces to {format_coeff(r)}, not 0")
                continue
            if len(vs) == 1:
                (v,) = vs
                split = _linear_split(r, v)
                if split is None:
                    continue
                a, b = split
                if a.is_zero():
                    raise DerivationError(f"division by zero solving [{txt}] for {v}")
                known[v] = -b / a
                unknown.remove(v)
                progress = True
                break
        if progress:
            continue
        progress = _solve_pair(cur, unknown, known)
        if not progress:
            break
    leftover = [(txt, r.subs(known)) for txt, r in rels]
    for txt, r in leftover:
        if not r.is_zero() and not (r.variables() & set(unknown)):
            raise DerivationError(
                f"inconsistent choices: [{txt}] reduces to {format_coeff(r)}, not 0")
    open_rel = [txt for txt, r in leftover if not r.is_zero()]
    if open_rel:
        raise DerivationError(
            "choices leave non-linear relations unsolved; fix more of "
            + ", ".join(sorted(unknown, key=lambda n: int(n[6:]))))
    values = {n: known[n] if n in known else _sym(n) for n in LAMBDAS}
    if "mu" in known:
        values["mu"] = known["mu"]
    free = sorted({v for c in values.values() for v in c.variables()})
    asg = LambdaAssignment(values, tuple(free))
    comp = asg.composite_values()
    for key in ("lambda1*lambda4 + lambda2*lambda6", "lambda1*lambda8 - lambda2*lambda7"):
        if comp[key].is_zero():
            raise DerivationError(f"division by zero in a pivot: {key} vanishes")
    return asg


def _solve_pair(cur, unknown, known) -> bool:
    pending = [(txt, r) for txt, r in cur if not r.is_zero() and (r.variables() & set(unknown))]
    for n1 in range(len(pending)):
        for n2 in range(n1 + 1, len(pending)):
            (t1, r1), (t2, r2) = pending[n1], pending[n2]
            vs = (r1.variables() | r2.variables()) & set(unknown)
            if len(vs) != 2:
                continue
            u, v = sorted(vs)
            s = []
            for r in (r1, r2):
                su = _linear_split(r, u)
                if su is None or v in su[0].variables():
                    break
                sv = _linear_split(su[1], v)
                if sv is None:
                    break
                s.append((su[0], sv[0], sv[1]))
            if len(s) != 2:
                continue
            (a1, b1, c1), (a2, b2, c2) = s
            det = a1 * b2 - a2 * b1
            if det.is_zero():
                continue
            known[u] = (b1 * c2 - b2 * c1) / det
            known[v] = (a2 * c1 - a1 * c2) / det
            unknown.remove(u)
            unknown.remove(v)
            return True
    return False


def set_scalars(e: Expr, values: dict) -> Expr:
    vals = {k: as_coeff(v) if not isinstance(v, Coeff) else v for k, v in values.items()}
    return Expr([Term(t.coeff.subs(vals), t.factors) for t in e.terms])


def apply_constraints(e: Expr, assignment: LambdaAssignment) -> Expr:
    """Replace every lambda by its assigned value."""
    return set_scalars(e, assignment.subs_map())


def scalar_part(e: Expr, name: str) -> Expr:
    """Terms that vanish when ``name`` is set to zero, i.e. ``e - e|name=0``."""
    zero = as_coeff(0)
    return Expr([Term(t.coeff - t.coeff.subs({name: zero}), t.factors) for t in e.terms])


def relabel(e: Expr, mapping: dict) -> Expr:
    """Simultaneously rename free indices of ``e``."""
    free = e.free()
    if free is None:
        return e
    names = {i.name for i in free}
    for a, b in mapping.items():
        if a not in names:
            raise IndexStructureError(f"{a!r} is not a free index")
    targets = set(mapping.values())
    out = []
    for t in e.terms:
        t = separate_dummies(t, targets | names)
        tmp = fresh_names(t.index_names() | targets | names, len(mapping))
        first = {a: tmp[k] for k, a in enumerate(mapping)}
        second = {tmp[k]: b for k, b in enumerate(mapping.values())}
        out.append(t.renamed(first).renamed(second))
    return check_sum(Expr(out))


# ---------------------------------------------------------------------------
# reports


@dataclass
class StepResult:
    name: str | None
    kind: str
    line: int
    status: str          # pass | fail | ok | error
    label: str = ""
    residue: str = ""
    detail: str = ""
    seconds: float = 0.0

    def to_dict(self, timings=True) -> dict:
        d = {"name": self.name, "kind": self.kind, "line": self.line, "status": self.status,
             "label": self.label, "residue": self.residue, "detail": self.detail}
        if timings:
            d["seconds"] = round(self.seconds, 4)
        return d


RICCI_CONVENTIONS = {1: "Ric_{bd} = R^{a}_{b a d}", -1: "Ric_{bd} = -R^{a}_{b a d}"}


@dataclass
class Report:
    steps: list = field(default_factory=list)
    ricci_convention: int = 1
    interaction_term: str | None = None
    notes: list = field(default_factory=list)
    findings: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    error: str | None = None
    error_kind: str | None = None   # "parse" or "step"

    @property
    def passed(self) -> bool:
        return self.error is None and all(s.status in ("pass", "ok", "skip") for s in self.steps)

    @property
    def exit_code(self) -> int:
        if self.passed:
            return 0
        return 2 if self.error_kind == "parse" else 1

    def assertions(self) -> list:
        return [s for s in self.steps
                if (s.kind.startswith("assert") or s.kind == "oracle") and s.status != "skip"]

    def step(self, name: str) -> StepResult | None:
        return next((s for s in self.steps if s.name == name), None)

    def to_dict(self, timings=True) -> dict:
        asserts = self.assertions()
        return {
            "passed": self.passed,
            "summary": {"steps": len(self.steps),
                        "skipped": sum(1 for s in self.steps if s.status == "skip"),
                        "assertions": len(asserts),
                        "failed": sum(1 for s in asserts if s.status != "pass")},
            "ricci_convention": RICCI_CONVENTIONS[self.ricci_convention],
            "interaction_term": self.interaction_term,
            "notes": list(self.notes),
            "findings": list(self.findings),
            "config": self.config,
            "error": self.error,
            "steps": [s.to_dict(timings) for s in self.steps],
        }

    def to_json(self, timings=True) -> str:
        return json.dumps(self.to_dict(timings), indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = []
        for s in self.steps:
            tag = {"pass": "PASS", "fail": "FAIL", "ok": "  ok", "error": " ERR", "skip": "SKIP"}[s.status]
            nm = s.name or f"line {s.line}"
            line = f"[{tag}] {nm:<24} {s.kind}"
            if s.detail:
                line += f"  ({s.detail})"
            lines.append(line)
            if s.status in ("fail", "error") and s.residue:
                lines.append(f"        residue: {s.residue}")
        asserts = self.assertions()
        nfail = sum(1 for s in asserts if s.status != "pass")
        lines.append("")
        lines.append(f"Ricci convention: {RICCI_CONVENTIONS[self.ricci_convention]}")
        if self.interaction_term is not None:
            lines.append(f"interaction term: {self.interaction_term}")
        for n in self.notes:
            lines.append(f"note: {n}")
        for n in self.findings:
            lines.append(f"finding: {n}")
        if self.error:
            lines.append(f"error: {self.error}")
        lines.append(f"{len(asserts) - nfail}/{len(asserts)} assertions passed; "
                     + ("PASSED" if self.passed else "FAILED"))
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# script execution


class _Runner:
    def __init__(self, table: SymbolTable, ricci_convention: int, oracle_options: dict,
                 skip_checks: bool, lambda_overrides: dict | None, skip_oracle: bool = False):
        self.table = table
        self.eqs: dict = {}
        self.rules: dict = {}
        self.assignments: dict = {}
        self.active: LambdaAssignment | None = None
        self.conv = ricci_convention
        self.oracle_options = dict(oracle_options or {})
        self.skip_checks = skip_checks
        self.skip_oracle = skip_oracle
        self.findings: list = []
        self.lambda_overrides = dict(lambda_overrides or {})

    def parse(self, text: str) -> Expr:
        return parse_expr(text, self.table, self.eqs)

    def assignment(self, name=None) -> LambdaAssignment:
        if name is not None:
            return self.assignments[name]
        if self.active is None:
            raise DerivationError("no lambda assignment is active")
        return self.active

    def _prepare(self, e: Expr, args) -> Expr:
        if args.get("constrain"):
            e = apply_constraints(e, self.assignment())
        return e

    def run(self, step) -> tuple:
        """Execute one step; returns (status, residue, detail)."""
        k, a = step.kind, step.args
        if k in ("tensor", "scalar"):
            parse_declaration(step.text, self.table)
            return "ok", "", ""
        if k == "note":
            return "ok", "", a["text"]
        if k in ("eq", "combine"):
            self.eqs[step.name] = self.parse(a["expr"])
            return "ok", "", f"{len(self.eqs[step.name])} terms"
        if k == "rule":
            symbol, pattern = parse_pattern(a["lhs"], self.table)
            rule = make_rule(symbol, pattern, self.parse(a["expr"]), self.table, step.name)
            self.rules[step.name] = rule
            return "ok", "", f"{len(rule.replacement)} terms"
        if k == "solve":
            rule = solve_for(self.parse(a["expr"]), a["symbol"], self.table, step.name)
            self.rules[step.name] = rule
            return "ok", "", f"{a['symbol']} := {len(rule.replacement)} terms"
        if k == "subst":
            e = self.parse(a["expr"])
            for r in a["rules"]:
                e = substitute(e, self.rules[r], self.table)
            self.eqs[step.name] = e
            return "ok", "", f"{len(e)} terms"
        if k == "lambdas":
            choices = dict(a["choices"])
            if choices.pop("__defaults__", None):
                choices = {**DEFAULT_CHOICES, **choices}
            choices.update(self.lambda_overrides)
            asg = lambda_solve(choices)
            self.assignments[step.name] = asg
            self.active = asg
            return "ok", "", "free: " + ", ".join(asg.free)
        if k == "constrain":
            e = apply_constraints(self.parse(a["expr"]), self.assignment(a.get("using")))
            self.eqs[step.name] = e
            return "ok", "", f"{len(e)} terms"
        if k == "set":
            vals = {n: parse_scalar(v) for n, v in a["values"].items()}
            self.eqs[step.name] = set_scalars(self.parse(a["expr"]), vals)
            return "ok", "", ""
        if k == "expand":
            e = normal_order(self.parse(a["expr"]), self.table)
            self.eqs[step.name] = e
            return "ok", "", f"{len(e)} terms"
        if k == "ricci":
            conv = a["convention"] if a["convention"] is not None else self.conv
            self.eqs[step.name] = canonicalize(ricci_rewrite(self.parse(a["expr"]), self.table,
                                                             conv), self.table)
            return "ok", "", f"convention {conv:+d}"
        if k == "flat":
            t = self.table
            self.eqs[step.name] = zero_symbols(self.parse(a["expr"]),
                                               {t.riemann, t.ricci, t.field_strength})
            return "ok", "", ""
        if k == "relabel":
            self.eqs[step.name] = relabel(self.parse(a["expr"]), a["map"])
            return "ok", "", ""
        if k == "project":
            self.eqs[step.name] = project(self.parse(a["expr"]), a["mode"], a["indices"],
                                          self.table)
            return "ok", "", a["mode"]
        if k == "muterm":
            self.eqs[step.name] = scalar_part(self.parse(a["expr"]), a["scalar"])
            return "ok", "", ""
        if k == "impose":
            self.table = self.table.with_traceless(a["symbol"], a["pair"])
            return "ok", "", f"{a['symbol']} traceless over {a['pair']}"
        if (self.skip_checks and (k.startswith("assert") or k == "oracle")) or \
                (self.skip_oracle and k == "oracle"):
            return "skip", "", "skipped"
        if k in ("assert_zero", "assert_nonzero", "assert_equal"):
            if k == "assert_equal":
                e = self.parse(a["lhs"]) - self.parse(a["rhs"])
            else:
                e = self.parse(a["expr"])
            e = self._prepare(e, a)
            c = canonicalize(e, self.table, multiterm=bool(a.get("multiterm")))
            residue = print_expr(c)
            zero = c.is_empty()
            if k == "assert_nonzero":
                return ("pass" if not zero else "fail"), residue, "expected nonzero"
            return ("pass" if zero else "fail"), residue, f"{len(e)} terms checked"
        if k == "oracle":
            from .oracle import oracle_check
            opts = dict(self.oracle_options)
            trials = opts.pop("trials", None) or a["trials"]
            seed = opts.pop("seed", None)
            seed = a["seed"] if seed is None else seed
            res = oracle_check(self.parse(a["expr"]), self.table, trials=trials, seed=seed,
                               assignment=self.active, convention=self.conv,
                               probe_cyclic=opts.get("cyclic", True), **opts)
            if res.cyclic_needed is not None:
                self.findings.append(f"line {step.line}: identity "
                                     + ("needs" if res.cyclic_needed else "does not need")
                                     + " the cyclic curvature identity")
            return ("pass" if res.passed else "fail"), res.witness or "", res.summary()
        raise DerivationError(f"unsupported step kind {k!r}")


def run_script(script, table: SymbolTable | None = None, *, dim: int = 4,
               ricci_convention: int = 1, oracle_options: dict | None = None,
               skip_checks: bool = False, stop_after: str | None = None,
               lambda_overrides: dict | None = None, result_name: str | None = None,
               config: dict | None = None, skip_oracle: bool = False) -> Report:
    """Execute a script (text or parsed) and collect a :class:`Report`.

    Execution stops at the first failed assertion or step error.
    """
    report = Report(ricci_convention=ricci_convention, config=dict(config or {}))
    report.config.setdefault("dim", dim)
    if isinstance(script, str):
        try:
            script = parse_script(script)
        except ParseError as exc:
            report.error, report.error_kind = str(exc), "parse"
            return report
    runner = _Runner(table if table is not None else SymbolTable(dim=dim), ricci_convention,
                     oracle_options, skip_checks, lambda_overrides, skip_oracle)
    for step in script.steps:
        t0 = time.perf_counter()
        try:
            status, residue, detail = runner.run(step)
        except ParseError as exc:
            report.steps.append(StepResult(step.name, step.kind, step.line, "error", step.label,
                                           "", str(exc), time.perf_counter() - t0))
            report.error = f"line {step.line}: {exc}"
            report.error_kind = "parse"
            break
        except (TensorError, ZeroDivisionError, KeyError) as exc:
            msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
            report.steps.append(StepResult(step.name, step.kind, step.line, "error", step.label,
                                           "", str(msg), time.perf_counter() - t0))
            report.error = f"line {step.line}: {msg}"
            report.error_kind = "step"
            break
        report.steps.append(StepResult(step.name, step.kind, step.line, status, step.label,
                                       residue, detail, time.perf_counter() - t0))
        if step.kind == "note":
            report.notes.append(step.args["text"])
        if status == "fail":
            report.error = f"line {step.line}: assertion {step.name or step.kind} failed"
            report.error_kind = "step"
            break
        if stop_after is not None and step.name == stop_after:
            break
    if result_name and result_name in runner.eqs:
        report.interaction_term = print_expr(canonicalize(runner.eqs[result_name], runner.table))
    report.findings = list(runner.findings)
    report.env = runner.eqs
    report.rules = runner.rules
    report.table = runner.table
    report.assignment = runner.active
    return report


# ---------------------------------------------------------------------------
# bundled suite


def load_data(name: str) -> str:
    return resources.files("tensorcert").joinpath("data").joinpath(name).read_text(encoding="utf-8")


def builtin_script_text(mutations=()) -> str:
    """Declarations plus the reduction steps, with textual mutations applied."""
    text = load_data("fields.decl") + "\n" + load_data("suite.script")
    for m in mutations:
        if m not in MUTATIONS:
            raise DerivationError(f"unknown mutation {m!r}; choose from {sorted(MUTATIONS)}")
        step, old, new = MUTATIONS[m]
        lines = text.splitlines(keepends=True)
        hit = False
        for n, line in enumerate(lines):
            if line.lstrip().startswith(step + ":") and old in line:
                lines[n] = line.replace(old, new, 1)
                hit = True
                break
        if not hit:
            raise DerivationError(f"mutation {m!r} does not apply")
        text = "".join(lines)
    return text


MUTATIONS = {
    "flip-ricci": ("curv.charged.ref", "+ Ric_{a c}*tPhiS^{c}_{b}", "- Ric_{a c}*tPhiS^{c}_{b}"),
    "drop-ricci": ("curv.charged.ref", " + Ric_{a c}*tPhiS^{c}_{b}", ""),
    "flip-riemann": ("curv.charged.ref", "+ R_{c a b n}", "- R_{c a b n}"),
    "flip-gauge": ("curv.charged.ref", "i*e*F_{c a}", "-i*e*F_{c a}"),
}

INTERACTION_STEP = "curv.op.ric"


def builtin_paper_suite(mutations=(), *, dim: int = 4, ricci_convention: int = 1,
                        oracle_options: dict | None = None, skip_checks: bool = False,
                        stop_after: str | None = None,
                        lambda_overrides: dict | None = None,
                        skip_oracle: bool = False) -> Report:
    """Run the bundled reduction suite."""
    text = builtin_script_text(mutations)
    cfg = {"mutations": sorted(mutations), "dim": dim,
           "lambda_overrides": {k: str(v) for k, v in sorted((lambda_overrides or {}).items())},
           "oracle": {k: v for k, v in sorted((oracle_options or {}).items())},
           "skip_oracle": skip_oracle}
    return run_script(text, SymbolTable(dim=dim), dim=dim, ricci_convention=ricci_convention,
                      oracle_options=oracle_options, skip_checks=skip_checks,
                      stop_after=stop_after, lambda_overrides=lambda_overrides,
                      result_name=INTERACTION_STEP, config=cfg, skip_oracle=skip_oracle)
