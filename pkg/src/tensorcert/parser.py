"""Text form of expressions, tensor declarations and derivation scripts.

Expression grammar (``*`` or juxtaposition multiplies)::

    expr    := ["+"|"-"] term (("+"|"-") term)*
    term    := unit (("*" | "/" | <juxtaposition>) unit)*
    unit    := atom ["^" INT]
    atom    := INT | "i" | "sqrt2" | "sqrt3" | SCALAR | tensor | deriv
             | comm | "(" expr ")" | "@" REF
    tensor  := NAME idxgroup*
    deriv   := ("D" | "Nabla") idxgroup unit
    comm    := "[" deriv-op "," deriv-op "]" unit      (expands to D1 D2 X - D2 D1 X)
    idxgroup:= ("_" | "^") "{" index+ "}"               index := letter digit*

Division and powers are restricted to scalar (index-free, tensor-free) operands.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .ir import (Expr, Factor, Index, IndexStructureError, SymbolTable, TensorError, Term,
                 check_sum, product, validate_term)
from .numfield import I as SURD_I, SQRT2, SQRT3
from .scalars import Coeff, as_coeff, format_coeff


class ParseError(TensorError):
    """Syntax or resolution error; ``span`` is a (start, end) byte range of the input."""

    def __init__(self, message, span=(0, 0), text=None):
        self.span = span
        self.text = text
        super().__init__(message)

    def __str__(self):
        msg = self.args[0]
        a, b = self.span
        if self.text is not None:
            line_start = self.text.rfind("\n", 0, a) + 1
            col = a - line_start
            line_end = self.text.find("\n", a)
            line = self.text[line_start:line_end if line_end >= 0 else None]
            return f"{msg} at {a}:{b}\n  {line}\n  {' ' * col}{'^' * max(1, b - a)}"
        return f"{msg} at {a}:{b}"


# ---------------------------------------------------------------------------
# lexer

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<int>\d+)
  | (?P<ref>@[A-Za-z_][A-Za-z0-9_.]*)
  | (?P<name>[A-Za-z][A-Za-z0-9]*)
  | (?P<idx>[_^]\s*\{[^}]*\})
  | (?P<pow>\^\s*\d+)
  | (?P<op>[-+*/(),\[\]])
""", re.VERBOSE)


@dataclass
class Tok:
    kind: str
    text: str
    start: int
    end: int


def tokenize(text: str) -> list:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", (pos, pos + 1), text)
        kind = m.lastgroup
        if kind != "ws":
            out.append(Tok(kind, m.group(), m.start(), m.end()))
        pos = m.end()
    out.append(Tok("eof", "", len(text), len(text)))
    return out


_INDEX = re.compile(r"[A-Za-z][0-9]*")


def _parse_group(tok: Tok, text: str) -> list:
    up = tok.text[0] == "^"
    body = tok.text[tok.text.index("{") + 1:-1]
    names = []
    pos = 0
    while pos < len(body):
        if body[pos].isspace():
            pos += 1
            continue
        m = _INDEX.match(body, pos)
        if not m:
            a = tok.start + tok.text.index("{") + 1 + pos
            raise ParseError(f"bad index character {body[pos]!r}", (a, a + 1), text)
        names.append(m.group())
        pos = m.end()
    if not names:
        raise ParseError("empty index group", (tok.start, tok.end), text)
    return [Index(n, up) for n in names]


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, text, table: SymbolTable, env=None):
        self.text = text
        self.table = table
        self.env = env or {}
        self.toks = tokenize(text)
        self.k = 0

    # helpers
    def peek(self) -> Tok:
        return self.toks[self.k]

    def take(self) -> Tok:
        t = self.toks[self.k]
        self.k += 1
        return t

    def expect(self, text):
        t = self.take()
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text or 'end of input'!r}",
                             (t.start, t.end), self.text)
        return t

    def error(self, msg, span):
        return ParseError(msg, span, self.text)

    def _check(self, fn, span):
        try:
            return fn()
        except ParseError:
            raise
        except TensorError as exc:
            raise self.error(str(exc), span) from None

    # grammar
    def parse(self) -> Expr:
        if self.peek().kind == "eof":
            raise self.error("empty expression", (0, len(self.text)))
        e = self.expr()
        t = self.peek()
        if t.kind != "eof":
            raise self.error(f"unexpected {t.text!r}", (t.start, t.end))
        return e

    def expr(self) -> Expr:
        start = self.peek().start
        sign = 1
        if self.peek().text in "+-" and self.peek().kind == "op":
            sign = -1 if self.take().text == "-" else 1
        total = self.term().scale(sign)
        while self.peek().kind == "op" and self.peek().text in "+-":
            s = -1 if self.take().text == "-" else 1
            t0 = self.peek().start
            rhs = self.term().scale(s)
            span = (start, self.toks[self.k - 1].end)
            total = self._check(lambda: check_sum(Expr(total.terms + rhs.terms)), span)
        return total

    def _starts_unit(self, t: Tok) -> bool:
        return t.kind in ("int", "name", "ref") or (t.kind == "op" and t.text in "([")

    def term(self) -> Expr:
        start = self.peek().start
        acc = self.unit()
        while True:
            t = self.peek()
            if t.kind == "op" and t.text == "*":
                self.take()
                rhs = self.unit()
                span = (start, self.toks[self.k - 1].end)
                acc = self._check(lambda: _mul(acc, rhs), span)
            elif t.kind == "op" and t.text == "/":
                self.take()
                rs = self.peek().start
                rhs = self.unit()
                span = (rs, self.toks[self.k - 1].end)
                c = self._scalar_of(rhs, span, "divisor")
                if c.is_zero():
                    raise self.error("division by zero", span)
                acc = acc.scale(c.inverse())
            elif self._starts_unit(t):
                rhs = self.unit()
                span = (start, self.toks[self.k - 1].end)
                acc = self._check(lambda: _mul(acc, rhs), span)
            else:
                return acc

    def _scalar_of(self, e: Expr, span, what) -> Coeff:
        if e.is_empty():
            return as_coeff(0)
        if any(t.factors for t in e.terms):
            raise self.error(f"{what} must be a scalar", span)
        total = as_coeff(0)
        for t in e.terms:
            total = total + t.coeff
        return total

    def unit(self) -> Expr:
        start = self.peek().start
        e = self.atom()
        if self.peek().kind == "pow":
            t = self.take()
            n = int(t.text[1:].strip())
            c = self._scalar_of(e, (start, t.end), "base of a power")
            e = Expr.scalar(c ** n)
        return e

    def atom(self) -> Expr:
        t = self.take()
        if t.kind == "int":
            return Expr.scalar(int(t.text))
        if t.kind == "ref":
            name = t.text[1:]
            if name not in self.env:
                raise self.error(f"undefined reference {name!r}", (t.start, t.end))
            return self.env[name]
        if t.kind == "op" and t.text == "(":
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "op" and t.text == "[":
            return self.commutator(t)
        if t.kind == "name":
            if t.text in ("D", "Nabla"):
                idx = self._deriv_index(t)
                inner = self.unit()
                span = (t.start, self.toks[self.k - 1].end)
                return self._check(lambda: derive_expr(inner, idx), span)
            return self.named(t)
        raise self.error(f"unexpected {t.text or 'end of input'!r}", (t.start, t.end))

    def _deriv_index(self, t: Tok) -> Index:
        g = self.take()
        if g.kind != "idx":
            raise self.error(f"{t.text} needs an index group", (g.start, g.end))
        idx = _parse_group(g, self.text)
        if len(idx) != 1:
            raise self.error("a derivative takes exactly one index", (g.start, g.end))
        return idx[0]

    def commutator(self, open_tok) -> Expr:
        ops = []
        for sep in (",", "]"):
            t = self.take()
            if t.kind != "name" or t.text not in ("D", "Nabla"):
                raise self.error("commutator bracket expects derivative operators",
                                 (t.start, t.end))
            ops.append(self._deriv_index(t))
            self.expect(sep)
        inner = self.unit()
        span = (open_tok.start, self.toks[self.k - 1].end)
        p, q = ops
        return self._check(lambda: derive_expr(derive_expr(inner, q), p)
                           - derive_expr(derive_expr(inner, p), q), span)

    def named(self, t: Tok) -> Expr:
        name = t.text
        groups = []
        end = t.end
        while self.peek().kind == "idx":
            g = self.take()
            groups.extend(_parse_group(g, self.text))
            end = g.end
        if not groups:
            if name == "i":
                return Expr.scalar(SURD_I)
            if name == "sqrt2":
                return Expr.scalar(SQRT2)
            if name == "sqrt3":
                return Expr.scalar(SQRT3)
            if self.table.is_scalar(name):
                return Expr.scalar(Coeff.symbol(name))
        if name not in self.table:
            kind = "tensor" if groups else "symbol"
            raise self.error(f"unknown {kind} {name!r}", (t.start, end))
        rank = self.table[name].rank
        if len(groups) != rank:
            raise self.error(f"{name} expects {rank} indices, got {len(groups)}", (t.start, end))
        term = Term(as_coeff(1), (Factor(name, (), tuple(groups)),))
        self._check(lambda: validate_term(term), (t.start, end))
        return Expr([term])


def _mul(a: Expr, b: Expr) -> Expr:
    return product(a, b)


def derive_expr(e: Expr, idx: Index) -> Expr:
    from .calculus import derive
    return derive(e, idx)


def parse_expr(text: str, table: SymbolTable, env=None) -> Expr:
    """Parse ``text`` into an :class:`Expr`; ``env`` maps ``@name`` references to Exprs."""
    return _Parser(text, table, env).parse()


# ---------------------------------------------------------------------------
# printer

_SIMPLE_COEFF = re.compile(r"\d+|[A-Za-z][A-Za-z0-9]*")


def _fmt_factor(f: Factor) -> str:
    out = "".join(f"D{_group([i])} " for i in f.deriv)
    out += f.name
    k = 0
    while k < len(f.slots):
        j = k
        while j < len(f.slots) and f.slots[j].up == f.slots[k].up:
            j += 1
        out += _group(f.slots[k:j])
        k = j
    return out


def _group(idx) -> str:
    return ("^" if idx[0].up else "_") + "{" + " ".join(i.name for i in idx) + "}"


def _enclosed(text: str) -> bool:
    """True when the whole text sits inside one pair of parentheses."""
    if not (text.startswith("(") and text.endswith(")")):
        return False
    depth = 0
    for k, ch in enumerate(text):
        depth += {"(": 1, ")": -1}.get(ch, 0)
        if depth == 0 and k < len(text) - 1:
            return False
    return True


def _fmt_term(t: Term, first: bool) -> str:
    c = t.coeff
    neg = c.is_negative_form()
    if neg:
        c = -c
    body = "*".join(_fmt_factor(f) for f in t.factors)
    if c.is_one() and body:
        text = body
    else:
        ct = format_coeff(c)
        if not (_SIMPLE_COEFF.fullmatch(ct) or _enclosed(ct)):
            ct = f"({ct})"
        text = f"{ct}*{body}" if body else ct
    if first:
        return ("-" if neg else "") + text
    return (" - " if neg else " + ") + text


def print_expr(e: Expr) -> str:
    if e.is_empty():
        return "0"
    return "".join(_fmt_term(t, k == 0) for k, t in enumerate(e.terms))


def print_factor(f: Factor) -> str:
    return _fmt_factor(f)


# ---------------------------------------------------------------------------
# declarations

_KV = re.compile(r"(\w+)\s*=\s*(\([^)]*\)(?:\s*\([^)]*\))*|\S+)")


def _cycles(text: str, rank: int, span, src) -> tuple:
    cycles = re.findall(r"\(([^)]*)\)", text)
    perm = list(range(1, rank + 1))
    if not cycles:
        raise ParseError(f"bad permutation {text!r}", span, src)
    for cyc in cycles:
        try:
            pts = [int(x) for x in re.split(r"[\s,]+", cyc.strip()) if x]
        except ValueError:
            raise ParseError(f"bad permutation {text!r}", span, src) from None
        if len(pts) < 2 or len(set(pts)) != len(pts) or not all(1 <= p <= rank for p in pts):
            raise ParseError(f"bad cycle ({cyc}) for rank {rank}", span, src)
        img = perm[:]
        for a, b in zip(pts, pts[1:] + pts[:1]):
            img[a - 1] = perm[b - 1]
        perm = img
    return tuple(perm)


def _slot_tuple(text, span, src) -> tuple:
    m = re.fullmatch(r"\(([^)]*)\)", text.strip())
    if not m:
        raise ParseError(f"expected a parenthesised slot list, got {text!r}", span, src)
    try:
        return tuple(int(x) for x in re.split(r"[\s,]+", m.group(1).strip()) if x)
    except ValueError:
        raise ParseError(f"bad slot list {text!r}", span, src) from None


def parse_declaration(line: str, table: SymbolTable, offset: int = 0, src: str | None = None):
    """Apply one ``tensor ...`` or ``scalar ...`` declaration line to ``table``."""
    src = src if src is not None else line
    words = line.split()
    span = (offset, offset + len(line))
    if words[0] == "scalar":
        for w in words[1:]:
            if not table.is_scalar(w):
                try:
                    table.declare_scalar(w)
                except TensorError as exc:
                    raise ParseError(str(exc), span, src) from None
        return None
    if words[0] != "tensor" or len(words) < 2:
        raise ParseError("malformed declaration", span, src)
    name = words[1]
    rest = line.split(None, 2)[2] if len(words) > 2 else ""
    opts = _KV.findall(rest)
    rank = None
    gens, traceless, cyclic = [], [], []
    charge = 0
    for key, val in opts:
        if key == "rank":
            rank = int(val)
    if rank is None:
        raise ParseError(f"declaration of {name} lacks rank=N", span, src)
    for key, val in opts:
        if key == "rank":
            continue
        if key in ("sym", "antisym"):
            gens.append((_cycles(val, rank, span, src), 1 if key == "sym" else -1))
        elif key == "traceless":
            traceless.append(_slot_tuple(val, span, src))
        elif key == "cyclic":
            cyclic.append(_slot_tuple(val, span, src))
        elif key == "charge":
            charge = 0 if val == "0" else val
        else:
            raise ParseError(f"unknown declaration option {key!r}", span, src)
    try:
        return table.declare(name, rank, gens, traceless, charge, cyclic)
    except TensorError as exc:
        raise ParseError(str(exc), span, src) from None


def parse_declarations(text: str, table: SymbolTable) -> SymbolTable:
    pos = 0
    for line in text.splitlines(keepends=True):
        body = line.split("#", 1)[0].strip()
        if body:
            parse_declaration(body, table, pos + line.index(body[0]), text)
        pos += len(line)
    return table


def format_declaration(s) -> str:
    parts = [f"tensor {s.name} rank={s.rank}"]
    for perm, sign in s.symmetries:
        parts.append(("sym=" if sign > 0 else "antisym=") + _perm_to_cycles(perm))
    for p in s.traceless_pairs:
        parts.append("traceless=(" + ",".join(map(str, p)) + ")")
    for c in s.cyclic:
        parts.append("cyclic=(" + ",".join(map(str, c)) + ")")
    parts.append("charge=" + ("0" if s.charge.is_zero() else format_coeff(s.charge)))
    return " ".join(parts)


def _perm_to_cycles(perm) -> str:
    seen, out = set(), ""
    for start in range(1, len(perm) + 1):
        if start in seen or perm[start - 1] == start:
            continue
        cyc = [start]
        seen.add(start)
        nxt = perm[start - 1]
        while nxt != start:
            cyc.append(nxt)
            seen.add(nxt)
            nxt = perm[nxt - 1]
        out += "(" + ",".join(map(str, cyc)) + ")"
    return out


# ---------------------------------------------------------------------------
# scripts

STEP_KINDS = {
    "eq": "DefineEquation", "combine": "Combine", "rule": "DefineRule",
    "solve": "SolveFor", "subst": "Substitute", "lambdas": "LambdaAssignment",
    "constrain": "ApplyConstraints", "set": "SetScalars", "expand": "NormalOrder",
    "ricci": "RicciRewrite", "flat": "FlatNeutral", "relabel": "Relabel",
    "project": "Project", "muterm": "ScalarPart",
    "assert_zero": "AssertZero", "assert_equal": "AssertEqual",
    "assert_nonzero": "AssertNonzero", "oracle": "OracleCheck", "impose": "Impose",
    "note": "Note",
}
_NAMED = {"eq", "combine", "rule", "solve", "subst", "lambdas", "constrain", "set",
          "expand", "ricci", "flat", "relabel", "project", "muterm", "impose"}


@dataclass
class Step:
    kind: str            # one of STEP_KINDS (or "tensor"/"scalar" declarations)
    name: str | None
    args: dict
    line: int
    text: str
    span: tuple = (0, 0)
    label: str = ""

    @property
    def kind_name(self) -> str:
        if self.kind in ("tensor", "scalar"):
            return "DeclareTensor"
        return STEP_KINDS[self.kind]


@dataclass
class Script:
    steps: list = field(default_factory=list)
    source: str = ""

    def __len__(self):
        return len(self.steps)


_STEP = re.compile(r"^(?:(?P<name>[A-Za-z_][A-Za-z0-9_.]*)\s*:\s*)?(?P<cmd>[a-z_]+)\b\s*(?P<rest>.*)$")
_REFS = re.compile(r"@([A-Za-z_][A-Za-z0-9_.]*)")


def _trailing_opts(text: str):
    opts = {}
    while True:
        m = re.search(r"\s+(\w+)=([^\s=]+)\s*$", text)
        if not m or "{" in m.group(2):
            return text.strip(), opts
        opts[m.group(1)] = m.group(2)
        text = text[:m.start()]


def _flag(v: str) -> bool:
    return v.lower() in ("1", "on", "true", "yes")


def _assert_opts(opts: dict, fail) -> dict:
    out = {}
    for key in ("multiterm", "constrain"):
        if key in opts:
            out[key] = _flag(opts.pop(key))
    if opts:
        raise fail(f"unexpected options {sorted(opts)}")
    return out


def parse_script(text: str) -> Script:
    """Parse a line-oriented derivation script and check name resolution."""
    steps = []
    eqs: set = set()
    rules: set = set()
    lambdas: set = set()
    pos = 0
    label = ""
    for lineno, raw in enumerate(text.splitlines(keepends=True), 1):
        line_start = pos
        pos += len(raw)
        stripped = raw.rstrip("\n")
        if stripped.lstrip().startswith("##"):
            label = stripped.lstrip()[2:].strip()
            continue
        body = stripped.split("#", 1)[0].rstrip() if not stripped.lstrip().startswith("note") \
            else stripped.rstrip()
        if not body.strip():
            continue
        off = line_start + (len(body) - len(body.lstrip()))
        body = body.strip()
        span = (off, off + len(body))

        def fail(msg):
            return ParseError(f"line {lineno}: {msg}", span, text)

        if body.startswith(("tensor ", "scalar ")):
            steps.append(Step(body.split()[0], None, {"decl": body}, lineno, body, span, label))
            continue
        m = _STEP.match(body)
        if not m or m.group("cmd") not in STEP_KINDS:
            raise fail(f"malformed step {body!r}")
        name, cmd, rest = m.group("name"), m.group("cmd"), m.group("rest").strip()
        if cmd in _NAMED and not name:
            raise fail(f"'{cmd}' needs a result name ('name: {cmd} ...')")
        args = _step_args(cmd, rest, fail)
        for ref in _REFS.findall(rest):
            if ref not in eqs:
                raise fail(f"undefined reference {ref!r}")
        for r in args.get("rules", ()):
            if r not in rules:
                raise fail(f"undefined rule {r!r}")
        if "using" in args and args["using"] not in lambdas:
            raise fail(f"undefined lambda assignment {args['using']!r}")
        if cmd == "constrain" and "using" not in args and not lambdas:
            raise fail("constrain used before any lambda assignment")
        if cmd in ("rule", "solve"):
            rules.add(name)
        elif cmd == "lambdas":
            lambdas.add(name)
        elif name:
            eqs.add(name)
        steps.append(Step(cmd, name, args, lineno, body, span, label))
    return Script(steps, text)


def _step_args(cmd, rest, fail) -> dict:
    if cmd in ("eq", "combine", "constrain", "expand", "flat", "assert_zero", "assert_nonzero",
               "muterm"):
        expr, opts = _trailing_opts(rest)
        if not expr:
            raise fail(f"'{cmd}' needs an expression")
        out = {"expr": expr}
        if cmd.startswith("assert"):
            out.update(_assert_opts(opts, fail))
        if cmd == "constrain" and "using" in opts:
            out["using"] = opts.pop("using")
        if cmd == "muterm":
            if "in" not in opts:
                raise fail("muterm needs in=SCALAR")
            out["scalar"] = opts.pop("in")
        if opts:
            raise fail(f"unexpected options {sorted(opts)}")
        return out
    if cmd == "rule":
        if ":=" not in rest:
            raise fail("rule needs 'TENSOR_{...} := expression'")
        lhs, rhs = rest.split(":=", 1)
        return {"lhs": lhs.strip(), "expr": rhs.strip()}
    if cmd == "solve":
        m = re.match(r"(.*)\s+for\s+([A-Za-z][A-Za-z0-9]*)\s*$", rest)
        if not m:
            raise fail("solve needs 'EXPR for TENSOR'")
        return {"expr": m.group(1).strip(), "symbol": m.group(2)}
    if cmd == "subst":
        m = re.match(r"(.*)\s+with\s+([A-Za-z0-9_., ]+)$", rest)
        if not m:
            raise fail("subst needs 'EXPR with RULE[, RULE...]'")
        return {"expr": m.group(1).strip(),
                "rules": [r.strip() for r in m.group(2).split(",") if r.strip()]}
    if cmd == "lambdas":
        choices = {}
        for tok in rest.split():
            if "=" not in tok:
                if tok == "defaults":
                    choices["__defaults__"] = "1"
                    continue
                raise fail(f"lambda choice {tok!r} is not NAME=VALUE")
            k, v = tok.split("=", 1)
            choices[k] = v
        return {"choices": choices}
    if cmd == "set":
        m = re.match(r"(.*)\s+where\s+(.+)$", rest)
        if not m:
            raise fail("set needs 'EXPR where NAME=VALUE[, ...]'")
        vals = {}
        for item in m.group(2).split(","):
            if "=" not in item:
                raise fail(f"bad assignment {item!r}")
            k, v = item.split("=", 1)
            vals[k.strip()] = v.strip()
        return {"expr": m.group(1).strip(), "values": vals}
    if cmd == "ricci":
        expr, opts = _trailing_opts(rest)
        conv = opts.pop("convention", None)
        if conv not in (None, "+1", "1", "-1"):
            raise fail("convention must be +1 or -1")
        if opts:
            raise fail(f"unexpected options {sorted(opts)}")
        return {"expr": expr, "convention": None if conv is None else int(conv)}
    if cmd == "relabel":
        m = re.match(r"(.*)\s+map\s+(.+)$", rest)
        if not m:
            raise fail("relabel needs 'EXPR map a->b, ...'")
        mp = {}
        for item in m.group(2).split(","):
            if "->" not in item:
                raise fail(f"bad relabeling {item!r}")
            a, b = item.split("->")
            mp[a.strip()] = b.strip()
        return {"expr": m.group(1).strip(), "map": mp}
    if cmd == "project":
        m = re.match(r"(symmetrize|antisymmetrize|traceless)\s+\(([^)]*)\)\s+(.+)$", rest)
        if not m:
            raise fail("project needs 'MODE (a b ...) EXPR'")
        return {"mode": m.group(1), "indices": m.group(2).split(), "expr": m.group(3)}
    if cmd == "assert_equal":
        if "==" not in rest:
            raise fail("assert_equal needs 'A == B'")
        a, b = rest.split("==", 1)
        b, opts = _trailing_opts(b)
        out = {"lhs": a.strip(), "rhs": b.strip()}
        out.update(_assert_opts(opts, fail))
        return out
    if cmd == "oracle":
        expr, opts = _trailing_opts(rest)
        out = {"expr": expr, "trials": int(opts.pop("trials", 20)),
               "seed": int(opts.pop("seed", 1))}
        if opts:
            raise fail(f"unexpected options {sorted(opts)}")
        return out
    if cmd == "impose":
        m = re.match(r"([A-Za-z][A-Za-z0-9]*)\s+traceless=\((\d+)\s*,\s*(\d+)\)\s*$", rest)
        if not m:
            raise fail("impose needs 'TENSOR traceless=(i,j)'")
        return {"symbol": m.group(1), "pair": (int(m.group(2)), int(m.group(3)))}
    if cmd == "note":
        return {"text": rest}
    raise fail(f"unknown command {cmd!r}")
