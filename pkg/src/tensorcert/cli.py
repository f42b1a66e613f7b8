"""Command-line entry point.

Exit status: 0 when every assertion holds, 1 on an assertion failure or a
failed step, 2 on usage, file or parse errors.
"""
from __future__ import annotations

import argparse
import json
import sys

from .canon import canonicalize
from .derivation import (DEFAULT_CHOICES, MUTATIONS, DerivationError, builtin_paper_suite,
                         builtin_script_text, lambda_solve, load_data, parse_scalar, run_script)
from .ir import SymbolTable, TensorError
from .oracle import oracle_check
from .parser import ParseError, parse_declarations, parse_expr, print_expr

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _lambda_overrides(items) -> dict:
    out = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"--lambda expects NAME=VALUE, got {item!r}")
        out[key.strip()] = val.strip()
    return out


def _oracle_options(args) -> dict:
    opts = {}
    if args.trials is not None:
        opts["trials"] = args.trials
    if args.seed is not None:
        opts["seed"] = args.seed
    if getattr(args, "no_cyclic", False):
        opts["cyclic"] = False
    return opts


def _table(args, builtin: bool) -> SymbolTable:
    table = SymbolTable(dim=args.dim)
    if builtin:
        parse_declarations(load_data("fields.decl"), table)
    for path in args.decl or ():
        parse_declarations(_read(path), table)
    return table


def _emit(args, text: str, data) -> None:
    if args.format == "json":
        print(json.dumps(data, indent=2, sort_keys=True))
    else:
        print(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_canon(args) -> int:
    if args.expr is not None:
        source = args.expr
    elif args.file is not None:
        source = _read(args.file)
    else:
        raise UsageError("canon needs an expression file or -e EXPR")
    table = _table(args, builtin=not args.no_builtin)
    decls, exprs = [], []
    for line in source.splitlines():
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        (decls if body.startswith(("tensor ", "scalar ")) else exprs).append(body)
    if decls:
        parse_declarations("\n".join(decls), table)
    results = []
    for text in exprs:
        c = canonicalize(parse_expr(text, table), table, multiterm=args.bianchi)
        results.append({"input": text, "canonical": print_expr(c)})
    _emit(args, "\n".join(r["canonical"] for r in results), results)
    return EXIT_OK


def _finish(args, report) -> int:
    if args.format == "json":
        print(report.to_json(timings=not args.no_timings))
    else:
        print(report.to_text())
    return report.exit_code


def cmd_verify(args) -> int:
    text = _read(args.script)
    table = _table(args, builtin=args.builtin_decls)
    report = run_script(text, table, dim=args.dim, ricci_convention=args.ricci_convention,
                        oracle_options=_oracle_options(args),
                        lambda_overrides=_lambda_overrides(args.lam),
                        skip_oracle=args.skip_oracle,
                        config={"script": args.script})
    return _finish(args, report)


def cmd_paper_suite(args) -> int:
    report = builtin_paper_suite(tuple(args.mutate or ()), dim=args.dim,
                                 ricci_convention=args.ricci_convention,
                                 oracle_options=_oracle_options(args),
                                 lambda_overrides=_lambda_overrides(args.lam),
                                 skip_oracle=args.skip_oracle)
    return _finish(args, report)


def cmd_solve_lambdas(args) -> int:
    choices = dict(DEFAULT_CHOICES)
    choices.update({k: parse_scalar(v) for k, v in _lambda_overrides(args.lam).items()})
    a = lambda_solve(choices)
    _emit(args, a.to_text(), a.to_dict())
    return EXIT_OK


def cmd_oracle(args) -> int:
    if args.script:
        text = _read(args.script)
        table = _table(args, builtin=args.builtin_decls)
    else:
        text = builtin_script_text()
        table = SymbolTable(dim=args.dim)
    # replay the script without checks to register the equation and its context
    report = run_script(text, table, dim=args.dim, ricci_convention=args.ricci_convention,
                        skip_checks=True, stop_after=args.equation,
                        lambda_overrides=_lambda_overrides(args.lam))
    if report.error:
        print(f"error: {report.error}", file=sys.stderr)
        return EXIT_USAGE if report.error_kind == "parse" else EXIT_FAIL
    if args.equation in report.env:
        expr = report.env[args.equation]
    else:
        expr = parse_expr(args.equation, report.table, report.env)
    res = oracle_check(expr, report.table, trials=args.trials if args.trials is not None else 20,
                       seed=args.seed if args.seed is not None else 1,
                       assignment=report.assignment, convention=args.ricci_convention,
                       cyclic=not args.no_cyclic, flat=args.flat, neutral=args.neutral)
    data = {"equation": args.equation, "passed": res.passed, "trials": res.trials,
            "seed": res.seed, "mode": res.mode, "witness": res.witness}
    text = f"{'PASS' if res.passed else 'FAIL'} {args.equation}: {res.summary()}"
    if res.witness:
        text += f"\n  witness: {res.witness}"
    _emit(args, text, data)
    return EXIT_OK if res.passed else EXIT_FAIL


# ---------------------------------------------------------------------------
# argument parsing


def _common(p, *, decl=True, checks=True):
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--dim", type=int, default=4, help="spacetime dimension (default 4)")
    if decl:
        p.add_argument("--decl", action="append", metavar="FILE",
                       help="extra declaration file (repeatable)")
    if checks:
        p.add_argument("--seed", type=int, default=None, help="oracle seed (default 1)")
        p.add_argument("--trials", type=int, default=None, help="oracle trials (default 20)")
        p.add_argument("--lambda", dest="lam", action="append", metavar="NAME=VALUE",
                       help="pin a lambda or mu value (repeatable)")
        p.add_argument("--ricci-convention", type=int, choices=(1, -1), default=1)
        p.add_argument("--no-cyclic", action="store_true",
                       help="sample curvature without the cyclic identity")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tensorcert",
                                 description="Symbolic tensor calculus and derivation replay.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("canon", help="print canonical forms of expressions")
    p.add_argument("file", nargs="?", help="file with optional declarations and one "
                                           "expression per line")
    p.add_argument("-e", "--expr", help="expression given inline")
    p.add_argument("--bianchi", action="store_true",
                   help="also reduce with the cyclic curvature identity")
    p.add_argument("--no-builtin", action="store_true",
                   help="do not preload the bundled declarations")
    _common(p, checks=False)
    p.set_defaults(func=cmd_canon)

    for name, func, helptext in (("verify", cmd_verify, "run a derivation script"),
                                 ("paper-suite", cmd_paper_suite,
                                  "run the bundled reduction suite")):
        p = sub.add_parser(name, help=helptext)
        if name == "verify":
            p.add_argument("script")
            p.add_argument("--builtin-decls", action="store_true",
                           help="preload the bundled declarations")
        else:
            p.add_argument("--mutate", action="append", choices=sorted(MUTATIONS),
                           help="apply a known single-term mutation (repeatable)")
        p.add_argument("--skip-oracle", action="store_true", help="skip numeric oracle steps")
        p.add_argument("--no-timings", action="store_true", help="omit timings from JSON")
        _common(p, decl=name == "verify")
        p.set_defaults(func=func)

    p = sub.add_parser("solve-lambdas", help="solve the lambda constraints")
    p.add_argument("--lambda", dest="lam", action="append", metavar="NAME=VALUE",
                   help="pivot choice overriding a default (repeatable)")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_solve_lambdas)

    p = sub.add_parser("oracle", help="check one equation numerically")
    p.add_argument("equation", help="name of an expression that must vanish, or the expression itself")
    p.add_argument("--script", help="script defining the equation (default: bundled suite)")
    p.add_argument("--builtin-decls", action="store_true",
                   help="preload the bundled declarations for --script")
    p.add_argument("--flat", action="store_true", help="flat metric, zero curvature")
    p.add_argument("--neutral", action="store_true", help="zero field strength")
    _common(p)
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DerivationError, TensorError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
