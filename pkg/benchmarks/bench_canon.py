"""Compare the compiled and pure-Python canonical-search kernels.

Two workloads:

* ``suite``: every kernel call made while running the bundled reduction
  suite symbolically, replayed against both backends;
* ``riemann``: products of several Riemann tensors with random contractions,
  where the search space is large.

Both backends must return identical results on every call.

    python3 benchmarks/bench_canon.py [--repeat N] [--seed S]
"""
from __future__ import annotations

import argparse
import random
import time

from tensorcert import canon, kernel
from tensorcert.derivation import builtin_paper_suite, load_data
from tensorcert.ir import Factor, Index, SymbolTable, Term
from tensorcert.parser import parse_declarations
from tensorcert.scalars import Coeff


def record_suite_calls() -> list:
    calls = []
    inner = canon.canon_search

    def spy(*args):
        calls.append(args)
        return inner(*args)

    canon.canon_search = spy
    try:
        builtin_paper_suite(skip_oracle=True)
    finally:
        canon.canon_search = inner
    return calls


def riemann_calls(n: int, seed: int) -> list:
    table = parse_declarations(load_data("fields.decl"), SymbolTable(4))
    rng = random.Random(seed)
    calls = []
    inner = canon.canon_search

    def spy(*args):
        calls.append(args)
        return inner(*args)

    canon.canon_search = spy
    try:
        for _ in range(n):
            k = rng.choice((2, 3))
            names = [f"x{j}" for j in range(2 * k)]
            slots = names + names
            rng.shuffle(slots)
            facs = []
            for f in range(k):
                idx = slots[4 * f:4 * f + 4]
                seen = set()
                row = []
                for nm in idx:
                    row.append(Index(nm, nm in seen or rng.random() < 0.5))
                    seen.add(nm)
                facs.append(row)
            # make each dummy one upper and one lower
            var = {}
            for row in facs:
                for j, ix in enumerate(row):
                    up = var.get(ix.name)
                    row[j] = Index(ix.name, not up if up is not None else True)
                    var[ix.name] = row[j].up
            term = Term(Coeff.const(1), tuple(Factor("R", (), tuple(r)) for r in facs))
            try:
                canon.canonical_term(term, table)
            except Exception:
                continue
    finally:
        canon.canon_search = inner
    return calls


def time_backend(fn, calls, repeat: int) -> tuple:
    best = float("inf")
    results = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        results = [fn(*a) for a in calls]
        best = min(best, time.perf_counter() - t0)
    return best, results


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--riemann-terms", type=int, default=60)
    args = ap.parse_args(argv)
    if kernel.canon_search_ext is None:
        print("compiled kernel not built; only the pure-Python backend is available")
        return 1
    workloads = {"suite": record_suite_calls(),
                 "riemann": riemann_calls(args.riemann_terms, args.seed)}
    print(f"{'workload':<10} {'calls':>6} {'python s':>10} {'compiled s':>11} {'speedup':>8}")
    ok = True
    for name, calls in workloads.items():
        tp, rp = time_backend(kernel.canon_search_py, calls, args.repeat)
        tc, rc = time_backend(kernel.canon_search_ext, calls, args.repeat)
        same = [tuple(map(_norm, a)) for a in rp] == [tuple(map(_norm, b)) for b in rc]
        ok &= same
        print(f"{name:<10} {len(calls):>6} {tp:>10.4f} {tc:>11.4f} {tp / max(tc, 1e-9):>7.1f}x"
              + ("" if same else "  MISMATCH"))
    return 0 if ok else 1


def _norm(x):
    return list(x) if isinstance(x, (list, tuple)) else x


if __name__ == "__main__":
    raise SystemExit(main())
