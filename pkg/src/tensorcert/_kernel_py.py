"""Pure-Python canonical-form search over slot symmetries and factor orderings.

Integer encoding shared with the compiled twin ``_kernel``:

* index codes ``0 .. nfree-1`` are free indices, already ranked;
* codes ``>= nfree`` are dummy pair identifiers (arbitrary, one per pair);
* ``groups[f]`` is a sequence of ``(perm, sign)`` with 0-based ``perm``;
* ``ties`` lists runs ``(start, stop)`` of factors that may be reordered.

The search returns the factor order and group elements realising the
lexicographically smallest key, where dummy codes are renumbered by first
appearance.  ``zero`` is set when that key is reached with both signs.
"""
from itertools import permutations, product


def _orderings(n, ties):
    base = list(range(n))
    pools = [list(permutations(range(a, b))) for a, b in ties]
    for choice in product(*pools):
        order = base[:]
        for (a, b), perm in zip(ties, choice):
            order[a:b] = perm
        yield order


def canon_search(sym_ids, derivs, slots, groups, ties, nfree):
    n = len(sym_ids)
    best_key = None
    best = None
    best_sign = 0
    zero = False
    elem_ranges = [range(len(g)) for g in groups]
    for order in _orderings(n, ties):
        for choice in product(*[elem_ranges[f] for f in order]):
            key = []
            relabel = {}
            nxt = nfree
            sign = 1
            for pos, f in enumerate(order):
                perm, s = groups[f][choice[pos]]
                sign *= s
                key.append(sym_ids[f])
                d = derivs[f]
                key.append(len(d))
                sl = slots[f]
                for c in d:
                    if c >= nfree:
                        r = relabel.get(c)
                        if r is None:
                            r = relabel[c] = nxt
                            nxt += 1
                        c = r
                    key.append(c)
                for j in perm:
                    c = sl[j]
                    if c >= nfree:
                        r = relabel.get(c)
                        if r is None:
                            r = relabel[c] = nxt
                            nxt += 1
                        c = r
                    key.append(c)
            if best_key is None or key < best_key:
                best_key, best, best_sign, zero = key, (list(order), list(choice)), sign, False
            elif key == best_key and sign != best_sign:
                zero = True
    order, choice = best
    return order, choice, best_sign, zero
