# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of ``_kernel_py.canon_search``; same encoding and result."""
from itertools import permutations, product

from libc.stdlib cimport malloc, free
from libc.string cimport memcpy


def _orderings(n, ties):
    base = list(range(n))
    pools = [list(permutations(range(a, b))) for a, b in ties]
    for choice in product(*pools):
        order = base[:]
        for (a, b), perm in zip(ties, choice):
            order[a:b] = perm
        yield order


def canon_search(sym_ids, derivs, slots, groups, ties, nfree):
    cdef int n = len(sym_ids)
    if n == 0:
        return [], [], 1, False
    cdef int f, j, e, pos, c, r, nxt, sign, best_sign = 0, klen = 0, cmpv, maxcode = nfree
    cdef int total_perm = 0, total_deriv = 0, total_slot = 0
    cdef bint zero = False, have_best = False, done

    for f in range(n):
        klen += 2 + len(derivs[f]) + len(slots[f])
        for c in derivs[f]:
            maxcode = max(maxcode, c)
        for c in slots[f]:
            maxcode = max(maxcode, c)
        total_perm += len(groups[f]) * len(slots[f])

    cdef int *sid = <int *> malloc(n * sizeof(int))
    cdef int *rank = <int *> malloc(n * sizeof(int))
    cdef int *nder = <int *> malloc(n * sizeof(int))
    cdef int *der_off = <int *> malloc(n * sizeof(int))
    cdef int *slot_off = <int *> malloc(n * sizeof(int))
    cdef int *ngrp = <int *> malloc(n * sizeof(int))
    cdef int *grp_off = <int *> malloc(n * sizeof(int))
    cdef int *perm_off = <int *> malloc(n * sizeof(int))
    cdef int *dcodes = <int *> malloc((klen + 1) * sizeof(int))
    cdef int *scodes = <int *> malloc((klen + 1) * sizeof(int))
    cdef int *gperm = <int *> malloc((total_perm + 1) * sizeof(int))
    cdef int *gsign = <int *> malloc((total_perm + n + 1) * sizeof(int))
    cdef int *key = <int *> malloc(klen * sizeof(int))
    cdef int *best_key = <int *> malloc(klen * sizeof(int))
    cdef int *relabel = <int *> malloc((maxcode + 1) * sizeof(int))
    cdef int *order = <int *> malloc(n * sizeof(int))
    cdef int *choice = <int *> malloc(n * sizeof(int))
    best_order = None
    best_choice = None
    try:
        total_perm = 0
        c = 0
        for f in range(n):
            sid[f] = sym_ids[f]
            nder[f] = len(derivs[f])
            rank[f] = len(slots[f])
            der_off[f] = total_deriv
            for x in derivs[f]:
                dcodes[total_deriv] = x
                total_deriv += 1
            slot_off[f] = total_slot
            for x in slots[f]:
                scodes[total_slot] = x
                total_slot += 1
            ngrp[f] = len(groups[f])
            grp_off[f] = c
            perm_off[f] = total_perm
            for perm, s in groups[f]:
                gsign[c] = s
                for j in range(rank[f]):
                    gperm[total_perm] = perm[j]
                    total_perm += 1
                c += 1
        for j in range(maxcode + 1):
            relabel[j] = -1

        for py_order in _orderings(n, ties):
            for pos in range(n):
                order[pos] = py_order[pos]
                choice[pos] = 0
            done = False
            while not done:
                # build key
                r = 0
                nxt = nfree
                sign = 1
                for pos in range(n):
                    f = order[pos]
                    e = choice[pos]
                    sign *= gsign[grp_off[f] + e]
                    key[r] = sid[f]
                    key[r + 1] = nder[f]
                    r += 2
                    for j in range(nder[f]):
                        c = dcodes[der_off[f] + j]
                        if c >= nfree:
                            if relabel[c] < 0:
                                relabel[c] = nxt
                                nxt += 1
                            c = relabel[c]
                        key[r] = c
                        r += 1
                    for j in range(rank[f]):
                        c = scodes[slot_off[f] + gperm[perm_off[f] + e * rank[f] + j]]
                        if c >= nfree:
                            if relabel[c] < 0:
                                relabel[c] = nxt
                                nxt += 1
                            c = relabel[c]
                        key[r] = c
                        r += 1
                for j in range(nfree, maxcode + 1):
                    relabel[j] = -1
                # compare
                if not have_best:
                    cmpv = -1
                else:
                    cmpv = 0
                    for j in range(klen):
                        if key[j] != best_key[j]:
                            cmpv = -1 if key[j] < best_key[j] else 1
                            break
                if cmpv < 0:
                    memcpy(best_key, key, klen * sizeof(int))
                    have_best = True
                    best_sign = sign
                    zero = False
                    best_order = [order[j] for j in range(n)]
                    best_choice = [choice[j] for j in range(n)]
                elif cmpv == 0 and sign != best_sign:
                    zero = True
                # advance odometer over group elements
                pos = n - 1
                while pos >= 0:
                    choice[pos] += 1
                    if choice[pos] < ngrp[order[pos]]:
                        break
                    choice[pos] = 0
                    pos -= 1
                if pos < 0:
                    done = True
        return best_order, best_choice, best_sign, bool(zero)
    finally:
        free(sid); free(rank); free(nder); free(der_off); free(slot_off)
        free(ngrp); free(grp_off); free(perm_off); free(dcodes); free(scodes); free(gperm)
        free(gsign); free(key); free(best_key); free(relabel); free(order); free(choice)

