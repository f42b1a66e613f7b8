import os
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tensorcert import kernel

pytestmark = pytest.mark.skipif(kernel.canon_search_ext is None,
                                reason="compiled kernel not built")

RIEMANN = [((0, 1, 2, 3), 1), ((1, 0, 2, 3), -1), ((0, 1, 3, 2), -1), ((1, 0, 3, 2), 1),
           ((2, 3, 0, 1), 1), ((3, 2, 0, 1), -1), ((2, 3, 1, 0), -1), ((3, 2, 1, 0), 1)]
SYM2 = [((0, 1), 1), ((1, 0), 1)]
ANTI2 = [((0, 1), 1), ((1, 0), -1)]
NONE2 = [((0, 1), 1)]
VEC = [((0,), 1)]
SHAPES = {"R": RIEMANN, "S": SYM2, "F": ANTI2, "A": NONE2, "V": VEC}


@st.composite
def kernel_inputs(draw):
    names = draw(st.lists(st.sampled_from(sorted(SHAPES)), min_size=1, max_size=3))
    names.sort()
    ranks = [len(SHAPES[n][0][0]) for n in names]
    derivs = [draw(st.integers(0, 1)) for _ in names]
    total = sum(ranks) + sum(derivs)
    nfree = draw(st.integers(0, total)) if total % 2 == 0 else 1
    nfree = min(nfree, total)
    if (total - nfree) % 2:
        nfree += 1
    codes = list(range(nfree)) + [nfree + k // 2 for k in range(total - nfree)]
    codes = draw(st.permutations(codes))
    out_d, out_s, pos = [], [], 0
    for r, d in zip(ranks, derivs):
        out_d.append(tuple(codes[pos:pos + d]))
        out_s.append(tuple(codes[pos + d:pos + d + r]))
        pos += d + r
    ids = sorted(set(names))
    sym_ids = [ids.index(n) for n in names]
    ties = []
    start = 0
    for k in range(1, len(names) + 1):
        if k == len(names) or (names[k], derivs[k]) != (names[start], derivs[start]):
            if k - start > 1:
                ties.append((start, k))
            start = k
    groups = [SHAPES[n] for n in names]
    return sym_ids, out_d, out_s, groups, ties, nfree


@given(kernel_inputs())
@settings(max_examples=300)
def test_backends_agree(args):
    py = kernel.canon_search_py(*args)
    ext = kernel.canon_search_ext(*args)
    assert (list(py[0]), list(py[1]), py[2], py[3]) == (list(ext[0]), list(ext[1]), ext[2], ext[3])


def test_empty_input():
    assert kernel.canon_search_ext([], [], [], [], [], 0)[2] == 1


def test_pure_fallback_selected_by_environment():
    code = "from tensorcert import kernel; print(kernel.BACKEND)"
    env = dict(os.environ, TENSORCERT_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "python"
    env.pop("TENSORCERT_PURE")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "compiled"
