import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from generators import ccs_proc, random_lts
from opsem.lts import (Lts, Partition, StateLimitExceeded, ccs_to_lts, parse_proc, parse_program,
                       strong_bisim, traces_upto, weak_bisim, weak_saturate)
from opsem.lts import _kernels as K
from opsem.lts import ccs
from opsem.lts.bisim import is_bisimulation, is_weak_bisimulation
from opsem.syntax import ParseError


def _greatest_bisim(l, succ):
    """Naive greatest fixpoint over state pairs."""
    rel = {(s, t) for s in range(l.n) for t in range(l.n)}
    moves = [succ(s) for s in range(l.n)]
    changed = True
    while changed:
        changed = False
        for s, t in list(rel):
            fwd = all(any(b == a and (s2, t2) in rel for b, t2 in moves[t]) for a, s2 in moves[s])
            bwd = all(any(b == a and (s2, t2) in rel for b, s2 in moves[s]) for a, t2 in moves[t])
            if not (fwd and bwd):
                rel.discard((s, t))
                changed = True
    return rel


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32))
def test_partition_refinement_matches_naive_fixpoint(seed):
    rng = random.Random(seed)
    l = random_lts(rng, rng.randint(1, 7), tau=rng.random() < 0.5)
    p = strong_bisim(l)
    rel = _greatest_bisim(l, l.succ)
    assert {(s, t) for s in range(l.n) for t in range(l.n) if p.same(s, t)} == rel
    assert is_bisimulation(l, p)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32))
def test_weak_bisim_matches_naive_fixpoint(seed):
    rng = random.Random(seed)
    l = random_lts(rng, rng.randint(1, 6), tau=True)
    w = weak_saturate(l)
    p = weak_bisim(l)
    rel = _greatest_bisim(l, w.succ)
    assert {(s, t) for s in range(l.n) for t in range(l.n) if p.same(s, t)} == rel
    assert is_weak_bisimulation(l, p)


def _lts(src):
    defs, main = parse_program(src)
    return ccs_to_lts(main, defs)


def test_synchronisation_and_restriction():
    l = _lts("a.0 | 'a.0")
    assert l.n == 4
    assert sorted(a for a, _ in l.succ(l.root)) == ["'a", "a", "tau"]
    r = _lts("new a (a.0 | 'a.0)")
    assert [a for a, _ in r.succ(r.root)] == ["tau"]


def test_recursive_definitions():
    l = _lts("B(i, o) = i.'o.B(i, o)\nB(a, b)")
    assert l.n == 2
    with pytest.raises(StateLimitExceeded):
        d, _ = parse_program("C(a) = a.(C(a) | C(a))\nC(a)")
        ccs_to_lts(parse_proc("C(a)"), d, limit=50)


def test_definition_errors():
    with pytest.raises(ParseError):
        parse_program("A = a.A")  # free name not a parameter
    with pytest.raises(ParseError):
        parse_program("A(a) = a.0\nA(b) = b.0")


def test_canonical_identifies_structural_variants():
    p, q = parse_proc("a.0 | b.0"), parse_proc("b.0 | a.0")
    assert ccs.canonical(p) == ccs.canonical(q)
    assert ccs.canonical(parse_proc("new a (a.0)")) == ccs.canonical(parse_proc("new b (b.0)"))


def test_unicode_input_ascii_output():
    p = parse_proc("ν a (τ.a.0)")
    assert ccs.show(p) == "new a (tau.a.0)"


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_process_roundtrip(seed):
    p = ccs_proc(random.Random(seed), 4)
    assert parse_proc(ccs.show(p)) == p


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32))
def test_canonical_preserves_bisimilarity(seed):
    p = ccs_proc(random.Random(seed), 3)
    a, b = ccs_to_lts(p, canon=False), ccs_to_lts(p)
    u, off = a.union(b)
    assert strong_bisim(u).same(a.root, b.root + off)


def test_traces():
    l = _lts("a.(b.0 + c.0)")
    assert traces_upto(l, l.root, 2) == {(), ("a",), ("a", "b"), ("a", "c")}
    t = _lts("tau.a.0")
    assert traces_upto(t, t.root, 2) == {(), ("a",)}
    assert traces_upto(t, t.root, 2, weak=False) == {(), ("tau",), ("tau", "a")}


def test_json_roundtrip_and_dot():
    l = _lts("a.b.0 + 'c.0")
    m = Lts.from_json(l.to_json())
    assert m.to_dict() == l.to_dict()
    assert l.to_dot().startswith("digraph lts {")


def test_partition_numbering():
    assert Partition([5, 5, 2, 7, 2]).blocks.tolist() == [0, 0, 1, 2, 1]
    assert Partition([1, 0]).classes() == [[0], [1]]


# ---------------------------------------------------------------- kernels

@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32))
def test_active_kernels_match_numpy(seed):
    rng = random.Random(seed)
    l = random_lts(rng, rng.randint(1, 9), tau=True)
    n = l.n
    c1, c2 = K.closure(n, l.src, l.dst), K.NUMPY["closure"](n, l.src, l.dst)
    assert np.array_equal(c1, c2)
    a = np.zeros((n, n), dtype=np.bool_)
    a[l.src, l.dst] = True
    assert np.array_equal(K.compose3(c1, a), K.NUMPY["compose3"](c1, a))
    codes = (l.act * 3 + l.dst % 3).astype(np.int64)
    o1, v1 = K.signatures(n, l.src, codes)
    o2, v2 = K.NUMPY["signatures"](n, l.src, codes)
    assert np.array_equal(o1, o2) and np.array_equal(v1, v2)
    sel = l.act == 0
    x = np.array([rng.random() < 0.5 for _ in range(n)], dtype=np.bool_)
    for k in ("pre_dia", "pre_box"):
        assert np.array_equal(getattr(K, k)(n, l.src, l.dst, sel, x), K.NUMPY[k](n, l.src, l.dst, sel, x))


def test_backend_flag():
    assert K.BACKEND in ("numba", "numpy")
