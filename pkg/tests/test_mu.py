import random

import pytest
from hypothesis import given, settings, strategies as st

from generators import mu_formula, random_lts
from opsem.lts import Lts, char_formula, mc_check, mc_naive, parse_formula, strong_bisim
from opsem.lts import mu

TWO = Lts.build([1, 2], [(1, "a", 2), (1, "b", 1), (2, "b", 1), (2, "b", 2)], root=1)


def test_two_state_example():
    # the hand-written formula, with A1 read off the transitions of state 1
    a2 = "<b>x1 /\\ <b>x2 /\\ [a]false /\\ [b](x1 \\/ x2)"
    a1 = "<a>x2 /\\ <b>x1 /\\ [a]x2 /\\ [b]x1"
    inner = "(nu x2. %s)" % a2
    f = parse_formula("nu x1. " + a1.replace("x2", inner))
    assert mc_naive(TWO, f) == frozenset({0})
    assert mc_check(TWO, 0, f) and not mc_check(TWO, 1, f)
    c = char_formula(TWO, 0)
    assert mc_naive(TWO, c) == frozenset({0})


def test_basic_modalities():
    l = Lts.build([0, 1, 2], [(0, "a", 1), (1, "b", 2)])
    assert mc_check(l, 0, parse_formula("<a><b>true"))
    assert not mc_check(l, 0, parse_formula("<b>true"))
    assert mc_check(l, 2, parse_formula("[a]false"))
    # eventually b: mu x. <b>true \/ <a>x
    ev = parse_formula("mu x. <b>true \\/ <a>x")
    assert [mc_check(l, s, ev) for s in range(3)] == [True, True, False]
    inf = parse_formula("nu x. <a>x")
    assert not mc_check(l, 0, inf)
    loop = Lts.build([0], [(0, "a", 0)])
    assert mc_check(loop, 0, inf)


def test_negation_by_duality():
    l = Lts.build([0, 1], [(0, "a", 1)])
    f = parse_formula("~<a>true")
    assert mu.positive(f) == parse_formula("[a]false")
    assert not mc_check(l, 0, f) and mc_check(l, 1, f)
    assert mc_check(l, 0, parse_formula("~(nu x. [a]x /\\ <a>true)"))


def test_errors():
    l = Lts.build([0], [])
    with pytest.raises(mu.UnboundVariable):
        mc_check(l, 0, parse_formula("<a>x"))
    with pytest.raises(ValueError):
        mc_check(l, 0, parse_formula("mu x. ~x"))


def test_unicode_and_tags():
    f = parse_formula("μx. ⟨a⟩x ∨ ⊤")
    assert mu.show(f) == "mu x. <a>x \\/ true"
    assert mu.show(mu.Mu("x", mu.FVar("x"), (1, 2))) == "mu x:{1,2}. x"


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_formula_roundtrip(seed):
    f = mu_formula(random.Random(seed), 4)
    assert parse_formula(mu.show(f)) == f


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32))
def test_local_and_global_checkers_agree(seed):
    rng = random.Random(seed)
    l = random_lts(rng, rng.randint(1, 6))
    f = mu_formula(rng, 4)
    den = mc_naive(l, f)
    assert {s for s in range(l.n) if mc_check(l, s, f)} == den


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_char_formula_roundtrip_and_only_nu(seed):
    rng = random.Random(seed)
    l = random_lts(rng, rng.randint(1, 4), density=0.25)
    f = char_formula(l, 0)
    assert parse_formula(mu.show(f)) == f
    assert "mu " not in mu.show(f)
    assert mc_naive(l, f) == frozenset(c for c in strong_bisim(l).classes()[0])
