import random

from hypothesis import given, settings, strategies as st

from opsem.syntax import ParseError
from opsem.terms import (App, Var, apply_subst, match, parse_term, unify, unify_terms,
                         variant)

P = parse_term


def test_unify_worked_example():
    s = unify([(P("f(x)"), P("f(f(z))")), (P("g(a, y)"), P("g(a, x)"))])
    assert s is not None
    assert apply_subst(s, Var("x")) == P("f(z)")
    assert apply_subst(s, Var("y")) == P("f(z)")
    assert s.is_idempotent()


def test_occurs_check_and_clash():
    assert unify([(Var("x"), P("f(x)"))]) is None
    assert unify([(P("f(x)"), P("g(x)"))]) is None
    assert unify([(P("f(x, y)"), P("f(x)"))]) is None


def test_match_is_one_sided():
    assert match(P("f(x, x)"), P("f(a, a)")) == {"x": P("a")}
    assert match(P("f(x, x)"), P("f(a, b)")) is None
    assert match(P("f(a)"), P("f(x)")) is None


def test_parse_errors_carry_position():
    try:
        P("f(a,,b)")
    except ParseError as e:
        assert (e.line, e.col, e.token) == (1, 5, ",")
    else:
        raise AssertionError("no error")


def _rand_term(rng, d):
    if d <= 0 or rng.random() < 0.3:
        return Var(rng.choice("xyz")) if rng.random() < 0.6 else App(rng.choice("ab"), ())
    f, n = rng.choice([("f", 1), ("g", 2), ("h", 3)])
    return App(f, tuple(_rand_term(rng, d - 1) for _ in range(n)))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_parse_print_roundtrip(seed):
    t = _rand_term(random.Random(seed), 4)
    assert P(str(t)) == t


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_mgu_unifies_and_is_most_general(seed):
    rng = random.Random(seed)
    a, b = _rand_term(rng, 3), _rand_term(rng, 3)
    s = unify_terms(a, b)
    if s is None:
        return
    assert apply_subst(s, a) == apply_subst(s, b)
    assert s.is_idempotent()
    # any ground instance of a unifier factors through s: s is a variant of unify(a, b) itself
    s2 = unify_terms(apply_subst(s, a), apply_subst(s, b))
    assert s2 is not None and len(s2) == 0
    assert variant((apply_subst(s, a),), (apply_subst(unify_terms(b, a), b),))
