import random

import pytest
from hypothesis import given, settings, strategies as st

from generators import imp_program
from opsem import imp
from opsem.syntax import ParseError


def test_running_programs():
    p = imp.parse_program("x := 1; x := x + 1")
    assert imp.eval_big(p).state == {"x": 2}
    assert imp.run_small(p).state == {"x": 2}
    assert imp.vm_run(imp.compile(p)).state == {"x": 2}
    q = imp.parse_program("i := 5; s := 0; while 0 < i do (s := s + i; i := i + -1)")
    assert imp.eval_big(q).state == {"i": 0, "s": 15}


def test_divergence_uses_fuel():
    p = imp.parse_program("while 0 < 1 do skip")
    assert isinstance(imp.eval_big(p, fuel=100), imp.FuelExhausted)
    assert isinstance(imp.run_small(p, fuel=100), imp.FuelExhausted)
    assert isinstance(imp.vm_run(imp.compile(p), fuel=100), imp.FuelExhausted)


def test_state_ignores_zero_entries():
    assert imp.State({"x": 0}) == imp.State()
    assert imp.State({"x": 1}) != imp.State()
    assert imp.State()["never"] == 0


def test_vm_stuck_on_bad_jump():
    assert isinstance(imp.vm_run([imp.branch(5), imp.HALT_I]), imp.Stuck)


def test_stack_wf_rejects_bad_code():
    assert imp.check_stack_wf([imp.ADD, imp.HALT_I]) is None
    assert imp.check_stack_wf([imp.cnst(1), imp.HALT_I]) is None  # halt with a non-empty stack
    assert imp.check_stack_wf(imp.compile(imp.parse_program("x := 1"))) == [0, 1, 0, 0]


def test_parse_error_position():
    with pytest.raises(ParseError) as e:
        imp.parse_program("x := 1;\ny := ")
    assert e.value.line == 2


def test_wp_rejects_loops():
    with pytest.raises(ValueError):
        imp.wp(imp.parse_program("while x < 1 do x := 1"), imp.TrueA())


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_program_roundtrip(seed):
    p = imp_program(random.Random(seed))
    assert imp.parse_program(imp.show_stmt(p)) == p
    code = imp.compile(p)
    assert imp.parse_code(imp.show_code(code)) == code


def _loop_free(st_):
    if isinstance(st_, imp.While):
        return False
    if isinstance(st_, imp.Seq):
        return _loop_free(st_.first) and _loop_free(st_.second)
    if isinstance(st_, imp.If):
        return _loop_free(st_.then) and _loop_free(st_.other)
    return True


def _assertion(rng, d):
    def e():
        return imp.Id(rng.choice("xyz")) if rng.random() < 0.6 else imp.Num(rng.randint(-2, 4))
    r = rng.random()
    if d <= 0 or r < 0.4:
        return (imp.Lt if rng.random() < 0.5 else imp.Eq)(e(), imp.Add(e(), e()))
    if r < 0.55:
        return imp.Not(_assertion(rng, d - 1))
    return (imp.And if r < 0.8 else imp.Or)(_assertion(rng, d - 1), _assertion(rng, d - 1))


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32))
def test_wp_is_exact_on_loop_free_programs(seed):
    rng = random.Random(seed)
    p = imp_program(rng, size=3)
    if not _loop_free(p.body):
        return
    post = _assertion(rng, 2)
    pre = imp.wp(p, post)
    assert imp.parse_assertion(imp.show_assert(pre)) == pre
    for _ in range(5):
        s = imp.State({x: rng.randint(-3, 3) for x in "xyz"})
        out = imp.eval_big(p, s)
        assert imp.assert_holds(pre, s) == imp.assert_holds(post, out.state)
