"""The IMP language, its stack-machine compiler and weakest preconditions."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

# ------------------------------------------------------------------ state


class State(Mapping):
    """Total store: identifiers not in the map read as 0."""

    __slots__ = ("_m",)

    def __init__(self, m: Optional[Mapping[str, int]] = None):
        self._m = dict(m or {})

    def __getitem__(self, x: str) -> int:
        return self._m.get(x, 0)

    def __iter__(self):
        return iter(self._m)

    def __len__(self) -> int:
        return len(self._m)

    def __contains__(self, x) -> bool:
        return True

    def set(self, x: str, v: int) -> "State":
        m = dict(self._m)
        m[x] = v
        return State(m)

    def _nonzero(self):
        return {k: v for k, v in self._m.items() if v != 0}

    def __eq__(self, other) -> bool:
        if isinstance(other, State):
            return self._nonzero() == other._nonzero()
        if isinstance(other, Mapping):
            return self._nonzero() == {k: v for k, v in other.items() if v != 0}
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._nonzero().items()))

    def __repr__(self) -> str:
        return "State(%r)" % dict(sorted(self._m.items()))

    def show(self) -> str:
        return "\n".join("%s = %d" % kv for kv in sorted(self._m.items()))


# ------------------------------------------------------------------ syntax

@dataclass(frozen=True)
class Id:
    name: str


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Add:
    left: object
    right: object


@dataclass(frozen=True)
class Less:
    left: object
    right: object


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Assign:
    var: str
    expr: object


@dataclass(frozen=True)
class Seq:
    first: object
    second: object


@dataclass(frozen=True)
class If:
    cond: Less
    then: object
    other: object


@dataclass(frozen=True)
class While:
    cond: Less
    body: object


@dataclass(frozen=True)
class Prog:
    body: object


def seq(*stmts):
    if not stmts:
        return Skip()
    out = stmts[-1]
    for s in reversed(stmts[:-1]):
        out = Seq(s, out)
    return out


def eval_expr(e, s: State) -> int:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Id):
        return s[e.name]
    return eval_expr(e.left, s) + eval_expr(e.right, s)


def eval_cond(b: Less, s: State) -> bool:
    return eval_expr(b.left, s) < eval_expr(b.right, s)


def identifiers(node) -> List[str]:
    out: Dict[str, None] = {}

    def go(n):
        if isinstance(n, Id):
            out.setdefault(n.name, None)
        elif isinstance(n, Assign):
            out.setdefault(n.var, None)
            go(n.expr)
        elif hasattr(n, "__dataclass_fields__"):
            for f in n.__dataclass_fields__:
                go(getattr(n, f))
    go(node)
    return list(out)


# ----------------------------------------------------------- big-step

@dataclass(frozen=True)
class Done:
    state: State
    steps: int = 0


@dataclass(frozen=True)
class Stuck:
    pc: Optional[int] = None


@dataclass(frozen=True)
class FuelExhausted:
    steps: int = 0


class _OutOfFuel(Exception):
    pass


def eval_big(p, s: Optional[State] = None, fuel: int = 10_000):
    """Big-step evaluation; fuel bounds the number of rule applications."""
    s = State() if s is None else s
    budget = [fuel]

    def tick():
        if budget[0] <= 0:
            raise _OutOfFuel
        budget[0] -= 1

    def run(st, s):
        tick()
        if isinstance(st, Prog):
            return run(st.body, s)
        if isinstance(st, Skip):
            return s
        if isinstance(st, Assign):
            return s.set(st.var, eval_expr(st.expr, s))
        if isinstance(st, Seq):
            return run(st.second, run(st.first, s))
        if isinstance(st, If):
            return run(st.then if eval_cond(st.cond, s) else st.other, s)
        if isinstance(st, While):
            # one while-rule per iteration, unrolled to keep the stack flat
            while eval_cond(st.cond, s):
                s = run(st.body, s)
                tick()
            return s
        raise TypeError("not a statement: %r" % (st,))

    try:
        out = run(p, s)
    except _OutOfFuel:
        return FuelExhausted(fuel)
    return Done(out, fuel - budget[0])


# ---------------------------------------------------------- small-step

HALT: Tuple = ()


def step_small(c):
    """One small step on (S, K, s) where K is a tuple of statements.

    Returns None on the terminal configuration (skip, halt, s).
    """
    st, k, s = c
    if isinstance(st, Prog):
        st = st.body
    if isinstance(st, Assign):
        return (Skip(), k, s.set(st.var, eval_expr(st.expr, s)))
    if isinstance(st, Seq):
        return (st.first, (st.second,) + k, s)
    if isinstance(st, If):
        return (st.then if eval_cond(st.cond, s) else st.other, k, s)
    if isinstance(st, While):
        if eval_cond(st.cond, s):
            return (st.body, (st,) + k, s)
        return (Skip(), k, s)
    if isinstance(st, Skip):
        if not k:
            return None
        return (k[0], k[1:], s)
    raise TypeError("not a statement: %r" % (st,))


def run_small(p, s: Optional[State] = None, fuel: int = 10_000):
    c = (p.body if isinstance(p, Prog) else p, HALT, State() if s is None else s)
    steps = 0
    while True:
        nxt = step_small(c)
        if nxt is None:
            return Done(c[2], steps)
        if steps >= fuel:
            return FuelExhausted(steps)
        c = nxt
        steps += 1


# ----------------------------------------------------------------- vm

@dataclass(frozen=True)
class Instr:
    op: str  # cnst var setvar add branch bge halt
    arg: Union[int, str, None] = None

    def __str__(self) -> str:
        return self.op if self.arg is None else "%s(%s)" % (self.op, self.arg)


def cnst(n): return Instr("cnst", n)
def var(x): return Instr("var", x)
def setvar(x): return Instr("setvar", x)
def branch(k): return Instr("branch", k)
def bge(k): return Instr("bge", k)


ADD = Instr("add")
HALT_I = Instr("halt")


def compile_expr(e) -> List[Instr]:
    if isinstance(e, Num):
        return [cnst(e.value)]
    if isinstance(e, Id):
        return [var(e.name)]
    return compile_expr(e.left) + compile_expr(e.right) + [ADD]


def compile_cond(b: Less, k: int) -> List[Instr]:
    return compile_expr(b.left) + compile_expr(b.right) + [bge(k)]


def compile_stmt(st) -> List[Instr]:
    if isinstance(st, Skip):
        return []
    if isinstance(st, Assign):
        return compile_expr(st.expr) + [setvar(st.var)]
    if isinstance(st, Seq):
        return compile_stmt(st.first) + compile_stmt(st.second)
    if isinstance(st, If):
        c1, c2 = compile_stmt(st.then), compile_stmt(st.other)
        return compile_cond(st.cond, len(c1) + 1) + c1 + [branch(len(c2))] + c2
    if isinstance(st, While):
        body = compile_stmt(st.body)
        cond = compile_cond(st.cond, len(body) + 1)
        return cond + body + [branch(-(len(cond) + len(body) + 1))]
    raise TypeError("not a statement: %r" % (st,))


def compile(p) -> List[Instr]:
    """Compile a program (or bare statement) to VM code ending in halt."""
    body = p.body if isinstance(p, Prog) else p
    return compile_stmt(body) + [HALT_I]


def vm_run(code: List[Instr], s: Optional[State] = None, fuel: int = 10_000,
           observe: Optional[Callable[[int, int], None]] = None):
    """Run VM code from (0, empty, s).

    `observe(pc, stack_height)` is called before every step, including
    the final halt. bge pops the top value v2 and then v1, and jumps
    when v1 >= v2, i.e. when the compiled comparison v1 < v2 is false.
    """
    store = dict(State() if s is None else s)
    stack: List[int] = []
    pc = 0
    n = len(code)
    steps = 0
    while True:
        if not 0 <= pc < n:
            return Stuck(pc)
        if observe is not None:
            observe(pc, len(stack))
        ins = code[pc]
        op = ins.op
        if op == "halt":
            if stack:
                return Stuck(pc)
            return Done(State(store), steps)
        if steps >= fuel:
            return FuelExhausted(steps)
        steps += 1
        if op == "cnst":
            stack.append(ins.arg)
            pc += 1
        elif op == "var":
            stack.append(store.get(ins.arg, 0))
            pc += 1
        elif op == "setvar":
            if not stack:
                return Stuck(pc)
            store[ins.arg] = stack.pop()
            pc += 1
        elif op == "add":
            if len(stack) < 2:
                return Stuck(pc)
            b = stack.pop()
            a = stack.pop()
            stack.append(a + b)
            pc += 1
        elif op == "branch":
            pc += ins.arg + 1
        elif op == "bge":
            if len(stack) < 2:
                return Stuck(pc)
            v2 = stack.pop()
            v1 = stack.pop()
            pc += ins.arg + 1 if v1 >= v2 else 1
        else:
            return Stuck(pc)


# ----------------------------------------------------- stack heights

def check_stack_wf(code: List[Instr]) -> Optional[List[int]]:
    """The unique height function h with h(0) = 0, or None.

    Every row of the well-formedness table fixes h(i+1) from h(i), so a
    single left-to-right pass determines h; jump targets and the side
    conditions are then checked against it.
    """
    n = len(code)
    h = [0] * (n + 1)
    for i, ins in enumerate(code):
        op = ins.op
        if op in ("cnst", "var"):
            h[i + 1] = h[i] + 1
        elif op == "add":
            if h[i] < 2:
                return None
            h[i + 1] = h[i] - 1
        elif op == "setvar":
            if h[i] != 1:
                return None
            h[i + 1] = 0
        elif op == "branch":
            if h[i] != 0:
                return None
            h[i + 1] = 0
        elif op == "bge":
            if h[i] != 2:
                return None
            h[i + 1] = 0
        elif op == "halt":
            if i != n - 1 or h[i] != 0:
                return None
            h[i + 1] = 0
        else:
            return None
    for i, ins in enumerate(code):
        if ins.op in ("branch", "bge"):
            j = i + ins.arg + 1
            if not 0 <= j <= n or h[j] != 0:
                return None
    return h


# ---------------------------------------------------------- assertions

@dataclass(frozen=True)
class TrueA:
    pass


@dataclass(frozen=True)
class FalseA:
    pass


@dataclass(frozen=True)
class Lt:
    left: object
    right: object


@dataclass(frozen=True)
class Eq:
    left: object
    right: object


@dataclass(frozen=True)
class Not:
    arg: object


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class Or:
    left: object
    right: object


def subst_expr(e, x: str, r):
    if isinstance(e, Id):
        return r if e.name == x else e
    if isinstance(e, Num):
        return e
    return Add(subst_expr(e.left, x, r), subst_expr(e.right, x, r))


def subst_assert(a, x: str, e):
    if isinstance(a, (TrueA, FalseA)):
        return a
    if isinstance(a, (Lt, Eq)):
        return type(a)(subst_expr(a.left, x, e), subst_expr(a.right, x, e))
    if isinstance(a, Not):
        return Not(subst_assert(a.arg, x, e))
    return type(a)(subst_assert(a.left, x, e), subst_assert(a.right, x, e))


def assert_holds(a, s: State) -> bool:
    if isinstance(a, TrueA):
        return True
    if isinstance(a, FalseA):
        return False
    if isinstance(a, Lt):
        return eval_expr(a.left, s) < eval_expr(a.right, s)
    if isinstance(a, Eq):
        return eval_expr(a.left, s) == eval_expr(a.right, s)
    if isinstance(a, Not):
        return not assert_holds(a.arg, s)
    if isinstance(a, And):
        return assert_holds(a.left, s) and assert_holds(a.right, s)
    if isinstance(a, Or):
        return assert_holds(a.left, s) or assert_holds(a.right, s)
    raise TypeError("not an assertion: %r" % (a,))


def wp(st, post):
    """Weakest precondition of a loop-free statement."""
    if isinstance(st, Prog):
        return wp(st.body, post)
    if isinstance(st, Skip):
        return post
    if isinstance(st, Assign):
        return subst_assert(post, st.var, st.expr)
    if isinstance(st, Seq):
        return wp(st.first, wp(st.second, post))
    if isinstance(st, If):
        b = Lt(st.cond.left, st.cond.right)
        return Or(And(b, wp(st.then, post)), And(Not(b), wp(st.other, post)))
    if isinstance(st, While):
        raise ValueError("wp is only defined on loop-free statements")
    raise TypeError("not a statement: %r" % (st,))


# ------------------------------------------------------------ printing

def show_expr(e) -> str:
    if isinstance(e, Num):
        return str(e.value)
    if isinstance(e, Id):
        return e.name
    r = show_expr(e.right)
    if isinstance(e.right, Add):
        r = "(%s)" % r
    return "%s + %s" % (show_expr(e.left), r)


def show_cond(b) -> str:
    return "%s < %s" % (show_expr(b.left), show_expr(b.right))


def show_stmt(st) -> str:
    if isinstance(st, Prog):
        return "prog " + show_stmt(st.body)
    if isinstance(st, Skip):
        return "skip"
    if isinstance(st, Assign):
        return "%s := %s" % (st.var, show_expr(st.expr))
    if isinstance(st, Seq):
        return "%s; %s" % (_atomic(st.first, seq_ok=False), show_stmt(st.second))
    if isinstance(st, If):
        return "if %s then %s else %s" % (show_cond(st.cond), _atomic(st.then), _atomic(st.other))
    if isinstance(st, While):
        return "while %s do %s" % (show_cond(st.cond), _atomic(st.body))
    raise TypeError(st)


def _atomic(st, seq_ok=False) -> str:
    if isinstance(st, Seq) and not seq_ok:
        return "(%s)" % show_stmt(st)
    return show_stmt(st)


def show_assert(a) -> str:
    if isinstance(a, TrueA):
        return "true"
    if isinstance(a, FalseA):
        return "false"
    if isinstance(a, Lt):
        return "%s < %s" % (show_expr(a.left), show_expr(a.right))
    if isinstance(a, Eq):
        return "%s = %s" % (show_expr(a.left), show_expr(a.right))
    if isinstance(a, Not):
        return "~%s" % _assert_atom(a.arg)
    op = " /\\ " if isinstance(a, And) else " \\/ "
    return _assert_atom(a.left) + op + _assert_atom(a.right)


def _assert_atom(a) -> str:
    if isinstance(a, (And, Or, Lt, Eq)):
        return "(%s)" % show_assert(a)
    return show_assert(a)


def show_code(code: Iterable[Instr]) -> str:
    return "\n".join(str(i) for i in code)


# ------------------------------------------------------------- parsing

from .syntax import ParseError, Lexer  # noqa: E402

_KEYWORDS = {"skip", "if", "then", "else", "while", "do", "prog", "true", "false"}


class _ImpParser:
    def __init__(self, src: str):
        self.lx = Lexer(src, symbols=[":=", "/\\", "\\/", "(", ")", ";", "+", "<", "=", "~", "-", "¬", "∧", "∨"])

    def program(self):
        lx = self.lx
        if lx.peek_is("prog"):
            lx.next()
        st = self.stmt()
        lx.expect_eof()
        return Prog(st)

    def stmt(self):
        first = self.simple()
        if self.lx.accept(";"):
            if self.lx.at_eof() or self.lx.peek_is(")"):
                return first
            return Seq(first, self.stmt())
        return first

    def simple(self):
        lx = self.lx
        tok = lx.peek()
        if tok.text == "skip":
            lx.next()
            return Skip()
        if tok.text == "(":
            lx.next()
            st = self.stmt()
            lx.expect(")")
            return st
        if tok.text == "if":
            lx.next()
            b = self.cond()
            lx.expect("then")
            s1 = self.simple()
            lx.expect("else")
            s2 = self.simple()
            return If(b, s1, s2)
        if tok.text == "while":
            lx.next()
            b = self.cond()
            lx.expect("do")
            return While(b, self.simple())
        name = lx.ident(reserved=_KEYWORDS)
        lx.expect(":=")
        return Assign(name, self.expr())

    def cond(self):
        lx = self.lx
        if lx.accept("("):
            b = self.cond()
            lx.expect(")")
            return b
        e1 = self.expr()
        lx.expect("<")
        return Less(e1, self.expr())

    def expr(self):
        e = self.atom()
        while self.lx.accept("+"):
            e = Add(e, self.atom())
        return e

    def atom(self):
        lx = self.lx
        tok = lx.peek()
        if tok.text == "(":
            lx.next()
            e = self.expr()
            lx.expect(")")
            return e
        if tok.text == "-" or tok.kind == "int":
            neg = lx.accept("-")
            n = int(lx.expect_kind("int").text)
            return Num(-n if neg else n)
        return Id(lx.ident(reserved=_KEYWORDS))

    # assertions
    def assertion(self):
        a = self.conj()
        while self.lx.accept("\\/") or self.lx.accept("∨"):
            a = Or(a, self.conj())
        return a

    def conj(self):
        a = self.neg()
        while self.lx.accept("/\\") or self.lx.accept("∧"):
            a = And(a, self.neg())
        return a

    def neg(self):
        lx = self.lx
        if lx.accept("~") or lx.accept("¬"):
            return Not(self.neg())
        if lx.accept("true"):
            return TrueA()
        if lx.accept("false"):
            return FalseA()
        if lx.peek_is("("):
            save = lx.pos
            lx.next()
            try:
                a = self.assertion()
                lx.expect(")")
                return a
            except ParseError:
                lx.pos = save
        e1 = self.expr()
        if lx.accept("<"):
            return Lt(e1, self.expr())
        lx.expect("=")
        return Eq(e1, self.expr())


def parse_program(src: str) -> Prog:
    return _ImpParser(src).program()


def parse_stmt(src: str):
    p = _ImpParser(src)
    st = p.stmt()
    p.lx.expect_eof()
    return st


def parse_assertion(src: str):
    p = _ImpParser(src)
    a = p.assertion()
    p.lx.expect_eof()
    return a


def parse_code(src: str) -> List[Instr]:
    """Parse VM code: one instruction per line or separated by spaces/commas."""
    out = []
    for m in re.finditer(r"([a-z]+)(?:\(\s*(-?\w+)\s*\))?", src):
        op, arg = m.group(1), m.group(2)
        if op in ("cnst", "branch", "bge"):
            out.append(Instr(op, int(arg)))
        elif op in ("var", "setvar"):
            out.append(Instr(op, arg))
        elif op in ("add", "halt"):
            out.append(Instr(op))
        else:
            raise ParseError("unknown instruction", 1, m.start() + 1, op)
    return out
