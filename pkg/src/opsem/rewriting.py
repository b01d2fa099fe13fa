"""Term rewriting: reduction, termination orders, critical pairs, completion."""
from __future__ import annotations

import itertools
import sys
from collections import Counter, deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

import sympy

from .terms import (App, Signature, Subst, Var, apply_subst, at, canonical, match, n_symbols,
                    positions, rename, replace_at, size, unify_terms, variables)

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


@dataclass(frozen=True)
class Rule:
    lhs: object
    rhs: object

    def __post_init__(self):
        if isinstance(self.lhs, Var):
            raise ValueError("rule lhs is a variable: %s" % self.lhs)
        extra = set(variables(self.rhs)) - set(variables(self.lhs))
        if extra:
            raise ValueError("rhs variables %s not in lhs of %s" % (sorted(extra), self))

    def __str__(self) -> str:
        return "%s -> %s" % (self.lhs, self.rhs)


class Trs:
    """An ordered list of rules over a signature."""

    def __init__(self, rules: Iterable[Rule] = (), signature: Optional[Signature] = None):
        self.rules: List[Rule] = list(rules)
        sig = Signature.of_terms([t for r in self.rules for t in (r.lhs, r.rhs)])
        if signature is not None:
            for f, n in sig.items():
                if signature.get(f, n) != n:
                    raise ValueError("arity mismatch for %s" % f)
            sig = Signature({**signature, **sig})
        self.signature = sig
        self._index: Dict[str, List[Rule]] = {}
        for r in self.rules:
            self._index.setdefault(r.lhs.fn, []).append(r)

    def __iter__(self):
        return iter(self.rules)

    def __len__(self) -> int:
        return len(self.rules)

    def __repr__(self) -> str:
        return "Trs([%s])" % "; ".join(str(r) for r in self.rules)

    def root_step(self, t):
        """Contract t at the root with the first matching rule, or None."""
        if isinstance(t, Var):
            return None
        for r in self._index.get(t.fn, ()):
            m = match(r.lhs, t)
            if m is not None:
                return apply_subst(m, r.rhs)
        return None

    def root_reducts(self, t) -> List[object]:
        out = []
        if isinstance(t, Var):
            return out
        for r in self._index.get(t.fn, ()):
            m = match(r.lhs, t)
            if m is not None:
                out.append(apply_subst(m, r.rhs))
        return out


def rewrite_all(r: Trs, t) -> Set[object]:
    """All one-step reducts of t, at every position and with every rule."""
    out: Set[object] = set()
    for p in positions(t):
        for u in r.root_reducts(at(t, p)):
            out.add(replace_at(t, p, u))
    return out


# ------------------------------------------------------------- normalize

class Strategy(str, Enum):
    INNERMOST = "innermost"
    OUTERMOST = "outermost"


@dataclass(frozen=True)
class NormalForm:
    term: object
    steps: int = 0


@dataclass(frozen=True)
class FuelExhausted:
    term: object
    steps: int = 0


def normalize(r: Trs, t, strategy: Union[Strategy, str] = Strategy.INNERMOST, fuel: int = 10_000):
    strategy = Strategy(strategy)
    if strategy is Strategy.INNERMOST:
        return _normalize_innermost(r, t, fuel)
    steps = 0
    while True:
        red = _outermost_step(r, t)
        if red is None:
            return NormalForm(t, steps)
        if steps >= fuel:
            return FuelExhausted(t, steps)
        t = red
        steps += 1


def _outermost_step(r: Trs, t):
    u = r.root_step(t)
    if u is not None:
        return u
    if isinstance(t, App):
        for i, a in enumerate(t.args):
            v = _outermost_step(r, a)
            if v is not None:
                return App(t.fn, t.args[:i] + (v,) + t.args[i + 1:])
    return None


def _normalize_innermost(r: Trs, t, fuel: int):
    steps = 0
    stuck = False

    def go(t, known_nf_args=False):
        nonlocal steps, stuck
        while True:
            if isinstance(t, Var):
                return t
            if not known_nf_args and t.args:
                args = []
                for a in t.args:
                    args.append(a if stuck else go(a))
                t = App(t.fn, tuple(args))
            if stuck:
                return t
            u = r.root_step(t)
            if u is None:
                return t
            if steps >= fuel:
                stuck = True
                return t
            steps += 1
            t = u
            known_nf_args = False

    out = go(t)
    return FuelExhausted(out, steps) if stuck else NormalForm(out, steps)


def nf(r: Trs, t, fuel: int = 10_000):
    """Innermost normal form or raise BudgetError."""
    res = _normalize_innermost(r, t, fuel)
    if isinstance(res, FuelExhausted):
        raise BudgetError("fuel exhausted normalizing %s" % t)
    return res.term


class BudgetError(RuntimeError):
    pass


# ------------------------------------------------------------ orders

class Status(str, Enum):
    LEX_LR = "lexlr"
    LEX_RL = "lexrl"
    MULTISET = "mul"


def multiset_greater(gt: Callable[[object, object], bool], m: Sequence, n: Sequence) -> bool:
    """Multiset extension of a strict order `gt`.

    Removes the common part, then requires every element left in n to be
    dominated by some element left in m, with m's residue nonempty.
    """
    cm, cn = Counter(m), Counter(n)
    common = cm & cn
    rm = list((cm - common).elements())
    rn = list((cn - common).elements())
    if not rm:
        return False
    return all(any(gt(x, y) for x in rm) for y in rn)


def lex_greater(gt, m: Sequence, n: Sequence) -> bool:
    for a, b in zip(m, n):
        if a == b:
            continue
        return gt(a, b)
    return len(m) > len(n)


class RpoParams:
    """Precedence (a strict partial order on symbols) and per-symbol status."""

    def __init__(self, precedence: Iterable[Tuple[str, str]] = (), status: Optional[Mapping[str, Status]] = None):
        pairs = set(precedence)
        # transitive closure
        changed = True
        while changed:
            changed = False
            for (a, b), (c, d) in itertools.product(list(pairs), list(pairs)):
                if b == c and (a, d) not in pairs:
                    pairs.add((a, d))
                    changed = True
        for a, b in pairs:
            if a == b:
                raise ValueError("precedence is not irreflexive on %s" % a)
        self.pairs = frozenset(pairs)
        self.status = {k: Status(v) for k, v in (status or {}).items()}

    @classmethod
    def ranked(cls, order: Sequence[str], status: Optional[Mapping[str, Status]] = None) -> "RpoParams":
        """Total precedence listed from highest to lowest."""
        return cls([(a, b) for i, a in enumerate(order) for b in order[i + 1:]], status)

    def prec(self, f: str, g: str) -> bool:
        return (f, g) in self.pairs

    def status_of(self, f: str) -> Status:
        return self.status.get(f, Status.LEX_LR)


def rpo_greater(p: RpoParams, s, t) -> bool:
    """Recursive path order s >_rpo t."""
    if isinstance(s, Var) or s == t:
        return False
    # R1
    for si in s.args:
        if si == t or rpo_greater(p, si, t):
            return True
    if isinstance(t, Var):
        return False
    if s.fn == t.fn and len(s.args) == len(t.args):
        if not all(rpo_greater(p, s, ti) for ti in t.args):
            return False
        gt = lambda a, b: rpo_greater(p, a, b)
        st = p.status_of(s.fn)
        if st is Status.LEX_LR:
            return lex_greater(gt, s.args, t.args)
        if st is Status.LEX_RL:
            return lex_greater(gt, s.args[::-1], t.args[::-1])
        return multiset_greater(gt, s.args, t.args)
    if p.prec(s.fn, t.fn):
        return all(rpo_greater(p, s, ti) for ti in t.args)
    return False


# ---------------------------------------------- polynomial interpretations

_ARG_NAMES = ("x", "y", "z")


def arg_symbols(arity: int) -> List[sympy.Symbol]:
    if arity <= len(_ARG_NAMES):
        return [sympy.Symbol(n) for n in _ARG_NAMES[:arity]]
    return [sympy.Symbol("x%d" % (i + 1)) for i in range(arity)]


class PolyInterp:
    """Natural-coefficient polynomial per symbol over the domain x >= a."""

    def __init__(self, polys: Mapping[str, Tuple[int, object]], a: int = 1):
        if a < 1:
            raise ValueError("domain bound must be >= 1")
        self.a = a
        self.polys: Dict[str, Tuple[List[sympy.Symbol], sympy.Expr]] = {}
        for f, (arity, expr) in polys.items():
            xs = arg_symbols(arity)
            e = sympy.expand(sympy.sympify(expr, locals={str(x): x for x in xs}))
            self.polys[f] = (xs, e)
            self._validate(f, xs, e)

    def _validate(self, f, xs, e):
        stray = e.free_symbols - set(xs)
        if stray:
            raise ValueError("malformed interpretation for %s: unknown variables %s" % (f, stray))
        poly = sympy.Poly(e, *xs) if xs else None
        coeffs = poly.coeffs() if poly is not None else [e]
        for c in coeffs:
            if not (c.is_integer and c >= 0):
                raise ValueError("malformed interpretation for %s: coefficient %s" % (f, c))
        for x in xs:
            if x not in e.free_symbols:
                raise ValueError("malformed interpretation for %s: not strictly monotone in %s" % (f, x))
        if not xs and not e >= self.a:
            raise ValueError("malformed interpretation for %s: constant below %d" % (f, self.a))

    def interpret(self, t, env: Optional[Dict[str, sympy.Symbol]] = None):
        env = {} if env is None else env
        if isinstance(t, Var):
            return env.setdefault(t.name, sympy.Symbol("v_" + t.name))
        xs, e = self.polys[t.fn]
        args = [self.interpret(a, env) for a in t.args]
        return e.subs(dict(zip(xs, args)), simultaneous=True)

    def evaluate(self, t, values: Mapping[str, int]) -> int:
        if isinstance(t, Var):
            return values[t.name]
        xs, e = self.polys[t.fn]
        args = [self.evaluate(a, values) for a in t.args]
        return int(e.subs(dict(zip(xs, args)), simultaneous=True))

    def strictly_decreasing(self, rule: Rule) -> bool:
        env: Dict[str, sympy.Symbol] = {}
        diff = self.interpret(rule.lhs, env) - self.interpret(rule.rhs, env)
        shift = {v: v + self.a for v in env.values()}
        diff = sympy.expand(diff.subs(shift, simultaneous=True))
        gens = list(env.values())
        if not gens:
            return diff > 0
        poly = sympy.Poly(diff, *gens)
        const = poly.coeff_monomial(1)
        return all(c >= 0 for c in poly.coeffs()) and const > 0


@dataclass(frozen=True)
class Certified:
    pass


@dataclass(frozen=True)
class Unknown:
    rule: Rule


def poly_certifies(i: PolyInterp, r: Trs):
    missing = set(r.signature) - set(i.polys)
    if missing:
        raise ValueError("interpretation lacks symbols %s" % sorted(missing))
    for rule in r:
        if not i.strictly_decreasing(rule):
            return Unknown(rule)
    return Certified()


# ------------------------------------------------------- critical pairs

@dataclass(frozen=True)
class CriticalPair:
    peak: object
    left: object
    right: object

    def __str__(self) -> str:
        return "%s <- %s -> %s" % (self.left, self.peak, self.right)


class _Fresh:
    def __init__(self):
        self.n = 0

    def rename_rule(self, rule: Rule) -> Rule:
        m = {}
        for x in variables(rule.lhs):
            m[x] = "_r%d" % self.n
            self.n += 1
        return Rule(rename(rule.lhs, m), rename(rule.rhs, m))


def overlaps(r1: Rule, r2: Rule, fresh: _Fresh, same: bool) -> List[CriticalPair]:
    """Critical pairs from rewriting a subterm of r1.lhs with (a renamed) r2."""
    r2 = fresh.rename_rule(r2)
    out = []
    for p in positions(r1.lhs):
        if same and not p:
            continue
        sub = at(r1.lhs, p)
        if isinstance(sub, Var):
            continue
        s = unify_terms(sub, r2.lhs)
        if s is None:
            continue
        peak = apply_subst(s, r1.lhs)
        left = apply_subst(s, r1.rhs)
        right = apply_subst(s, replace_at(r1.lhs, p, r2.rhs))
        out.append(CriticalPair(peak, left, right))
    return out


def critical_pairs(r: Trs) -> List[CriticalPair]:
    fresh = _Fresh()
    out = []
    for i, r1 in enumerate(r.rules):
        for j, r2 in enumerate(r.rules):
            out.extend(overlaps(r1, r2, fresh, i == j))
    return out


# ---------------------------------------------------------- confluence

def _reach(r: Trs, t, fuel: int, cap: int = 20_000):
    """Terms reachable from t within `fuel` steps; flag says the search was exhaustive."""
    seen = {t}
    frontier = [t]
    depth = 0
    while frontier:
        if depth >= fuel or len(seen) > cap:
            return seen, False
        nxt = []
        for u in frontier:
            for v in rewrite_all(r, u):
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        frontier = nxt
        depth += 1
    return seen, True


def joinable(r: Trs, a, b, fuel: int = 100) -> bool:
    if a == b:
        return True
    na = _normalize_innermost(r, a, fuel)
    nb = _normalize_innermost(r, b, fuel)
    if na.term == nb.term:
        return True
    ra, _ = _reach(r, a, fuel)
    rb, _ = _reach(r, b, fuel)
    return not ra.isdisjoint(rb)


@dataclass(frozen=True)
class LocallyConfluent:
    pass


@dataclass(frozen=True)
class NotJoinable:
    pair: CriticalPair


@dataclass(frozen=True)
class Inconclusive:
    pair: CriticalPair


def check_local_confluence(r: Trs, fuel: int = 100):
    for cp in critical_pairs(r):
        if joinable(r, cp.left, cp.right, fuel):
            continue
        ra, done_a = _reach(r, cp.left, fuel)
        rb, done_b = _reach(r, cp.right, fuel)
        if done_a and done_b:
            nfa = {u for u in ra if not rewrite_all(r, u)}
            nfb = {u for u in rb if not rewrite_all(r, u)}
            if nfa.isdisjoint(nfb):
                return NotJoinable(cp)
        return Inconclusive(cp)
    return LocallyConfluent()


# ----------------------------------------------------------- completion

@dataclass(frozen=True)
class Completed:
    trs: Trs


@dataclass(frozen=True)
class FailedToOrient:
    pair: CriticalPair


@dataclass(frozen=True)
class BudgetExceeded:
    reason: str = ""


@dataclass
class Budget:
    max_rules: int = 100
    fuel: int = 10_000


def complete(r: Trs, p: RpoParams, budget: Optional[Budget] = None,
             equations: Iterable[Tuple[object, object]] = ()):
    """Naive Knuth-Bendix completion with inter-reduction.

    Pending equations are taken first-in first-out. An equation that
    cannot be oriented is set aside and retried once the queue holds
    nothing else; it is reported only if it still resists after a pass
    that adds no rule. Extra `equations` are queued before any critical
    pair and oriented like them.
    """
    budget = budget or Budget()
    for rule in r:
        if not rpo_greater(p, rule.lhs, rule.rhs):
            raise ValueError("initial rule not oriented by the order: %s" % rule)

    rules: List[Rule] = list(r.rules)
    added = len(rules)
    fresh = _Fresh()
    queue: deque = deque(CriticalPair(a, a, b) for a, b in equations)

    def enqueue(pairs: Iterable[CriticalPair]):
        for cp in sorted(pairs, key=lambda c: size(c.left) + size(c.right)):
            queue.append(cp)

    enqueue(cp for i, a in enumerate(rules) for j, b in enumerate(rules) for cp in overlaps(a, b, fresh, i == j))
    deferred: List[CriticalPair] = []
    mark = -1
    try:
        while True:
            if not queue:
                if not deferred:
                    break
                if added == mark:
                    return FailedToOrient(deferred[0])
                mark = added
                queue.extend(deferred)
                deferred = []
            cp = queue.popleft()
            trs = Trs(rules)
            s = nf(trs, cp.left, budget.fuel)
            t = nf(trs, cp.right, budget.fuel)
            if s == t:
                continue
            if rpo_greater(p, s, t):
                new = Rule(s, t)
            elif rpo_greater(p, t, s):
                new = Rule(t, s)
            else:
                deferred.append(CriticalPair(cp.peak, s, t))
                continue
            added += 1
            if added > budget.max_rules:
                return BudgetExceeded("more than %d rules" % budget.max_rules)
            rules, requeue = _interreduce(rules, new, budget.fuel)
            queue.extend(requeue)
            enqueue(cp for b in rules for cp in itertools.chain(
                overlaps(new, b, fresh, b is new),
                overlaps(b, new, fresh, b is new) if b is not new else ()))
    except BudgetError as e:
        return BudgetExceeded(str(e))
    return Completed(Trs([Rule(*canonical(x.lhs, x.rhs)) for x in rules]))


def _interreduce(rules: List[Rule], new: Rule, fuel: int):
    """Add `new`; rules whose lhs it reduces go back to the queue as equations."""
    one = Trs([new])
    kept: List[Rule] = []
    requeue: List[CriticalPair] = []
    for rule in rules:
        if rewrite_all(one, rule.lhs):
            requeue.append(CriticalPair(rule.lhs, rule.lhs, rule.rhs))
        else:
            kept.append(rule)
    kept.append(new)
    trs = Trs(kept)
    out = [Rule(k.lhs, nf(trs, k.rhs, fuel)) for k in kept]
    return out, requeue


def same_rules(a: Iterable[Rule], b: Iterable[Rule]) -> bool:
    """Rule sets equal up to renaming each rule's variables."""
    ka = sorted(str(canonical(x.lhs, x.rhs)) for x in a)
    kb = sorted(str(canonical(x.lhs, x.rhs)) for x in b)
    return ka == kb


# ------------------------------------------------------------- file syntax

from .syntax import ParseError  # noqa: E402
from .terms import parse_term  # noqa: E402


@dataclass
class TrsFile:
    signature: Signature
    rules: List[Rule]
    equations: List[Tuple[object, object]]

    @property
    def trs(self) -> Trs:
        return Trs(self.rules, self.signature)


def parse_trs(src: str) -> TrsFile:
    """Parse a rewriting file.

    A `sig:` line lists the function symbols as `f/n`; every other
    identifier is a variable. Each further line is a rule `l -> r` or an
    equation `l = r`; `#` starts a comment.
    """
    sig: Optional[Signature] = None
    rules: List[Rule] = []
    eqs: List[Tuple[object, object]] = []
    for lineno, raw in enumerate(src.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("sig:"):
            sig = Signature()
            for item in line[4:].replace(",", " ").split():
                name, _, ar = item.rpartition("/")
                if not name or not ar.isdigit():
                    raise ParseError("expected f/n in signature", lineno, raw.find(item) + 1, item)
                sig[name] = int(ar)
            continue
        if sig is None:
            raise ParseError("missing sig: header", lineno, 1, line.split()[0])
        if "->" in line:
            l, r = line.split("->", 1)
            kind = "->"
        elif "=" in line:
            l, r = line.split("=", 1)
            kind = "="
        else:
            raise ParseError("expected '->' or '='", lineno, 1, line)
        lt = _parse_side(l, sig, lineno, raw)
        rt = _parse_side(r, sig, lineno, raw)
        if kind == "->":
            try:
                rules.append(Rule(lt, rt))
            except ValueError as e:
                raise ParseError(str(e), lineno, 1, line)
        else:
            eqs.append((lt, rt))
    return TrsFile(sig or Signature(), rules, eqs)


def _parse_side(text: str, sig: Signature, lineno: int, raw: str):
    col = raw.find(text.strip()) + 1
    try:
        t = parse_term(text.strip(), is_var=lambda n: n not in sig)
    except ParseError as e:
        raise ParseError(e.msg, lineno, col + e.col - 1, e.token)
    if not sig.check(t):
        raise ParseError("arity mismatch", lineno, col, text.strip())
    return t


def parse_term_in(src: str, sig: Mapping[str, int]):
    return parse_term(src, is_var=lambda n: n not in sig)


def parse_precedence(src: str) -> List[Tuple[str, str]]:
    """`i > * > e, a > b` as a list of pairs (transitivity is added later)."""
    pairs = []
    for chain in src.split(","):
        syms = [x.strip() for x in chain.split(">")]
        if any(not x for x in syms):
            raise ParseError("empty symbol in precedence", 1, 1, chain)
        pairs.extend(zip(syms, syms[1:]))
    return pairs


def parse_status(src: str) -> Dict[str, Status]:
    """`ack=rl, *=mul` with statuses lr, rl or mul."""
    alias = {"lr": Status.LEX_LR, "lexlr": Status.LEX_LR, "rl": Status.LEX_RL,
             "lexrl": Status.LEX_RL, "mul": Status.MULTISET}
    out = {}
    for item in filter(None, (x.strip() for x in src.split(","))):
        f, _, st = item.partition("=")
        if st.strip() not in alias:
            raise ParseError("unknown status", 1, 1, item)
        out[f.strip()] = alias[st.strip()]
    return out


def show_rules(rules: Iterable[Rule]) -> str:
    return "\n".join(str(r) for r in rules)
