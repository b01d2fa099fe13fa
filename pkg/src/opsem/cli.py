"""Command-line front end.

Exit codes: 0 success or positive verdict, 1 negative verdict, 2 usage or
parse error, 3 budget exhausted. `--json` prints the envelope
{ok, result, steps?, diagnostics} instead of the human output.
"""
from __future__ import annotations

import argparse
import contextlib
import io
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from .syntax import ParseError

OK, NEGATIVE, USAGE, BUDGET = 0, 1, 2, 3
DEFAULT_FUEL = 10_000


class UsageError(Exception):
    pass


@dataclass
class Outcome:
    code: int = OK
    text: str = ""
    result: object = None
    steps: Optional[int] = None
    diagnostics: List[str] = field(default_factory=list)


@dataclass
class RunResult:
    code: int
    stdout: str
    stderr: str


# ------------------------------------------------------------------ helpers

def _default_fuel() -> int:
    raw = os.environ.get("OPSEM_FUEL_DEFAULT", "")
    if not raw:
        return DEFAULT_FUEL
    if not raw.strip().isdigit() or int(raw) <= 0:
        raise UsageError("OPSEM_FUEL_DEFAULT must be a positive decimal integer")
    return int(raw)


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a positive integer, got %r" % text)
    if v <= 0:
        raise argparse.ArgumentTypeError("expected a positive integer, got %r" % text)
    return v


def _source(args, name: str = "file") -> str:
    expr = getattr(args, "expr", None)
    path = getattr(args, name, None)
    if expr is not None:
        return expr
    if path is None:
        raise UsageError("no input: give a file, '-' for stdin, or -e TEXT")
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise UsageError("cannot read %s: %s" % (path, e.strerror))


def _read_file(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise UsageError("cannot read %s: %s" % (path, e.strerror))


def _fuel(args) -> int:
    return args.fuel if getattr(args, "fuel", None) is not None else _default_fuel()


def _pairs(text: str, sep: str = ",") -> Dict[str, str]:
    """`x=1, y=2` as a dict; also splits on ';'."""
    out = {}
    for item in text.replace(";", sep).split(sep):
        item = item.strip()
        if not item:
            continue
        k, eq, v = item.partition("=")
        if not eq:
            raise UsageError("expected name=value, got %r" % item)
        out[k.strip()] = v.strip()
    return out


def _ctx(text: Optional[str], parse_type) -> Dict[str, object]:
    """`x: T; y: U` as a typing context."""
    out: Dict[str, object] = {}
    for item in (text or "").split(";"):
        item = item.strip()
        if not item:
            continue
        k, colon, v = item.partition(":")
        if not colon:
            raise UsageError("expected name: type, got %r" % item)
        out[k.strip()] = parse_type(v.strip())
    return out


def _add_input(p, fuel: bool = True, name: str = "file"):
    p.add_argument(name, nargs="?", help="input file, '-' for stdin")
    p.add_argument("-e", "--expr", help="inline input text")
    if fuel:
        p.add_argument("--fuel", type=_positive, help="step budget (default OPSEM_FUEL_DEFAULT or 10000)")


# --------------------------------------------------------------------- imp

def _imp_state(text: Optional[str]):
    from .imp import State
    if not text:
        return State()
    vals = {}
    for k, v in _pairs(text).items():
        try:
            vals[k] = int(v)
        except ValueError:
            raise UsageError("initial value of %s is not an integer: %r" % (k, v))
    return State(vals)


def _state_json(s) -> Dict[str, int]:
    return {k: s[k] for k in sorted(s)}


def _imp_outcome(r, show_state=True) -> Outcome:
    from .imp import Done, FuelExhausted
    if isinstance(r, Done):
        return Outcome(OK, r.state.show(), _state_json(r.state), r.steps)
    if isinstance(r, FuelExhausted):
        return Outcome(BUDGET, "fuel exhausted after %d steps" % r.steps, None, r.steps,
                       ["fuel exhausted"])
    return Outcome(NEGATIVE, "stuck at pc %s" % r.pc, None, None, ["stuck"])


def cmd_imp(args) -> Outcome:
    from . import imp
    src = _source(args)
    if args.action == "run":
        p = imp.parse_program(src)
        s = _imp_state(args.init)
        if args.mode == "big":
            return _imp_outcome(imp.eval_big(p, s, _fuel(args)))
        if args.mode == "small":
            return _imp_outcome(imp.run_small(p, s, _fuel(args)))
        return _imp_outcome(imp.vm_run(imp.compile(p), s, _fuel(args)))
    if args.action == "step":
        p = imp.parse_program(src)
        c = (p.body, imp.HALT, _imp_state(args.init))
        lines, trace = [], []
        fuel = _fuel(args)
        steps = 0
        while True:
            st, k, s = c
            cfg = {"stmt": imp.show_stmt(st), "cont": [imp.show_stmt(x) for x in k],
                   "state": _state_json(s)}
            trace.append(cfg)
            lines.append("%d: %s | [%s] | {%s}" % (
                steps, cfg["stmt"], "; ".join(cfg["cont"]),
                ", ".join("%s=%d" % kv for kv in cfg["state"].items())))
            nxt = imp.step_small(c)
            if nxt is None:
                return Outcome(OK, "\n".join(lines), trace, steps)
            if steps >= fuel:
                return Outcome(BUDGET, "\n".join(lines), trace, steps, ["fuel exhausted"])
            c = nxt
            steps += 1
    if args.action == "compile":
        code = imp.compile(imp.parse_program(src))
        text = imp.show_code(code)
        return Outcome(OK, text, text.splitlines())
    if args.action in ("vm", "wf"):
        code = imp.compile(imp.parse_program(src)) if args.imp else imp.parse_code(src)
        if args.action == "vm":
            return _imp_outcome(imp.vm_run(code, _imp_state(args.init), _fuel(args)))
        h = imp.check_stack_wf(code)
        if h is None:
            return Outcome(NEGATIVE, "not well formed", None, None, ["stack discipline violated"])
        return Outcome(OK, "well formed: heights %s" % " ".join(map(str, h)), h)
    if args.action == "wp":
        if not args.post:
            raise UsageError("wp needs --post ASSERTION")
        post = imp.parse_assertion(args.post)
        try:
            pre = imp.wp(imp.parse_program(src), post)
        except ValueError as e:
            raise UsageError(str(e))
        text = imp.show_assert(pre)
        return Outcome(OK, text, text)
    raise UsageError("unknown imp action")


# --------------------------------------------------------------------- trs

def _rpo_params(args):
    from .rewriting import RpoParams, parse_precedence, parse_status
    prec = parse_precedence(args.prec) if args.prec else []
    status = parse_status(args.status) if args.status else {}
    try:
        return RpoParams(prec, status)
    except ValueError as e:
        raise UsageError(str(e))


def _pair_text(cp) -> str:
    return "%s = %s" % (cp.left, cp.right)


def cmd_trs(args) -> Outcome:
    from . import rewriting as rw
    f = rw.parse_trs(_source(args))
    try:
        trs = f.trs
    except ValueError as e:
        raise ParseError(str(e), 1, 1, "")
    a = args.action
    if a in ("rewrite", "normalize"):
        if not args.term:
            raise UsageError("%s needs --term TERM" % a)
        t = rw.parse_term_in(args.term, trs.signature)
        if a == "rewrite":
            outs = sorted(str(u) for u in rw.rewrite_all(trs, t))
            return Outcome(OK if outs else NEGATIVE, "\n".join(outs) if outs else "normal form",
                           outs, 1 if outs else 0)
        r = rw.normalize(trs, t, args.strategy, _fuel(args))
        if isinstance(r, rw.FuelExhausted):
            return Outcome(BUDGET, str(r.term), str(r.term), r.steps, ["fuel exhausted"])
        return Outcome(OK, str(r.term), str(r.term), r.steps)
    if a == "rpo":
        p = _rpo_params(args)
        rows, bad = [], 0
        for rule in trs:
            ok = rw.rpo_greater(p, rule.lhs, rule.rhs)
            bad += not ok
            rows.append({"rule": str(rule), "oriented": ok})
        text = "\n".join("%s  %s" % (r["rule"], "oriented" if r["oriented"] else "NOT oriented")
                         for r in rows)
        return Outcome(NEGATIVE if bad else OK, text, rows)
    if a == "poly":
        if not args.interp:
            raise UsageError("poly needs --interp 'f=expr; ...'")
        polys = {}
        for sym, expr in _pairs(args.interp).items():
            if sym not in trs.signature:
                raise UsageError("unknown symbol %s in interpretation" % sym)
            polys[sym] = (trs.signature[sym], expr)
        try:
            interp = rw.PolyInterp(polys, args.domain)
            r = rw.poly_certifies(interp, trs)
        except ValueError as e:
            raise UsageError(str(e))
        if isinstance(r, rw.Certified):
            return Outcome(OK, "certified: terminating", "certified")
        return Outcome(NEGATIVE, "unknown: no strict decrease for %s" % r.rule,
                       {"unknown": str(r.rule)})
    if a == "pairs":
        cps = rw.critical_pairs(trs)
        items = [{"peak": str(c.peak), "left": str(c.left), "right": str(c.right)} for c in cps]
        text = "\n".join("%s   <- %s" % (_pair_text(c), c.peak) for c in cps)
        return Outcome(OK, text, items)
    if a == "confluence":
        r = rw.check_local_confluence(trs, _fuel(args) if args.fuel else 100)
        if isinstance(r, rw.LocallyConfluent):
            return Outcome(OK, "locally confluent", "locally-confluent")
        kind = "not joinable" if isinstance(r, rw.NotJoinable) else "inconclusive"
        code = NEGATIVE if isinstance(r, rw.NotJoinable) else BUDGET
        return Outcome(code, "%s: %s" % (kind, _pair_text(r.pair)),
                       {"verdict": kind, "pair": _pair_text(r.pair)}, None, [kind])
    if a == "complete":
        p = _rpo_params(args)
        budget = rw.Budget(max_rules=args.budget, fuel=_fuel(args))
        try:
            r = rw.complete(trs, p, budget, f.equations)
        except ValueError as e:
            return Outcome(NEGATIVE, "FailedToOrient: %s" % e, {"verdict": "FailedToOrient"},
                           None, [str(e)])
        if isinstance(r, rw.Completed):
            text = rw.show_rules(r.trs)
            return Outcome(OK, text, [str(x) for x in r.trs])
        if isinstance(r, rw.FailedToOrient):
            msg = "FailedToOrient: %s" % _pair_text(r.pair)
            return Outcome(NEGATIVE, msg, {"verdict": "FailedToOrient", "pair": _pair_text(r.pair)},
                           None, [msg])
        return Outcome(BUDGET, "BudgetExceeded: %s" % r.reason, {"verdict": "BudgetExceeded"},
                       None, ["budget exceeded: %s" % r.reason])
    raise UsageError("unknown trs action")


# ------------------------------------------------------------------ lambda

def cmd_lam(args) -> Outcome:
    from . import lam
    a = args.action
    if a == "church":
        if args.n is not None:
            text = lam.show(lam.church(args.n))
            return Outcome(OK, text, text)
        k = lam.church_decode(lam.parse(_source(args)), _fuel(args))
        if k is None:
            return Outcome(NEGATIVE, "not a Church numeral", None, None, ["not a numeral"])
        return Outcome(OK, str(k), k)
    t = lam.parse(_source(args))
    try:
        if a == "eval":
            r = lam.eval_big(t, args.strategy, _fuel(args))
        elif a == "normalize":
            r = lam.normalize_no(t, _fuel(args))
        else:
            r = lam.machine_run(t, args.strategy, _fuel(args))
    except ValueError as e:
        raise UsageError(str(e))
    if isinstance(r, lam.FuelExhausted):
        return Outcome(BUDGET, "fuel exhausted after %d steps" % r.steps, None, r.steps,
                       ["fuel exhausted"])
    text = lam.show(r.term)
    return Outcome(OK, text, text, r.steps)


def cmd_lamc(args) -> Outcome:
    from . import transform as T
    m = T.parse(_source(args))
    try:
        stages = T.pipeline(m)
    except ValueError as e:
        raise UsageError(str(e))
    emit = [args.emit] if args.emit != "all" else ["cps", "vn", "cc", "hoist"]
    render = T.show if args.pretty else T.to_sexpr
    out = {k: render(stages[k]) for k in emit}
    if len(emit) == 1:
        return Outcome(OK, out[emit[0]], out)
    return Outcome(OK, "\n".join("%s: %s" % (k, out[k]) for k in emit), out)


# ------------------------------------------------------------------- types

def _ir_term(src: str):
    from . import transform as T
    body = src.strip()
    if body.startswith("("):
        head = body[1:].lstrip().split(None, 1)[0] if body[1:].strip() else ""
        head = head.rstrip("()")
        if head in ("lam", "tuple", "app", "let", "proj", "pack", "unpack"):
            return T.from_sexpr(src)
    return T.parse(src)


def cmd_types(args) -> Outcome:
    a = args.action
    src = _source(args)
    if a == "infer":
        from . import lam
        from .typesys import simple
        m = lam.parse(src)
        r = simple.infer_simple(m) if args.system == "simple" else simple.infer_ml(m)
        if r is None:
            return Outcome(NEGATIVE, "not typable", None, None, ["not typable"])
        ctx, ty = simple.canonical_typing(*r)
        text = simple.show_type(ty)
        if ctx:
            text = "%s |- %s" % (", ".join("%s : %s" % (k, simple.show_type(v))
                                          for k, v in sorted(ctx.items())), text)
        return Outcome(OK, text, text)
    if a == "check-f":
        from .typesys import systemf as F
        ty = F.check_f(_ctx(args.ctx, F.parse_ftype), F.parse_fterm(src))
        if ty is None:
            return Outcome(NEGATIVE, "ill-typed", None, None, ["ill-typed"])
        return Outcome(OK, F.show_ftype(ty), F.show_ftype(ty))
    if a == "sub":
        from .typesys import subtype as S
        ty = S.check_sub(_ctx(args.ctx, S.parse_rtype), S.parse_rterm(src))
        if ty is None:
            return Outcome(NEGATIVE, "ill-typed", None, None, ["ill-typed"])
        return Outcome(OK, S.show_rtype(ty), S.show_rtype(ty))
    if a == "check-ir":
        from .typesys import ir
        t = _ir_term(src)
        ok = ir.check_ir(args.stage, _ctx(args.ctx, ir.parse_irtype), t)
        return Outcome(OK if ok else NEGATIVE, "well typed" if ok else "ill-typed", ok)
    raise UsageError("unknown types action")


# --------------------------------------------------------------------- ccs

def _ccs_source(args) -> str:
    # a lone --proc needs no definitions file
    if args.proc is not None and args.expr is None and args.file is None:
        return ""
    return _source(args)


def _ccs_lts(src: str, proc: Optional[str], limit: int):
    from .lts import ccs
    defs, main = ccs.parse_program(src)
    if proc is not None:
        main = ccs.parse_proc(proc)
    if main is None:
        raise UsageError("no main process: add one to the file or pass --proc")
    try:
        ccs.check_defined(main, defs)
    except KeyError as e:
        raise UsageError(e.args[0])
    return ccs.ccs_to_lts(main, defs, limit)


def _defs(args):
    from .lts import ccs
    if args.defs:
        defs, _ = ccs.parse_program(_read_file(args.defs))
        return defs
    return ccs.Defs()


def cmd_ccs(args) -> Outcome:
    from .lts import StateLimitExceeded, ccs
    from .lts import bisim as B
    a = args.action
    try:
        if a == "lts":
            l = _ccs_lts(_ccs_source(args), args.proc, args.limit)
            if args.format == "json":
                return Outcome(OK, l.to_json(), l.to_dict())
            if args.format == "dot":
                return Outcome(OK, l.to_dot(), l.to_dict())
            lines = ["%d states, %d transitions, root %d" % (l.n, len(l.src), l.root)]
            lines += ["  %d: %s" % (i, lab) for i, lab in enumerate(l.labels)]
            lines += ["  %d -%s-> %d" % t for t in l.transitions()]
            return Outcome(OK, "\n".join(lines), l.to_dict())
        defs = _defs(args)
        procs = [ccs.parse_proc(x) for x in args.procs]
        for p in procs:
            try:
                ccs.check_defined(p, defs)
            except KeyError as e:
                raise UsageError(e.args[0])
        ls = [ccs.ccs_to_lts(p, defs, args.limit) for p in procs]
    except StateLimitExceeded as e:
        return Outcome(BUDGET, "state limit exceeded: %s" % e, None, None, [str(e)])
    if a in ("bisim", "weak-bisim"):
        if len(ls) != 2:
            raise UsageError("%s needs two processes" % a)
        u, off = ls[0].union(ls[1])
        part = B.strong_bisim(u) if a == "bisim" else B.weak_bisim(u)
        same = part.same(ls[0].root, ls[1].root + off)
        word = "bisimilar" if a == "bisim" else "weakly bisimilar"
        return Outcome(OK if same else NEGATIVE, word if same else "not " + word, same)
    if a == "traces":
        weak = not args.strong
        sets = [B.traces_upto(l, l.root, args.maxlen, weak) for l in ls]
        shown = [sorted(B.show_trace(w) for w in s) for s in sets]
        if len(ls) == 1:
            return Outcome(OK, "\n".join(shown[0]), shown[0])
        same = all(s == sets[0] for s in sets)
        return Outcome(OK if same else NEGATIVE, "trace equivalent" if same else "traces differ",
                       {"equal": same, "traces": shown})
    raise UsageError("unknown ccs action")


# ---------------------------------------------------------------------- mc

def _load_lts(args):
    from .lts import Lts
    src = _ccs_source(args)
    path = args.file or ""
    if path.endswith(".json") or src.lstrip().startswith("{"):
        try:
            return Lts.from_json(src)
        except (ValueError, KeyError, IndexError, TypeError) as e:
            raise UsageError("bad LTS json: %s" % e)
    return _ccs_lts(src, args.proc, args.limit)


def _state(l, text: Optional[str]) -> int:
    if text is None:
        return l.root
    try:
        return l.index_of(text)
    except KeyError:
        if text.isdigit() and int(text) < l.n:
            return int(text)
        raise UsageError("unknown state %r" % text)


def cmd_mc(args) -> Outcome:
    from .lts import StateLimitExceeded, mu
    try:
        l = _load_lts(args)
    except StateLimitExceeded as e:
        return Outcome(BUDGET, "state limit exceeded: %s" % e, None, None, [str(e)])
    s = _state(l, args.state)
    if args.action == "charform":
        f = mu.char_formula(l, s)
        text = mu.show(f)
        return Outcome(OK, text, text)
    if args.formula is None and args.formula_file is None:
        raise UsageError("check needs --formula TEXT or --formula-file PATH")
    ftext = args.formula if args.formula is not None else _read_file(args.formula_file)
    f = mu.parse_formula(ftext)
    try:
        holds = s in mu.mc_naive(l, f) if args.naive else mu.mc_check(l, s, f)
    except (mu.UnboundVariable, ValueError) as e:
        raise UsageError(str(e))
    return Outcome(OK if holds else NEGATIVE, "holds" if holds else "does not hold", holds)


# ------------------------------------------------------------------ parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError("%s: %s" % (self.prog, message))


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="opsem", description="Operational semantics workbench.")
    top.add_argument("--json", action="store_true", help="print the JSON envelope")
    sub = top.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def group(name, help_, handler):
        g = sub.add_parser(name, help=help_)
        g.set_defaults(handler=handler)
        gs = g.add_subparsers(dest="action", required=True, parser_class=_Parser)
        return gs

    # imp
    gs = group("imp", "IMP programs and the stack machine", cmd_imp)
    p = gs.add_parser("run", help="run a program")
    _add_input(p)
    p.add_argument("--mode", choices=["big", "small", "vm"], default="big")
    p.add_argument("--init", help="initial store, e.g. 'x=3, y=4'")
    p = gs.add_parser("step", help="print the small-step trace")
    _add_input(p)
    p.add_argument("--init")
    p = gs.add_parser("compile", help="compile to VM code")
    _add_input(p, fuel=False)
    for name in ("vm", "wf"):
        p = gs.add_parser(name, help="run VM code" if name == "vm" else "check the stack discipline")
        _add_input(p, fuel=name == "vm")
        p.add_argument("--imp", action="store_true", help="input is an IMP program to compile first")
        if name == "vm":
            p.add_argument("--init")
    p = gs.add_parser("wp", help="weakest precondition of a loop-free program")
    _add_input(p, fuel=False)
    p.add_argument("--post", help="postcondition")

    # trs
    gs = group("trs", "first-order term rewriting", cmd_trs)
    for name in ("rewrite", "normalize", "rpo", "poly", "pairs", "confluence", "complete"):
        p = gs.add_parser(name)
        _add_input(p)
        if name in ("rewrite", "normalize"):
            p.add_argument("--term", help="term to rewrite")
        if name == "normalize":
            p.add_argument("--strategy", choices=["innermost", "outermost"], default="innermost")
        if name in ("rpo", "complete"):
            p.add_argument("--prec", help="precedence, high to low: 'i>*>e'")
            p.add_argument("--status", help="statuses: 'f=lr, g=rl, h=mul'")
        if name == "poly":
            p.add_argument("--interp", help="'z=1; s=x+2; plus=x+2*y'")
            p.add_argument("--domain", type=_positive, default=1, help="domain lower bound")
        if name == "complete":
            p.add_argument("--budget", type=_positive, default=100, help="maximum number of rules")

    # lambda
    gs = group("lam", "untyped lambda-calculus", cmd_lam)
    for name in ("eval", "normalize", "machine"):
        p = gs.add_parser(name)
        _add_input(p)
        if name != "normalize":
            p.add_argument("--strategy", choices=["cbn", "cbv"], default="cbn")
    p = gs.add_parser("church", help="print numeral N, or decode the input term")
    _add_input(p)
    p.add_argument("-n", type=int, dest="n", help="numeral to print")

    p = sub.add_parser("lamc", help="compile a polyadic term through CPS, VN, CC and hoisting")
    p.set_defaults(handler=cmd_lamc)
    _add_input(p, fuel=False)
    p.add_argument("--emit", choices=["cps", "vn", "cc", "hoist", "all"], default="all")
    p.add_argument("--pretty", action="store_true", help="infix notation instead of s-expressions")

    # types
    gs = group("types", "type inference and checking", cmd_types)
    p = gs.add_parser("infer")
    _add_input(p, fuel=False)
    p.add_argument("--system", choices=["simple", "ml"], default="simple")
    for name in ("check-f", "sub", "check-ir"):
        p = gs.add_parser(name)
        _add_input(p, fuel=False)
        p.add_argument("--ctx", help="context 'x: T; y: U'")
        if name == "check-ir":
            p.add_argument("--stage", choices=["cps", "vn", "cc", "hoist"], default="cps")

    # ccs
    gs = group("ccs", "CCS processes and equivalences", cmd_ccs)
    p = gs.add_parser("lts", help="build the transition system")
    _add_input(p, fuel=False)
    p.add_argument("--proc", help="main process (overrides the file)")
    p.add_argument("--limit", type=_positive, default=10_000)
    p.add_argument("--format", choices=["text", "json", "dot"], default="text")
    for name in ("bisim", "weak-bisim", "traces"):
        p = gs.add_parser(name)
        p.add_argument("procs", nargs="+", help="process expressions")
        p.add_argument("--defs", help="file with definitions")
        p.add_argument("--limit", type=_positive, default=10_000)
        if name == "traces":
            p.add_argument("--maxlen", type=int, default=4)
            p.add_argument("--strong", action="store_true", help="keep tau in traces")

    # mc
    gs = group("mc", "modal mu-calculus", cmd_mc)
    for name in ("check", "charform"):
        p = gs.add_parser(name)
        _add_input(p, fuel=False)
        p.add_argument("--proc", help="main process when the input is CCS")
        p.add_argument("--limit", type=_positive, default=10_000)
        p.add_argument("--state", help="state label or index (default: root)")
        if name == "check":
            p.add_argument("--formula", "-f", help="formula text")
            p.add_argument("--formula-file", help="file holding the formula")
            p.add_argument("--naive", action="store_true", help="use the fixpoint-iteration checker")
    return top


# -------------------------------------------------------------------- main

def _envelope(o: Outcome) -> str:
    env = {"ok": o.code == OK, "result": o.result, "diagnostics": o.diagnostics}
    if o.steps is not None:
        env["steps"] = o.steps
    return json.dumps(env, sort_keys=True)


def run(argv: Sequence[str]) -> RunResult:
    """Run one invocation and capture its exit code and output."""
    argv = list(argv)
    want_json = "--json" in argv
    argv = [a for a in argv if a != "--json"]
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        try:
            args = build_parser().parse_args(argv)
            o = args.handler(args)
        except SystemExit as e:  # --help
            return RunResult(int(e.code or 0), out.getvalue(), err.getvalue())
        except (UsageError, ParseError) as e:
            o = Outcome(USAGE, "", None, None, [str(e)])
        except RecursionError:
            o = Outcome(BUDGET, "", None, None, ["recursion depth exceeded"])
    if want_json:
        out.write(_envelope(o) + "\n")
    else:
        if o.text:
            out.write(o.text + "\n")
        if o.code == USAGE:
            err.write("error: %s\n" % o.diagnostics[0])
    return RunResult(o.code, out.getvalue(), err.getvalue())


def main(argv: Optional[Sequence[str]] = None) -> int:
    r = run(sys.argv[1:] if argv is None else argv)
    sys.stdout.write(r.stdout)
    sys.stderr.write(r.stderr)
    return r.code


if __name__ == "__main__":
    sys.exit(main())
