import json
import os
import subprocess
import sys

import pytest

from opsem.cli import run
from opsem.lam import alpha_eq, parse

GROUP = "sig: e/0, i/1, */2\n*(e,x) -> x\n*(i(x),x) -> e\n*(*(x,y),z) -> *(x,*(y,z))\n"


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return str(p)
    return write


def test_imp_run_example(files):
    r = run(["imp", "run", files("prog.imp", "x:=1;x:=x+1\n"), "--fuel", "10000"])
    assert (r.code, r.stdout) == (0, "x = 2\n")


def test_types_infer_example(files):
    r = run(["types", "infer", "--system", "simple", files("id.lam", "\\f x. f (f x)\n")])
    assert (r.code, r.stdout) == (0, "(t0 -> t0) -> t0 -> t0\n")


def test_trs_complete_fails_to_orient(files):
    r = run(["trs", "complete", files("c.trs", "sig: f/2\nf(x,y) = f(y,x)\n"),
             "--prec", "i>*>e", "--budget", "200"])
    assert r.code == 1 and r.stdout.startswith("FailedToOrient")


def test_trs_complete_groups(files):
    r = run(["trs", "complete", files("g.trs", GROUP), "--prec", "i>*>e", "--budget", "200"])
    assert r.code == 0
    assert "i(i(v0)) -> v0" in r.stdout.splitlines()
    assert run(["trs", "complete", files("g.trs", GROUP), "--prec", "i>*>e",
                "--budget", "4"]).code == 3


def test_json_envelope(files):
    r = run(["--json", "imp", "run", "-e", "x := 3"])
    env = json.loads(r.stdout)
    assert env == {"ok": True, "result": {"x": 3}, "steps": env["steps"], "diagnostics": []}
    r = run(["imp", "run", "-e", "x := ", "--json"])
    env = json.loads(r.stdout)
    assert r.code == 2 and env["ok"] is False and env["diagnostics"]


def test_parse_error_reports_position():
    r = run(["imp", "run", "-e", "x := 1;\ny := (2"])
    assert r.code == 2
    assert "2:8" in r.stderr and "'<eof>'" in r.stderr


def test_usage_errors():
    assert run([]).code == 2
    assert run(["imp", "frob"]).code == 2
    assert run(["imp", "run", "-e", "x := 1", "--fuel", "0"]).code == 2
    assert run(["imp", "run", "/no/such/file"]).code == 2


def test_fuel_default_from_environment(monkeypatch):
    monkeypatch.setenv("OPSEM_FUEL_DEFAULT", "5")
    assert run(["imp", "run", "-e", "while 0 < 1 do skip"]).code == 3
    monkeypatch.setenv("OPSEM_FUEL_DEFAULT", "five")
    assert run(["imp", "run", "-e", "skip"]).code == 2


def test_imp_other_actions(files):
    p = files("p.imp", "while 0 < 1 do skip")
    assert run(["imp", "compile", p]).stdout == "cnst(0)\ncnst(1)\nbge(1)\nbranch(-4)\nhalt\n"
    assert run(["imp", "wf", "--imp", p]).code == 0
    code = files("bad.vm", "add\nhalt\n")
    assert run(["imp", "wf", code]).code == 1
    assert run(["imp", "vm", "-e", "cnst(2)\nsetvar(y)\nhalt"]).stdout == "y = 2\n"
    assert run(["imp", "wp", "-e", "x := x + 1", "--post", "x < 3"]).stdout == "x + 1 < 3\n"
    assert run(["imp", "wp", "-e", "while 0 < x do skip", "--post", "true"]).code == 2
    assert run(["imp", "step", "-e", "x := 1"]).stdout.splitlines()[-1] == "1: skip | [] | {x=1}"
    assert run(["imp", "run", "--mode", "small", "--init", "x=4", "-e", "y := x + x"]).stdout == \
        "x = 4\ny = 8\n"


def test_trs_other_actions(files):
    am = files("am.trs", "sig: z/0, s/1, a/2\na(z, y) -> y\na(s(x), y) -> s(a(x, y))\n")
    assert run(["trs", "normalize", am, "--term", "a(s(z), s(z))"]).stdout == "s(s(z))\n"
    assert run(["trs", "rewrite", am, "--term", "a(z, z)"]).stdout == "z\n"
    assert run(["trs", "rewrite", am, "--term", "z"]).code == 1
    assert run(["trs", "poly", am, "--interp", "z=1; s=x+1; a=2*x+y"]).code == 0
    assert run(["trs", "poly", am, "--interp", "z=1; s=x+1; a=x+y"]).code == 1
    assert run(["trs", "rpo", am, "--prec", "a>s"]).code == 0
    assert run(["trs", "rpo", am, "--prec", "s>a"]).code == 1
    assert run(["trs", "confluence", am]).code == 0
    ff = files("ff.trs", "sig: f/1, g/1\nf(f(x)) -> g(x)\n")
    assert run(["trs", "confluence", ff]).code == 1
    assert len(run(["trs", "pairs", ff]).stdout.splitlines()) == 1


def test_lam_actions():
    assert run(["lam", "eval", "-e", "(\\x.x) (\\y.y)"]).stdout == "\\y. y\n"
    assert run(["lam", "normalize", "-e", "(\\x. x x) (\\x. x x)", "--fuel", "30"]).code == 3
    out = run(["lam", "machine", "--strategy", "cbv", "-e", "(\\x.x) (\\y.y)"]).stdout
    assert alpha_eq(parse(out), parse("\\y. y"))
    assert run(["lam", "church", "-n", "2"]).stdout == "\\f x. f (f x)\n"
    assert run(["lam", "church", "-e", "\\f x. f (f (f x))"]).stdout == "3\n"
    assert run(["lam", "eval", "-e", "λx. x"]).stdout == "\\x. x\n"
    assert run(["lam", "eval", "-e", "x"]).code == 2


def test_lamc_emits_parsable_stages():
    from opsem import transform as T
    from opsem.typesys import ir
    r = run(["lamc", "--emit", "cps", "-e", "@(\\x. x, ())"])
    t = T.from_sexpr(r.stdout)
    assert T.is_cps(t)
    r = run(["lamc", "-e", "\\x. y"])
    stages = dict(line.split(": ", 1) for line in r.stdout.splitlines())
    assert list(stages) == ["cps", "vn", "cc", "hoist"]
    assert stages["cc"] == stages["hoist"]
    ctx = "y: t1; halt: ~(exists t. *((t, t2, exists t. *((t, t1) -> R, t)) -> R, t))"
    assert run(["types", "check-ir", "--stage", "hoist", "--ctx", ctx, "-e", stages["hoist"]]).code == 0
    assert run(["types", "check-ir", "--stage", "hoist", "--ctx", "y: t1; halt: ~(t1)",
                "-e", stages["hoist"]]).code == 1


def test_types_actions():
    assert run(["types", "infer", "-e", "\\x. x x"]).code == 1
    assert run(["types", "infer", "--system", "ml", "-e", "let i = \\x.x in i i"]).stdout == "t0 -> t0\n"
    assert run(["types", "check-f", "-e", "/\\a. \\x:a. x"]).stdout == "forall a. a -> a\n"
    assert run(["types", "check-f", "-e", "\\x:a. x x"]).code == 1
    assert run(["types", "sub", "--ctx", "r: {a:A, b:B}", "-e", "r.a"]).stdout == "A\n"
    r = run(["types", "check-ir", "--stage", "cps", "--ctx", "y: t1; halt: ~((t2, ~(t1)) -> R)",
             "-e", "@(halt, \\x,k. @(k, y))"])
    assert r.code == 0
    r = run(["types", "check-ir", "--stage", "cps", "--ctx", "y: t1; halt: ~(t1)",
             "-e", "@(halt, \\x,k. @(k, y))"])
    assert r.code == 1


def test_ccs_actions(files):
    assert run(["ccs", "bisim", "a.(b.0 + c.0)", "a.b.0 + a.c.0"]).code == 1
    assert run(["ccs", "traces", "a.(b.0 + c.0)", "a.b.0 + a.c.0"]).code == 0
    assert run(["ccs", "weak-bisim", "tau.a.0", "a.0"]).code == 0
    assert run(["ccs", "weak-bisim", "tau.a.0 + b.0", "a.0 + b.0"]).code == 1
    assert run(["ccs", "bisim", "τ.a.0", "tau.a.0"]).code == 0
    d = files("buf.ccs", "B(i, o) = i.'o.B(i, o)\n")
    assert run(["ccs", "bisim", "--defs", d, "B(a, b)", "a.'b.B(a, b)"]).code == 0
    r = run(["ccs", "lts", "--format", "json", "-e", "a.0 | 'a.0"])
    data = json.loads(r.stdout)
    assert len(data["states"]) == 4 and sorted(data) == ["actions", "root", "states", "transitions"]
    assert run(["ccs", "lts", "--limit", "3", "-e", "C(a) = a.(C(a) | C(a))\nC(a)"]).code == 3
    assert run(["ccs", "lts", "-e", "A(a) = a.0"]).code == 2
    assert run(["ccs", "bisim", "Undefined"]).code == 2


def test_mc_actions(files):
    assert run(["mc", "check", "-e", "a.b.0", "--formula", "<a><b>true"]).code == 0
    assert run(["mc", "check", "-e", "a.b.0", "--formula", "<b>true", "--naive"]).code == 1
    assert run(["mc", "check", "-e", "a.0", "--formula", "<a>x"]).code == 2
    assert run(["mc", "check", "--proc", "a.b.0", "--formula", "<a><b>true"]).code == 0
    assert run(["mc", "check", "--formula", "true"]).code == 2
    lts = files("two.json", json.dumps({"states": ["1", "2"], "actions": ["a", "b"], "root": 0,
                                          "transitions": [[0, "a", 1], [0, "b", 0], [1, "b", 0], [1, "b", 1]]}))
    cf = run(["mc", "charform", lts]).stdout.strip()
    assert cf.startswith("nu x0.")
    assert run(["mc", "check", lts, "--formula", cf]).code == 0
    assert run(["mc", "check", lts, "--state", "2", "--formula", cf]).code == 1
    fm = files("f.mu", "nu x. <b>x")
    assert run(["mc", "check", lts, "--formula-file", fm, "--state", "2"]).code == 0


def test_output_is_deterministic(files):
    g = files("g.trs", GROUP)
    argvs = [["trs", "complete", g, "--prec", "i>*>e", "--budget", "200"],
             ["lamc", "-e", "@(\\x. @(x, @(x, x)), \\x. x)"],
             ["ccs", "lts", "--format", "dot", "-e", "a.0 | 'a.0 | b.0"]]
    for argv in argvs:
        assert run(argv).stdout == run(argv).stdout


def test_console_script_and_stdin():
    env = dict(os.environ)
    p = subprocess.run([sys.executable, "-m", "opsem.cli", "imp", "run", "-"], input="x := 7",
                       capture_output=True, text=True, env=env)
    assert (p.returncode, p.stdout) == (0, "x = 7\n")


def test_numpy_fallback_selected_by_env():
    env = dict(os.environ, OPSEM_NO_JIT="1")
    p = subprocess.run([sys.executable, "-c", "from opsem.lts import BACKEND; print(BACKEND)"],
                       capture_output=True, text=True, env=env)
    assert p.stdout.strip() == "numpy"
