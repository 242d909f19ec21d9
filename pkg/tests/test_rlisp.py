import random

import pytest

from conftest import GOLDEN, PROGRAMS, echoes, outcomes
from make_golden import transcript
from oracles import eval_prefix, random_infix, shunting_yard
from pkernel import Session
from pkernel.errors import RlispError
from pkernel.rlisp import parse_translate, tokenize


def translate(src, dialect="fn-first"):
    s = Session(mode="rlisp")
    return [s.print(f) for f in parse_translate(s, src, dialect)]


@pytest.mark.parametrize("src, lisp", [
    ("a+b*c;", "(plus a (times b c))"),
    ("a-b-c;", "(difference (difference a b) c)"),
    ("2^3^2;", "(expt 2 (expt 3 2))"),
    ("a**2;", "(expt a 2)"),
    ("-x^2;", "(minus (expt x 2))"),
    ("f(a,b);", "(f a b)"),
    ("f x;", "(f x)"),
    ("df(y, x, k)/2^k/factorial k;",
     "(quotient (quotient (df y x k) (expt 2 k)) (factorial k))"),
    ("x := y := 3;", "(setq x (setq y 3))"),
    ("if a then b else c;", "(cond (a b) (t c))"),
    ("if a then b;", "(cond (a b))"),
    ("begin scalar a, b; a := 1; return a end;",
     "(prog (a b) (setq a 1) (return a))"),
    ("procedure sq(x); x*x;", "(de sq (x) (times x x))"),
    ("procedure factorial n; n;", "(de factorial (n) n)"),
    ("procedure k; 1;", "(de k nil 1)"),
    ("'(a b c);", "(quote (a b c))"),
    ("not a;", "(null a)"),
    ("a and b or c;", "(or (and a b) c)"),
    ("a neq b;", "(null (eqn a b))"),
    ("a <= b;", "(null (greaterp a b))"),
    ("a >= b;", "(null (lessp a b))"),
    ("a = b;", "(eqn a b)"),
    ('"str";', '"str"'),
    ("1.5;", "1.5"),
    ("write a, b;", "(write a b)"),
])
def test_translation(src, lisp):
    assert translate(src) == [lisp]


def test_for_loop_lowering():
    (form,) = translate("for i := 1:n product i;")
    assert form == ("(prog (i !%lim1 !%acc3) (setq i 1) (setq !%lim1 n) "
                    "(setq !%acc3 1) !%loop2 (cond ((greaterp i !%lim1) "
                    "(return !%acc3))) (setq !%acc3 (times !%acc3 i)) "
                    "(setq i (plus i 1)) (go !%loop2))")


def test_gensym_counter_restarts_per_statement():
    a, b = translate("for i := 1:2 sum i; for i := 1:2 sum i;")
    assert a == b


def test_while_lowering():
    (form,) = translate("while i < 3 do i := i + 1;")
    assert form == ("(prog nil !%loop1 (cond ((null (lessp i 3)) "
                    "(return nil))) (setq i (plus i 1)) (go !%loop1))")


@pytest.mark.parametrize("dialect, expected", [
    ("fn-first", "(mapcar (quote f) (quote (1 2)))"),
    ("list-first", "(mapcar (quote (1 2)) (quote f))"),
])
def test_dialects(dialect, expected):
    assert translate("mapcar('f, '(1 2));", dialect) == [expected]


def test_dialect_leaves_quoted_data_alone():
    (form,) = translate("'(mapcar a b);", "list-first")
    assert form == "(quote (mapcar a b))"


@pytest.mark.parametrize("src, message, line, col", [
    ("a + ;", "expected an expression, found ';'", 1, 5),
    ("f(a,;", "expected an expression, found ';'", 1, 5),
    ("x := ;", "expected an expression", 1, 6),
    ("\n  @;", "illegal character '@'", 2, 3),
    ("begin a;", "expected 'end', found end of input", 1, 9),
    ('"abc', "unterminated string", 1, 1),
    ("'(a b;", "unterminated quoted datum", 1, 7),
    ("for i := 1:3 x;", "expected", 1, 14),
])
def test_syntax_errors_have_positions(src, message, line, col):
    with pytest.raises(RlispError) as info:
        translate(src)
    text = str(info.value)
    assert message in text
    assert f"line {line}, column {col}" in text


def test_tokens():
    kinds = [(t.kind, t.text) for t in tokenize("x := 'a; % c\n2.5 ** y$")]
    assert kinds == [("id", "x"), ("op", ":="), ("quote", "a"),
                     ("punct", ";"), ("float", "2.5"), ("op", "^"),
                     ("id", "y"), ("punct", "$"), ("eof", "")]


def test_echo_rules(rlisp):
    outs = outcomes(rlisp, """
        x := 5;
        x + 1;
        x + 2$
        procedure f y; y;
        for i := 1:3 sum i;
        for i := 1:3 do i;
        if x = 5 then 1;
        begin return 9 end;
        write "w";""", "rlisp")
    assert [o.echo for o in outs] == [
        None, "6", None, None, "6", None, None, None, None]
    assert outs[-1].output == "w\n"


def test_empty_ranges(rlisp):
    assert echoes(rlisp, "for i := 1:0 product i; for i := 1:0 sum i;",
                  "rlisp") == ["1", "0"]


def test_parse_error_stops_the_text(rlisp):
    outs = outcomes(rlisp, "1 + 1; 2 + ; 3;", "rlisp")
    assert outs[0].echo == "2"
    assert "expected an expression" in outs[1].error
    assert len(outs) == 2


def test_unbound_symbols_are_algebraic(rlisp):
    assert echoes(rlisp, "(a + b)^2;", "rlisp") == ["a^2 + 2*a*b + b^2"]


def test_integer_quotient_truncates(rlisp):
    assert echoes(rlisp, "7/2; -7/2; (x + 1)/2;", "rlisp") == \
        ["3", "-3", "1/2*x + 1/2"]


PROGRAM_FILES = sorted(PROGRAMS.glob("*.red"))


@pytest.mark.parametrize("path", PROGRAM_FILES, ids=lambda p: p.stem)
@pytest.mark.parametrize("engine", ["tree", "byte"])
def test_program_transcripts(path, engine):
    expected = (GOLDEN / (path.stem + ".out")).read_text()
    assert transcript(path.read_text(), engine=engine) == expected


def test_infix_matches_shunting_yard_sample():
    rng = random.Random(5)
    s = Session(mode="rlisp")
    for _ in range(100):
        toks = random_infix(rng)
        try:
            want = str(eval_prefix(shunting_yard(toks)))
        except ZeroDivisionError:
            want = None
        (o,) = outcomes(s, " ".join(toks) + ";", "rlisp")
        if want is None:
            assert o.error == "division by zero"
        else:
            assert o.echo == want, " ".join(toks)
