"""Reference oracles and random generators shared by the test modules.

Nothing here imports the package under test except for turning a kernel
standard form into plain Fractions, so every oracle stays independent
of the code it checks.
"""

import decimal
import random
from fractions import Fraction

# -- decimal-string arithmetic -----------------------------------------------

# libmpdec works on decimal digit strings; 10000 digits is far beyond the
# 2 x 1234 digits a product of two 4096-bit operands needs, and any
# rounding would trap.
_CTX = decimal.Context(prec=10_000, Emax=decimal.MAX_EMAX,
                       traps=[decimal.Inexact, decimal.Rounded,
                              decimal.InvalidOperation,
                              decimal.DivisionByZero])


def _text(d):
    t = format(d, "f")
    return "0" if t in ("0", "-0") else t


def dec_add(a, b):
    return _text(_CTX.add(decimal.Decimal(a), decimal.Decimal(b)))


def dec_sub(a, b):
    return _text(_CTX.subtract(decimal.Decimal(a), decimal.Decimal(b)))


def dec_mul(a, b):
    return _text(_CTX.multiply(decimal.Decimal(a), decimal.Decimal(b)))


def dec_divrem(a, b):
    """Quotient truncated toward zero; remainder takes the dividend's sign."""
    x, y = decimal.Decimal(a), decimal.Decimal(b)
    return _text(_CTX.divide_int(x, y)), _text(_CTX.remainder(x, y))


def dec_abs_less(a, b):
    return _CTX.compare(_CTX.abs(decimal.Decimal(a)),
                        _CTX.abs(decimal.Decimal(b))) < 0


def random_operand(rng, max_bits=4096):
    """Decimal text of a signed integer with a random bit length."""
    kind = rng.random()
    bits = rng.randint(1, max_bits)
    if kind < 0.05:
        n = 0
    elif kind < 0.15:
        n = (1 << bits) - rng.choice((0, 1))      # powers of two and 2^k-1
    elif kind < 0.2:
        n = (1 << (32 * rng.randint(1, max_bits // 32))) + rng.randint(-2, 2)
    else:
        n = rng.getrandbits(bits) | (1 << (bits - 1))
    if rng.random() < 0.5:
        n = -n
    return str(n)


# -- Legendre polynomials by the three-term recurrence ----------------------

def legendre_recurrence(k_max):
    """Coefficient lists (index = degree) of P_0..P_k_max.

    (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}.
    """
    ps = [[Fraction(1)], [Fraction(0), Fraction(1)]]
    for k in range(1, k_max):
        prev, cur = ps[k - 1], ps[k]
        nxt = [Fraction(0)] * (k + 2)
        for i, c in enumerate(cur):
            nxt[i + 1] += (2 * k + 1) * c
        for i, c in enumerate(prev):
            nxt[i] -= k * c
        ps.append([c / (k + 1) for c in nxt])
    return ps[:k_max + 1]


def poly_text(coeffs, var="x"):
    """Infix rendering in the kernel's term order (descending degree)."""
    parts = []
    for e in range(len(coeffs) - 1, -1, -1):
        c = coeffs[e]
        if c == 0:
            continue
        mag = abs(c)
        num = str(mag.numerator) if mag.denominator == 1 \
            else f"{mag.numerator}/{mag.denominator}"
        power = "" if e == 0 else (var if e == 1 else f"{var}^{e}")
        if not power:
            body = num
        elif num == "1":
            body = power
        else:
            body = f"{num}*{power}"
        if not parts:
            parts.append("-" + body if c < 0 else body)
        else:
            parts.append((" - " if c < 0 else " + ") + body)
    return "".join(parts) or "0"


# -- kernel standard forms as plain Fractions ---------------------------------

def form_terms(session, w):
    """{((var name, exp), ...): Fraction} for an integer or a standard form."""
    from pkernel.algebra import monomials
    from pkernel.bignum import integerp, to_bigint
    if integerp(session.heap, w):
        n = int(to_bigint(session.heap, w).to_decimal())
        return {(): Fraction(n)} if n else {}
    out = {}
    for q, powers in monomials(session.codec.decode(w)):
        key = tuple((session.symbols[v].name, e) for v, e in powers)
        out[key] = Fraction(int(q.num.to_decimal()), int(q.den.to_decimal()))
    return out


def univariate(terms, var="x"):
    """Coefficient list from form_terms output in one variable."""
    degree = 0
    for key in terms:
        for v, e in key:
            assert v == var, key
            degree = max(degree, e)
    coeffs = [Fraction(0)] * (degree + 1)
    for key, c in terms.items():
        coeffs[key[0][1] if key else 0] = c
    return coeffs


def eval_terms(terms, env):
    total = Fraction(0)
    for key, c in terms.items():
        t = c
        for v, e in key:
            t *= env[v] ** e
        total += t
    return total


# -- random polynomials for the differentiation check ------------------------

def random_poly_expr(rng, depth=0):
    """(rlisp text, evaluator) for a random polynomial in x and y.

    The evaluator maps an environment of Fractions to the exact value.
    Division only ever divides by a nonzero integer literal, which the
    algebra treats as an exact rational scale.
    """
    r = rng.random()
    if depth >= 3 or r < 0.25:
        choice = rng.random()
        if choice < 0.45:
            return "x", lambda env: env["x"]
        if choice < 0.6:
            return "y", lambda env: env["y"]
        n = rng.randint(1, 9)
        return str(n), lambda env: Fraction(n)
    if r < 0.45:
        (ta, fa), (tb, fb) = (random_poly_expr(rng, depth + 1)
                              for _ in range(2))
        return f"({ta} + {tb})", lambda env: fa(env) + fb(env)
    if r < 0.6:
        (ta, fa), (tb, fb) = (random_poly_expr(rng, depth + 1)
                              for _ in range(2))
        return f"({ta} - {tb})", lambda env: fa(env) - fb(env)
    if r < 0.8:
        (ta, fa), (tb, fb) = (random_poly_expr(rng, depth + 1)
                              for _ in range(2))
        return f"{ta}*{tb}", lambda env: fa(env) * fb(env)
    if r < 0.92:
        ta, fa = random_poly_expr(rng, depth + 1)
        n = rng.randint(2, 4)
        return f"({ta})^{n}", lambda env: fa(env) ** n
    ta, fa = random_poly_expr(rng, depth + 1)
    d = rng.randint(2, 7)
    return f"({ta})/{d}", lambda env: fa(env) / d


def central_difference(f, env, var, h):
    lo, hi = dict(env), dict(env)
    lo[var] -= h
    hi[var] += h
    return (f(hi) - f(lo)) / (2 * h)


# -- infix expressions and a shunting-yard oracle ---------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}
_RIGHT = {"^"}


def random_infix(rng, depth=0):
    """Token list of a random integer expression.

    Exponents are small literals so values stay bounded; division may
    hit a zero divisor, which the caller handles.
    """
    if depth >= 4 or rng.random() < 0.3:
        return [str(rng.randint(0, 30))]
    r = rng.random()
    if r < 0.15:
        return ["("] + random_infix(rng, depth + 1) + [")"]
    if r < 0.25:
        base = random_infix(rng, depth + 2) if rng.random() < 0.5 \
            else [str(rng.randint(0, 9))]
        if len(base) > 1:
            base = ["("] + base + [")"]
        return base + ["^", str(rng.randint(0, 3))]
    op = rng.choice("+-*/")
    return random_infix(rng, depth + 1) + [op] + random_infix(rng, depth + 1)


def shunting_yard(tokens):
    """Prefix tree (op, left, right) or int, by Dijkstra's algorithm."""
    output, ops = [], []

    def reduce():
        op = ops.pop()
        b = output.pop()
        a = output.pop()
        output.append((op, a, b))

    for tok in tokens:
        if tok.isdigit():
            output.append(int(tok))
        elif tok == "(":
            ops.append(tok)
        elif tok == ")":
            while ops[-1] != "(":
                reduce()
            ops.pop()
        else:
            while ops and ops[-1] != "(" and (
                    _PREC[ops[-1]] > _PREC[tok]
                    or (_PREC[ops[-1]] == _PREC[tok] and tok not in _RIGHT)):
                reduce()
            ops.append(tok)
    while ops:
        reduce()
    (tree,) = output
    return tree


def eval_prefix(tree):
    """Integer semantics: quotient truncates toward zero."""
    if isinstance(tree, int):
        return tree
    op, a, b = tree
    x, y = eval_prefix(a), eval_prefix(b)
    if op == "+":
        return x + y
    if op == "-":
        return x - y
    if op == "*":
        return x * y
    if op == "^":
        return x ** y
    if y == 0:
        raise ZeroDivisionError
    q = abs(x) // abs(y)
    return q if (x < 0) == (y < 0) else -q


def prefix_text(tree):
    names = {"+": "plus", "-": "difference", "*": "times",
             "/": "quotient", "^": "expt"}
    if isinstance(tree, int):
        return str(tree)
    op, a, b = tree
    return f"({names[op]} {prefix_text(a)} {prefix_text(b)})"


# -- random S-expression trees ---------------------------------------------

_SYMBOL_CHARS = "abcdefghijklmnopqrstuvwxyz-+*/<>=?_0123456789"
_AWKWARD = ["a b", "(", ")", "it's", '"q"', "%c", ";", "12", "-7", "1.5",
            ".", "#x", "!", "[v]", "T"]


def random_tree(rng, depth=0):
    """Host description of a datum: ('sym', name), ('int', n), ..."""
    r = rng.random()
    if depth >= 5 or r < 0.45:
        a = rng.random()
        if a < 0.3:
            n = rng.randint(1, 8)
            return ("sym", "".join(rng.choice(_SYMBOL_CHARS)
                                   for _ in range(n)))
        if a < 0.35:
            return ("sym", rng.choice(_AWKWARD))
        if a < 0.55:
            return ("int", rng.randint(-10**6, 10**6))
        if a < 0.62:
            return ("int", rng.choice((-1, 1)) * rng.getrandbits(200))
        if a < 0.72:
            return ("float", rng.choice((0.5, -2.25, 1e300, 3.0e-5,
                                         rng.uniform(-1e6, 1e6))))
        if a < 0.85:
            n = rng.randint(0, 6)
            return ("str", "".join(rng.choice('ab "();%!\n')
                                   for _ in range(n)))
        if a < 0.92:
            return ("char", rng.choice("aZ0(;"))
        return ("nil",)
    if r < 0.88:
        items = [random_tree(rng, depth + 1) for _ in range(rng.randint(0, 4))]
        tail = random_tree(rng, depth + 1) if items and rng.random() < 0.2 \
            else ("nil",)
        return ("list", items, tail)
    if r < 0.95:
        return ("vector", [random_tree(rng, depth + 1)
                           for _ in range(rng.randint(0, 3))])
    return ("quote", random_tree(rng, depth + 1))


def build_tree(session, t):
    """Allocate host description ``t`` in the session heap."""
    from pkernel.bignum import BigInt, make_integer
    from pkernel.heap import VECTOR
    from pkernel.value import NIL, make_char
    heap = session.heap
    kind = t[0]
    if kind == "sym":
        return session.symtab.intern(t[1])
    if kind == "int":
        return make_integer(heap, BigInt.from_int(t[1]))
    if kind == "float":
        return session.make_float(t[1])
    if kind == "str":
        return session.make_string(t[1])
    if kind == "char":
        return make_char(ord(t[1]))
    if kind == "nil":
        return NIL
    if kind == "vector":
        return heap.alloc_object(VECTOR, [build_tree(session, x)
                                          for x in t[1]])
    if kind == "quote":
        inner = build_tree(session, t[1])
        return heap.alloc_cons(session.sym_quote, heap.alloc_cons(inner, NIL))
    w = build_tree(session, t[2])
    for x in reversed(t[1]):
        w = heap.alloc_cons(build_tree(session, x), w)
    return w


# -- random core-language corpus ---------------------------------------------

CORPUS_PRELUDE = """
(de fact (n) (cond ((lessp n 2) 1) (t (times n (fact (difference n 1))))))
(de fib (n) (cond ((lessp n 2) n) (t (plus (fib (difference n 1)) (fib (difference n 2))))))
(de len (l) (cond ((null l) 0) (t (plus 1 (len (cdr l))))))
(de sum-list (l) (prog (acc) (setq acc 0)
  loop (cond ((null l) (return acc)))
  (setq acc (plus acc (car l))) (setq l (cdr l)) (go loop)))
(de iota (n) (prog (acc) (setq acc nil)
  loop (cond ((lessp n 1) (return acc)))
  (setq acc (cons n acc)) (setq n (difference n 1)) (go loop)))
(de square (x) (times x x))
(de twice (f x) (f (f x)))
(de show (x) (print-value x))
(de pick (a b c) (cond (a b) (t c)))
(de count-up (n) (prog (i out) (setq i 0)
  top (cond ((eqn i n) (return (reverse out))))
  (setq out (cons (times i i) out)) (setq i (plus i 1)) (go top)))
(setq g 10)
(setq gl (quote (3 1 4 1 5 9 2 6)))
"""

_VARS = ("g", "v1", "v2")


def random_core_form(rng, depth=0, scope=()):
    """Text of a random core-language expression."""
    ints = lambda: str(rng.choice((rng.randint(-20, 20),
                                   rng.randint(-10**12, 10**12),
                                   rng.getrandbits(90))))
    if depth >= 4 or rng.random() < 0.25:
        r = rng.random()
        names = _VARS + tuple(scope)
        if r < 0.5:
            return ints()
        if r < 0.75:
            return rng.choice(names)
        if r < 0.95:
            return rng.choice(("nil", "t", "gl", "(quote (a b . c))",
                               '"text"', "1.5", "(quote sym)"))
        return rng.choice(("zz-unbound", "(quote ())"))
    sub = lambda: random_core_form(rng, depth + 1, scope)
    k = rng.randrange(24)
    if k == 0:
        return f"(plus {sub()} {sub()} {sub()})"
    if k == 1:
        return f"(difference {sub()} {sub()})"
    if k == 2:
        return f"(times {sub()} {sub()})"
    if k == 3:
        return f"(quotient {sub()} {sub()})"
    if k == 4:
        return f"(remainder {sub()} {sub()})"
    if k == 5:
        return f"(cons {sub()} {sub()})"
    if k == 6:
        return f"(car {sub()})"
    if k == 7:
        return f"(cdr {sub()})"
    if k == 8:
        return f"(list {sub()} {sub()})"
    if k == 9:
        return f"(cond ((lessp {sub()} {sub()}) {sub()}) (t {sub()}))"
    if k == 10:
        return f"(and {sub()} {sub()})"
    if k == 11:
        return f"(or (null {sub()}) {sub()})"
    if k == 12:
        p = f"p{depth}"
        body = random_core_form(rng, depth + 1, scope + (p,))
        return f"((lambda ({p}) {body}) {sub()})"
    if k == 13:
        n = rng.randint(0, 12)
        return f"(fact {n})" if rng.random() < 0.8 else f"(fact {n} 1)"
    if k == 14:
        return f"(fib {rng.randint(0, 12)})"
    if k == 15:
        return f"(show {sub()})"
    if k == 16:
        return f"(sum-list (iota {rng.randint(0, 30)}))"
    if k == 17:
        return f"(mapcar (quote square) (count-up {rng.randint(0, 6)}))"
    if k == 18:
        return f"(twice (quote square) {rng.randint(-5, 5)})"
    if k == 19:
        v = rng.choice(_VARS)
        return f"(setq {v} {sub()})"
    if k == 20:
        n = rng.randint(0, 8)
        return (f"(prog (i acc) (setq i 0) (setq acc 0) loop "
                f"(cond ((greaterp i {n}) (return acc))) "
                f"(setq acc (plus acc {sub()})) (setq i (plus i 1)) "
                f"(go loop))")
    if k == 21:
        return rng.choice((f"(error \"boom\" {sub()})",
                           f"(no-such-function {sub()})",
                           f"(eq {sub()} {sub()})",
                           f"(len {sub()})"))
    if k == 22:
        key = rng.choice(("colour", "size"))
        return rng.choice((f"(put (quote box) (quote {key}) {sub()})",
                           f"(get (quote box) (quote {key}))",
                           f"(flagp (quote box) (quote {key}))",
                           f"(flag (quote (box)) (quote {key}))"))
    return f"(pick {sub()} {sub()} {sub()})"


def generate_corpus(seed, count):
    """Prelude plus ``count`` random top-level forms, as Lisp text."""
    rng = random.Random(seed)
    forms = [random_core_form(rng) for _ in range(count)]
    return CORPUS_PRELUDE + "\n".join(forms) + "\n"
