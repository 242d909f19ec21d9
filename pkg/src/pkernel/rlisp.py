"""The Algol-like surface language: tokenizer, parser and translator.

Statements translate to core forms one at a time.  Loops lower to
``prog`` with hidden variables named ``%accN`` / ``%limN`` / ``%stepN``
and labels ``%loopN``, so the core language needs no iteration
primitive.  See docs/rlisp-grammar.md for the grammar.
"""

from dataclasses import dataclass

from .bignum import make_fixnum
from .errors import RlispError
from .sexpr import Reader
from .value import CONS, NIL, SYMBOL, TAG_MASK

KEYWORDS = frozenset((
    "procedure", "begin", "end", "scalar", "for", "do", "product", "sum",
    "step", "until", "while", "if", "then", "else", "return", "write",
    "and", "or", "not", "neq",
))

# operator text -> (binding power, prefix function); all left-associative
# except ^, which is handled separately.
BINARY = {
    "or": (1, "or"), "and": (2, "and"),
    "=": (4, "eqn"), "neq": (4, None), "<": (4, "lessp"),
    ">": (4, "greaterp"), "<=": (4, None), ">=": (4, None),
    "+": (5, "plus"), "-": (5, "difference"),
    "*": (6, "times"), "/": (6, "quotient"),
}

_OPERATORS = (":=", "<=", ">=", "**", "+", "-", "*", "/", "^", "=", "<",
              ">", ":")
_PUNCT = "(),;$"

# dialect adaptation tables: function name -> argument permutation
DIALECTS = {
    "fn-first": {},
    "list-first": {"mapcar": (1, 0), "map": (1, 0)},
}


@dataclass(frozen=True)
class Token:
    kind: str       # id int float string op punct keyword quote eof
    text: str
    line: int
    column: int
    pos: int = 0


def _position(text, pos):
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


_ATOM_STOPS = " \t\r\n\f\v()[]'\";%"
# a bare quoted atom also ends at the rlisp separators , and $
_BARE_ATOM_STOPS = _ATOM_STOPS + ",$"


def _skip_datum(text, pos):
    """End offset of the S-expression starting at ``pos`` (no interning)."""
    n = len(text)
    depth = 0
    while True:
        while pos < n and text[pos] in " \t\r\n\f\v":
            pos += 1
        if pos >= n:
            raise RlispError("unterminated quoted datum", *_position(text, pos))
        c = text[pos]
        if c == "'":
            pos += 1
            continue
        if c in "([":
            depth += 1
            pos += 1
        elif c in ")]":
            if depth == 0:
                raise RlispError("unexpected ')' in quoted datum",
                                 *_position(text, pos))
            depth -= 1
            pos += 1
        elif c == '"':
            pos += 1
            while True:
                if pos >= n:
                    raise RlispError("unterminated string",
                                     *_position(text, pos))
                if text[pos] == '"':
                    if pos + 1 < n and text[pos + 1] == '"':
                        pos += 2
                        continue
                    pos += 1
                    break
                pos += 1
        elif c in "%;":
            while pos < n and text[pos] != "\n":
                pos += 1
            continue
        else:
            stops = _ATOM_STOPS if depth else _BARE_ATOM_STOPS
            while pos < n and text[pos] not in stops:
                pos += 2 if text[pos] == "!" else 1
            pos = min(pos, n)
        if depth == 0:
            return pos


def tokenize(text):
    """Token list ending with an ``eof`` token."""
    out = []
    pos = 0
    n = len(text)
    while True:
        while pos < n:
            c = text[pos]
            if c in " \t\r\n\f\v":
                pos += 1
            elif c == "%":
                while pos < n and text[pos] != "\n":
                    pos += 1
            else:
                break
        line, col = _position(text, pos)
        if pos >= n:
            out.append(Token("eof", "", line, col, pos))
            return out
        c = text[pos]
        start = pos
        if c.isalpha() or c == "!" or c == "_":
            chars = []
            while pos < n and (text[pos].isalnum() or text[pos] in "!_"):
                if text[pos] == "!":
                    if pos + 1 >= n:
                        raise RlispError("dangling '!' escape", line, col)
                    chars.append(text[pos + 1])
                    pos += 2
                else:
                    chars.append(text[pos])
                    pos += 1
            name = "".join(chars)
            escaped = "!" in text[start:pos]
            kind = "keyword" if name in KEYWORDS and not escaped else "id"
            out.append(Token(kind, name, line, col, start))
            continue
        if c.isdigit():
            while pos < n and text[pos].isdigit():
                pos += 1
            kind = "int"
            if (pos + 1 < n and text[pos] == "." and text[pos + 1].isdigit()):
                pos += 1
                while pos < n and text[pos].isdigit():
                    pos += 1
                kind = "float"
            out.append(Token(kind, text[start:pos], line, col, start))
            continue
        if c == '"':
            pos += 1
            chars = []
            while True:
                if pos >= n:
                    raise RlispError("unterminated string", line, col)
                if text[pos] == '"':
                    if pos + 1 < n and text[pos + 1] == '"':
                        chars.append('"')
                        pos += 2
                        continue
                    pos += 1
                    break
                chars.append(text[pos])
                pos += 1
            out.append(Token("string", "".join(chars), line, col, start))
            continue
        if c == "'":
            end = _skip_datum(text, pos + 1)
            out.append(Token("quote", text[pos + 1:end], line, col, pos + 1))
            pos = end
            continue
        for op in _OPERATORS:
            if text.startswith(op, pos):
                out.append(Token("op", "^" if op == "**" else op, line, col,
                                 start))
                pos += len(op)
                break
        else:
            if c in _PUNCT:
                out.append(Token("punct", c, line, col, start))
                pos += 1
            else:
                raise RlispError(f"illegal character {c!r}", line, col)


# -- translation target -------------------------------------------------------
#
# The parser builds a small host tree first: Sym for symbols, Python ints,
# Str for strings, Word for data already read into the heap, and lists for
# applications.  ``build`` turns it into heap structure in one step.

class Sym(str):
    __slots__ = ()


class Str(str):
    __slots__ = ()


class Word(int):
    pass


class Flt(float):
    pass


def build(session, tree):
    heap = session.heap
    intern = session.symtab.intern
    with heap.no_gc():
        def conv(x):
            if isinstance(x, Sym):
                return intern(str(x))
            if isinstance(x, Str):
                return session.make_string(str(x))
            if isinstance(x, Word):
                return int(x)
            if isinstance(x, Flt):
                return session.make_float(float(x))
            if isinstance(x, int):
                return make_fixnum(heap, x)
            r = NIL
            for item in reversed(x):
                r = heap.alloc_cons(conv(item), r)
            return r
        return conv(tree)


def adapt_call(table, head, args):
    """Apply the dialect table to one call ``(head . args)``."""
    perm = table.get(str(head)) if isinstance(head, Sym) else None
    if perm is None or len(perm) != len(args):
        return [head] + list(args)
    return [head] + [args[i] for i in perm]


def dialect_adapt(session, form, dialect="list-first"):
    """Rewrite a translated heap form into canonical argument order.

    Quoted data is left alone; unknown heads pass through.
    """
    table = DIALECTS[dialect] if isinstance(dialect, str) else dialect
    heap = session.heap
    quote = session.symtab.intern("quote")
    names = {session.symtab.intern(k): v for k, v in table.items()}

    def walk(w):
        if w & TAG_MASK != CONS:
            return w
        head = heap.car(w)
        if head == quote:
            return w
        items = []
        t = w
        while t & TAG_MASK == CONS:
            items.append(walk(heap.car(t)))
            t = heap.cdr(t)
        if t != NIL:
            return w
        perm = names.get(head) if head & TAG_MASK == SYMBOL else None
        args = items[1:]
        if perm is not None and len(perm) == len(args):
            args = [args[i] for i in perm]
        r = NIL
        for x in reversed([items[0]] + args):
            r = heap.alloc_cons(x, r)
        return r

    with heap.no_gc():
        return walk(form)


# -- parser -------------------------------------------------------------------

class Parser:
    def __init__(self, session, text, dialect="fn-first"):
        self.s = session
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.table = DIALECTS[dialect] if isinstance(dialect, str) \
            else dialect
        self.gensym = 0

    # token helpers
    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, kind, text=None):
        t = self.peek()
        return t.kind == kind and (text is None or t.text == text)

    def accept(self, kind, text=None):
        if self.at(kind, text):
            return self.next()
        return None

    def expect(self, kind, text=None, what=None):
        t = self.peek()
        if t.kind == kind and (text is None or t.text == text):
            return self.next()
        want = what or (repr(text) if text else kind)
        got = "end of input" if t.kind == "eof" else repr(t.text)
        raise RlispError(f"expected {want}, found {got}", t.line, t.column)

    def fresh(self, stem):
        self.gensym += 1
        return Sym(f"%{stem}{self.gensym}")

    # statements
    def statements(self):
        """Yield (tree, echo) for each top-level statement."""
        while True:
            while self.accept("punct", ";") or self.accept("punct", "$"):
                pass
            if self.at("eof"):
                return
            self.gensym = 0
            tree, echo = self.statement()
            t = self.peek()
            if t.kind == "punct" and t.text in ";$":
                self.next()
                yield tree, echo and t.text == ";"
            elif t.kind == "eof":
                yield tree, echo
            else:
                self.expect("punct", ";", "';' or '$'")

    def statement(self):
        t = self.peek()
        if t.kind == "keyword":
            kw = t.text
            if kw == "procedure":
                return self.procedure(), False
            if kw == "for":
                return self.for_loop()
            if kw == "while":
                return self.while_loop(), False
            if kw == "if":
                return self.if_stmt(), False
            if kw == "begin":
                return self.block(), False
            if kw == "write":
                self.next()
                args = [self.expr()]
                while self.accept("punct", ","):
                    args.append(self.expr())
                return [Sym("write")] + args, False
            if kw == "return":
                self.next()
                if self.at_statement_end():
                    return [Sym("return")], False
                return [Sym("return"), self.expr()], False
        e = self.expr()
        if self.accept("op", ":="):
            if not isinstance(e, Sym):
                raise RlispError("left side of ':=' must be a variable",
                                 t.line, t.column)
            return [Sym("setq"), e, self.statement()[0]], False
        return e, True

    def at_statement_end(self):
        t = self.peek()
        return (t.kind == "eof" or (t.kind == "punct" and t.text in ";$")
                or (t.kind == "keyword" and t.text in ("end", "else")))

    def identifier(self, what="identifier"):
        return Sym(self.expect("id", what=what).text)

    def procedure(self):
        self.expect("keyword", "procedure")
        name = self.identifier("procedure name")
        params = []
        if self.accept("punct", "("):
            if not self.accept("punct", ")"):
                params.append(self.identifier("parameter"))
                while self.accept("punct", ","):
                    params.append(self.identifier("parameter"))
                self.expect("punct", ")")
        else:
            while self.at("id"):
                params.append(self.identifier("parameter"))
                if not self.accept("punct", ","):
                    break
        self.expect("punct", ";")
        body = self.statement()[0]
        return [Sym("de"), name, params, body]

    def for_loop(self):
        self.expect("keyword", "for")
        var = self.identifier("loop variable")
        self.expect("op", ":=")
        start = self.expr()
        step = None
        if self.accept("op", ":"):
            limit = self.expr()
        else:
            self.expect("keyword", "step", "':' or 'step'")
            step = self.expr()
            self.expect("keyword", "until")
            limit = self.expr()
        t = self.peek()
        if self.accept("keyword", "do"):
            action, body = "do", self.statement()[0]
        elif self.accept("keyword", "product"):
            action, body = "product", self.expr()
        elif self.accept("keyword", "sum"):
            action, body = "sum", self.expr()
        else:
            raise RlispError("expected 'do', 'product' or 'sum'",
                             t.line, t.column)
        return self.lower_for(var, start, step, limit, action, body), \
            action != "do"

    def lower_for(self, var, start, step, limit, action, body):
        lim = self.fresh("lim")
        loop = self.fresh("loop")
        pvars = [var, lim]
        init = [[Sym("setq"), var, start], [Sym("setq"), lim, limit]]
        if step is None:
            done = [Sym("greaterp"), var, lim]
            incr = 1
        else:
            st = self.fresh("step")
            pvars.append(st)
            init.append([Sym("setq"), st, step])
            done = [Sym("cond"),
                    [[Sym("lessp"), st, 0], [Sym("lessp"), var, lim]],
                    [Sym("t"), [Sym("greaterp"), var, lim]]]
            incr = st
        if action == "do":
            result = Sym("nil")
            work = body if not isinstance(body, Sym) else [Sym("progn"), body]
        else:
            acc = self.fresh("acc")
            pvars.append(acc)
            op, unit = ("times", 1) if action == "product" else ("plus", 0)
            init.append([Sym("setq"), acc, unit])
            result = acc
            work = [Sym("setq"), acc, [Sym(op), acc, body]]
        return ([Sym("prog"), pvars] + init +
                [loop,
                 [Sym("cond"), [done, [Sym("return"), result]]],
                 work,
                 [Sym("setq"), var, [Sym("plus"), var, incr]],
                 [Sym("go"), loop]])

    def while_loop(self):
        self.expect("keyword", "while")
        cond = self.expr()
        self.expect("keyword", "do")
        body = self.statement()[0]
        loop = self.fresh("loop")
        if isinstance(body, Sym):
            body = [Sym("progn"), body]
        return [Sym("prog"), [], loop,
                [Sym("cond"), [[Sym("null"), cond], [Sym("return"),
                                                      Sym("nil")]]],
                body, [Sym("go"), loop]]

    def if_stmt(self):
        self.expect("keyword", "if")
        cond = self.expr()
        self.expect("keyword", "then")
        yes = self.statement()[0]
        if self.accept("keyword", "else"):
            no = self.statement()[0]
            return [Sym("cond"), [cond, yes], [Sym("t"), no]]
        return [Sym("cond"), [cond, yes]]

    def block(self):
        self.expect("keyword", "begin")
        pvars = []
        if self.accept("keyword", "scalar"):
            pvars.append(self.identifier("variable"))
            while self.accept("punct", ","):
                pvars.append(self.identifier("variable"))
            self.expect("punct", ";")
        body = []
        while True:
            while self.accept("punct", ";") or self.accept("punct", "$"):
                pass
            if self.accept("keyword", "end"):
                break
            if self.at("eof"):
                self.expect("keyword", "end", "'end'")
            st = self.statement()[0]
            body.append([Sym("progn"), st] if isinstance(st, Sym) else st)
            if self.accept("keyword", "end"):
                break
            t = self.peek()
            if not (t.kind == "punct" and t.text in ";$"):
                self.expect("punct", ";", "';' or 'end'")
        return [Sym("prog"), pvars] + body

    # expressions (precedence climbing)
    def expr(self, min_power=0):
        left = self.unary()
        while True:
            t = self.peek()
            key = t.text if t.kind in ("op", "keyword") else None
            entry = BINARY.get(key)
            if entry is None or entry[0] <= min_power:
                return left
            self.next()
            right = self.expr(entry[0])
            left = self.binary(key, left, right)

    @staticmethod
    def binary(op, a, b):
        if op == "neq":
            return [Sym("null"), [Sym("eqn"), a, b]]
        if op == "<=":
            return [Sym("null"), [Sym("greaterp"), a, b]]
        if op == ">=":
            return [Sym("null"), [Sym("lessp"), a, b]]
        return [Sym(BINARY[op][1]), a, b]

    def unary(self):
        t = self.peek()
        if t.kind == "op" and t.text == "-":
            self.next()
            operand = self.unary_operand()
            if type(operand) is int:
                return -operand
            return [Sym("minus"), operand]
        if t.kind == "op" and t.text == "+":
            self.next()
            return self.unary_operand()
        if t.kind == "keyword" and t.text == "not":
            self.next()
            return [Sym("null"), self.expr(BINARY["="][0] - 1)]
        return self.power()

    def unary_operand(self):
        t = self.peek()
        if t.kind == "op" and t.text in "+-":
            return self.unary()
        return self.power()

    def power(self):
        base = self.application()
        if self.accept("op", "^"):
            # right-associative; the exponent may carry its own sign
            exponent = self.unary() if self.at("op", "-") else self.power()
            return [Sym("expt"), base, exponent]
        return base

    def starts_primary(self):
        t = self.peek()
        return (t.kind in ("id", "int", "float", "string", "quote")
                or (t.kind == "punct" and t.text == "("))

    def application(self):
        t = self.peek()
        if t.kind == "id":
            self.next()
            name = Sym(t.text)
            if self.at("punct", "("):
                self.next()
                args = []
                if not self.accept("punct", ")"):
                    args.append(self.expr())
                    while self.accept("punct", ","):
                        args.append(self.expr())
                    self.expect("punct", ")")
                return adapt_call(self.table, name, args)
            if self.starts_primary():
                return adapt_call(self.table, name, [self.application()])
            return name
        return self.primary()

    def primary(self):
        t = self.next()
        if t.kind == "int":
            return int(t.text)
        if t.kind == "float":
            return Flt(t.text)
        if t.kind == "string":
            return Str(t.text)
        if t.kind == "quote":
            r = Reader(self.s, self.text[:t.pos + len(t.text)], t.pos)
            with self.s.heap.no_gc():
                datum = r.read()
            return [Sym("quote"), Word(datum)]
        if t.kind == "punct" and t.text == "(":
            e = self.expr()
            self.expect("punct", ")")
            return e
        got = "end of input" if t.kind == "eof" else repr(t.text)
        raise RlispError(f"expected an expression, found {got}",
                         t.line, t.column)


def statements(session, text, dialect=None):
    """Yield (form, echo) per statement, translating lazily."""
    p = Parser(session, text, dialect or getattr(session, "dialect",
                                                 "fn-first"))
    gen = p.statements()
    while True:
        # quoted data already in the heap must survive until built
        with session.heap.no_gc():
            try:
                tree, echo = next(gen)
            except StopIteration:
                return
            form = build(session, tree)
        yield form, echo


def parse_translate(session, text, dialect="fn-first"):
    """All statements of ``text`` as a list of core forms."""
    return [form for form, _ in statements(session, text, dialect)]
