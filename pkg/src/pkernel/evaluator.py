"""Tree-walking evaluator for the core language.

Variables use shallow dynamic binding: the current value always sits in
the symbol's value cell, and binding a variable saves the old value on
the session's binding stack.  Intermediate results are pushed on
``self.stack`` so the collector can see them.

Special forms: quote cond prog setq lambda de go return progn and or.
"""

from .errors import ArityError, LispError, LispTypeError, StackOverflow, \
    UnboundVariable
from .value import CONS, NIL, SYMBOL, T, TAG_MASK, UNBOUND


class GoSignal(Exception):
    def __init__(self, label):
        self.label = label


class ReturnSignal(Exception):
    def __init__(self, value):
        self.value = value


SPECIAL_FORMS = ("quote", "cond", "prog", "setq", "lambda", "de", "go",
                 "return", "progn", "and", "or")


class Evaluator:
    def __init__(self, session):
        self.s = session
        self.mem = session.heap.mem
        self.symbols = session.symtab.symbols
        self.stack = []
        intern = session.symtab.intern
        self.special = {intern(name): getattr(self, "_" + name)
                        for name in SPECIAL_FORMS}
        self.sym_lambda = intern("lambda")

    def roots(self):
        return self.stack

    # -- evaluation ---------------------------------------------------------

    def eval(self, x):
        tag = x & TAG_MASK
        if tag == SYMBOL:
            v = self.symbols[x >> 3].value
            if v == UNBOUND:
                if self.s.algebraic:
                    return x
                raise UnboundVariable(self.symbols[x >> 3].name)
            return v
        if tag != CONS:
            return x
        mem = self.mem
        i = x >> 3
        head = mem[i]
        if head & TAG_MASK == SYMBOL:
            sp = self.special.get(head)
            if sp is not None:
                return sp(x)
        stack = self.stack
        base = len(stack)
        try:
            a = mem[i + 1]
            while a & TAG_MASK == CONS:
                stack.append(self.eval(mem[a >> 3]))
                a = mem[(a >> 3) + 1]
            if a != NIL:
                raise LispTypeError(f"malformed call {self.s.print(x)}")
            args = stack[base:]
            if head & TAG_MASK == SYMBOL:
                return self.s.apply(head, args)
            if head & TAG_MASK == CONS and mem[head >> 3] == self.sym_lambda:
                return self.apply_lambda(head, args, "lambda")
            raise LispTypeError(
                f"not a function: {self.s.print(head)}")
        finally:
            del stack[base:]

    def progn(self, body):
        mem = self.mem
        result = NIL
        while body & TAG_MASK == CONS:
            result = self.eval(mem[body >> 3])
            body = mem[(body >> 3) + 1]
        return result

    def apply_lambda(self, lam, args, name):
        s = self.s
        mem = self.mem
        rest = mem[(lam >> 3) + 1]
        if rest & TAG_MASK != CONS:
            raise LispTypeError(f"malformed lambda {s.print(lam)}")
        params = mem[rest >> 3]
        body = mem[(rest >> 3) + 1]
        names = []
        while params & TAG_MASK == CONS:
            p = mem[params >> 3]
            if p & TAG_MASK != SYMBOL or p == NIL or p == T:
                raise LispTypeError(f"{name}: bad parameter {s.print(p)}")
            names.append(p)
            params = mem[(params >> 3) + 1]
        if len(names) != len(args):
            raise ArityError(name, len(names), len(args))
        if s.depth >= s.max_depth:
            raise StackOverflow(f"stack overflow: depth limit "
                                f"{s.max_depth} exceeded")
        s.depth += 1
        bindings = s.bindings
        mark = len(bindings)
        symbols = self.symbols
        for p, v in zip(names, args):
            sym = symbols[p >> 3]
            bindings.append(p)
            bindings.append(sym.value)
            sym.value = v
        self.stack.append(lam)
        try:
            return self.progn(body)
        finally:
            self.stack.pop()
            s.unbind(mark)
            s.depth -= 1

    # -- special forms --------------------------------------------------------

    def _args(self, x, n, name):
        mem = self.mem
        out = []
        a = mem[(x >> 3) + 1]
        while a & TAG_MASK == CONS:
            out.append(mem[a >> 3])
            a = mem[(a >> 3) + 1]
        if n is not None and len(out) != n:
            raise LispError(f"{name}: malformed form {self.s.print(x)}")
        return out

    def _quote(self, x):
        return self._args(x, 1, "quote")[0]

    def _lambda(self, x):
        return x

    def _progn(self, x):
        return self.progn(self.mem[(x >> 3) + 1])

    def _setq(self, x):
        var, expr = self._args(x, 2, "setq")
        if var & TAG_MASK != SYMBOL or var == NIL or var == T:
            raise LispTypeError(f"setq: cannot assign {self.s.print(var)}")
        v = self.eval(expr)
        self.symbols[var >> 3].value = v
        return v

    def _cond(self, x):
        mem = self.mem
        clauses = mem[(x >> 3) + 1]
        while clauses & TAG_MASK == CONS:
            clause = mem[clauses >> 3]
            if clause & TAG_MASK != CONS:
                raise LispError(f"cond: malformed clause "
                                f"{self.s.print(clause)}")
            test = self.eval(mem[clause >> 3])
            if test != NIL:
                body = mem[(clause >> 3) + 1]
                if body == NIL:
                    return test
                return self.progn(body)
            clauses = mem[(clauses >> 3) + 1]
        return NIL

    def _and(self, x):
        mem = self.mem
        a = mem[(x >> 3) + 1]
        result = T
        while a & TAG_MASK == CONS:
            result = self.eval(mem[a >> 3])
            if result == NIL:
                return NIL
            a = mem[(a >> 3) + 1]
        return result

    def _or(self, x):
        mem = self.mem
        a = mem[(x >> 3) + 1]
        while a & TAG_MASK == CONS:
            result = self.eval(mem[a >> 3])
            if result != NIL:
                return result
            a = mem[(a >> 3) + 1]
        return NIL

    def _de(self, x):
        s = self.s
        args = self._args(x, None, "de")
        if len(args) < 2 or args[0] & TAG_MASK != SYMBOL:
            raise LispError(f"de: malformed definition {s.print(x)}")
        name = args[0]
        rest = self.mem[(self.mem[(x >> 3) + 1] >> 3) + 1]
        lam = s.heap.alloc_cons(self.sym_lambda, rest)
        s.define_function(name, lam)
        return name

    def _go(self, x):
        label = self._args(x, 1, "go")[0]
        raise GoSignal(label)

    def _return(self, x):
        args = self._args(x, None, "return")
        if len(args) > 1:
            raise LispError("return: too many arguments")
        raise ReturnSignal(self.eval(args[0]) if args else NIL)

    def _prog(self, x):
        s = self.s
        mem = self.mem
        args = self._args(x, None, "prog")
        if not args:
            raise LispError("prog: missing variable list")
        varlist = args[0]
        stmts = args[1:]
        labels = {}
        for k, st in enumerate(stmts):
            if st & TAG_MASK == SYMBOL:
                labels[st] = k
        names = []
        while varlist & TAG_MASK == CONS:
            v = mem[varlist >> 3]
            if v & TAG_MASK != SYMBOL or v == NIL or v == T:
                raise LispTypeError(f"prog: bad variable {s.print(v)}")
            names.append(v)
            varlist = mem[(varlist >> 3) + 1]
        bindings = s.bindings
        mark = len(bindings)
        symbols = self.symbols
        for v in names:
            sym = symbols[v >> 3]
            bindings.append(v)
            bindings.append(sym.value)
            sym.value = NIL
        try:
            pc = 0
            n = len(stmts)
            while pc < n:
                st = stmts[pc]
                pc += 1
                if st & TAG_MASK == SYMBOL:
                    continue
                try:
                    self.eval(st)
                except GoSignal as g:
                    target = labels.get(g.label)
                    if target is None:
                        raise
                    pc = target + 1
            return NIL
        except ReturnSignal as r:
            return r.value
        finally:
            s.unbind(mark)


def instate_reference(session, defs):
    """Install reference definitions unless the host flagged a native.

    ``defs`` is a sequence of (name word, lambda word).  Returns a list of
    (name text, status) with status ``installed``, ``skipped`` or
    ``skipped-undefined``.
    """
    s = session
    native = s.symtab.intern("native")
    report = []
    for entry in defs:
        try:
            name, lam = entry
        except (TypeError, ValueError):
            raise LispError(f"instate_reference: malformed entry {entry!r}")
        if name & TAG_MASK != SYMBOL or lam & TAG_MASK != CONS:
            raise LispError("instate_reference: malformed entry for "
                            + s.print(name))
        sym = s.symtab[name]
        if native in sym.flags:
            status = "skipped" if sym.function is not None \
                else "skipped-undefined"
        else:
            s.define_function(name, lam, replace_builtin=True)
            status = "installed"
        report.append((sym.name, status))
    return report
