"""Host-implemented functions.

Every builtin takes the session and a Python list of argument words.
The registry is keyed by name; images refer to builtins by that name,
so renaming one breaks old images.
"""

from . import arith
from .errors import LispTypeError, UserError
from .heap import STRING
from .value import (CONS, EOF, HEAPOBJ, NIL, SYMBOL, T, TAG_MASK,
                    fixnum_value)

REGISTRY = {}


class Builtin:
    __slots__ = ("name", "fn", "min_args", "max_args")

    def __init__(self, name, fn, min_args, max_args):
        self.name = name
        self.fn = fn
        self.min_args = min_args
        self.max_args = max_args

    def __repr__(self):
        return f"#<builtin {self.name}>"

    def arity_text(self):
        if self.max_args is None:
            return f"at least {self.min_args}"
        if self.min_args == self.max_args:
            return str(self.min_args)
        return f"{self.min_args}..{self.max_args}"


def builtin(name, min_args, max_args=-1, group="core"):
    if max_args == -1:
        max_args = min_args

    def register(fn):
        REGISTRY[name] = (group, Builtin(name, fn, min_args, max_args))
        return fn
    return register


def truth(b):
    return T if b else NIL


def _list_items(s, w, who):
    heap = s.heap
    out = []
    while w & TAG_MASK == CONS:
        out.append(heap.car(w))
        w = heap.cdr(w)
    if w != NIL:
        raise LispTypeError(f"{who}: not a proper list")
    return out


def _need_symbol(s, w, who):
    if w & TAG_MASK != SYMBOL:
        raise LispTypeError(f"{who}: not a symbol: {s.print(w)}")
    return s.symtab[w]


def _need_cons(s, w, who):
    if w & TAG_MASK != CONS:
        raise LispTypeError(f"{who}: not a pair: {s.print(w)}")


# -- list structure ---------------------------------------------------------

@builtin("car", 1)
def b_car(s, a):
    w = a[0]
    if w == NIL:
        return NIL
    _need_cons(s, w, "car")
    return s.heap.car(w)


@builtin("cdr", 1)
def b_cdr(s, a):
    w = a[0]
    if w == NIL:
        return NIL
    _need_cons(s, w, "cdr")
    return s.heap.cdr(w)


@builtin("cons", 2)
def b_cons(s, a):
    return s.heap.alloc_cons(a[0], a[1])


@builtin("rplaca", 2)
def b_rplaca(s, a):
    _need_cons(s, a[0], "rplaca")
    s.heap.set_car(a[0], a[1])
    return a[0]


@builtin("rplacd", 2)
def b_rplacd(s, a):
    _need_cons(s, a[0], "rplacd")
    s.heap.set_cdr(a[0], a[1])
    return a[0]


@builtin("atom", 1)
def b_atom(s, a):
    return truth(a[0] & TAG_MASK != CONS)


@builtin("eq", 2)
def b_eq(s, a):
    return truth(a[0] == a[1])


@builtin("null", 1)
def b_null(s, a):
    return truth(a[0] == NIL)


@builtin("list", 0, None)
def b_list(s, a):
    heap = s.heap
    r = NIL
    with heap.no_gc():
        for w in reversed(a):
            r = heap.alloc_cons(w, r)
    return r


@builtin("reverse", 1)
def b_reverse(s, a):
    heap = s.heap
    r = NIL
    with heap.no_gc():
        for w in _list_items(s, a[0], "reverse"):
            r = heap.alloc_cons(w, r)
    return r


@builtin("append", 2)
def b_append(s, a):
    heap = s.heap
    r = a[1]
    with heap.no_gc():
        for w in reversed(_list_items(s, a[0], "append")):
            r = heap.alloc_cons(w, r)
    return r


@builtin("length", 1)
def b_length(s, a):
    return len(_list_items(s, a[0], "length")) << 3


@builtin("mapcar", 2)
def b_mapcar(s, a):
    fn, lst = a
    items = _list_items(s, lst, "mapcar")
    stack = s.evaluator.stack
    base = len(stack)
    try:
        for w in items:
            stack.append(s.apply(fn, [w]))
        heap = s.heap
        r = NIL
        with heap.no_gc():
            for w in reversed(stack[base:]):
                r = heap.alloc_cons(w, r)
        return r
    finally:
        del stack[base:]


# -- numbers ----------------------------------------------------------------

def _fold(s, args, op, unit, who):
    if not args:
        return unit
    acc = args[0]
    if len(args) == 1:
        op(s, unit, acc)  # type check only
        return acc
    stack = s.evaluator.stack
    for w in args[1:]:
        stack.append(acc)
        try:
            acc = op(s, acc, w)
        finally:
            stack.pop()
    return acc


@builtin("plus", 0, None)
def b_plus(s, a):
    return _fold(s, a, arith.add, 0, "plus")


@builtin("times", 0, None)
def b_times(s, a):
    return _fold(s, a, arith.mul, 1 << 3, "times")


@builtin("difference", 2)
def b_difference(s, a):
    return arith.sub(s, a[0], a[1])


@builtin("quotient", 2)
def b_quotient(s, a):
    return arith.quotient(s, a[0], a[1])


@builtin("remainder", 2)
def b_remainder(s, a):
    return arith.remainder(s, a[0], a[1])


@builtin("minus", 1)
def b_minus(s, a):
    return arith.minus(s, a[0])


@builtin("expt", 2)
def b_expt(s, a):
    return arith.expt(s, a[0], a[1])


@builtin("greaterp", 2)
def b_greaterp(s, a):
    return arith.greaterp(s, a[0], a[1])


@builtin("lessp", 2)
def b_lessp(s, a):
    return arith.lessp(s, a[0], a[1])


@builtin("eqn", 2)
def b_eqn(s, a):
    return arith.eqn(s, a[0], a[1])


@builtin("numberp", 1)
def b_numberp(s, a):
    return truth(arith.numberp(s, a[0]))


# -- property lists and flags ------------------------------------------------

@builtin("get", 2)
def b_get(s, a):
    sym = _need_symbol(s, a[0], "get")
    _need_symbol(s, a[1], "get")
    return sym.plist.get(a[1], NIL)


@builtin("put", 3)
def b_put(s, a):
    sym = _need_symbol(s, a[0], "put")
    _need_symbol(s, a[1], "put")
    sym.plist[a[1]] = a[2]
    return a[2]


@builtin("flag", 2)
def b_flag(s, a):
    _need_symbol(s, a[1], "flag")
    for w in _list_items(s, a[0], "flag"):
        _need_symbol(s, w, "flag").flags[a[1]] = True
    return NIL


@builtin("flagp", 2)
def b_flagp(s, a):
    sym = _need_symbol(s, a[0], "flagp")
    _need_symbol(s, a[1], "flagp")
    return truth(a[1] in sym.flags)


# -- input, output, errors, definitions --------------------------------------

@builtin("print-value", 1)
def b_print_value(s, a):
    s.write(s.print(a[0]) + "\n")
    return a[0]


@builtin("read-value", 0)
def b_read_value(s, a):
    v = s.read_input()
    return EOF if v is None else v


def message_text(s, w):
    if w & TAG_MASK == HEAPOBJ and s.heap.obj(w).kind == STRING:
        return s.heap.obj(w).data
    return s.print(w)


@builtin("error", 0, None)
def b_error(s, a):
    raise UserError(" ".join(message_text(s, w) for w in a) or "error")


@builtin("putd", 2)
def b_putd(s, a):
    _need_symbol(s, a[0], "putd")
    s.install_function(a[0], a[1])
    return a[0]


# -- algebra front ends -------------------------------------------------------

@builtin("df", 2, 3, group="algebra")
def b_df(s, a):
    r = arith.ring(s)
    codec = s.codec
    f = codec.to_form(r, a[0])
    var = a[1]
    if not codec.is_kernel(var):
        raise LispTypeError(f"df: not a variable: {s.print(var)}")
    n = 1
    if len(a) == 3:
        if a[2] & TAG_MASK != 0 or fixnum_value(a[2]) < 0:
            raise LispTypeError("df: order must be a nonnegative integer")
        n = fixnum_value(a[2])
    return codec.value(r.df(f, var >> 3, n))


@builtin("subst", 3, group="algebra")
def b_subst(s, a):
    r = arith.ring(s)
    codec = s.codec
    if not codec.is_kernel(a[1]):
        raise LispTypeError(f"subst: not a variable: {s.print(a[1])}")
    return codec.value(r.subst(codec.to_form(r, a[0]), a[1] >> 3,
                                codec.to_form(r, a[2])))


@builtin("simp", 1, group="algebra")
def b_simp(s, a):
    r = arith.ring(s)
    return s.codec.value(s.codec.simp(r, a[0]))


@builtin("write", 0, None, group="algebra")
def b_write(s, a):
    s.write("".join(s.render(w) for w in a) + "\n")
    return NIL


@builtin("setmod", 1, group="algebra")
def b_setmod(s, a):
    return s.set_modulus(a[0])
