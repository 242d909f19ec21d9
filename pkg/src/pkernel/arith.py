"""Generic arithmetic on kernel words.

Integers go through the bignum layer, floats through host doubles, and
anything involving a kernel symbol or an encoded standard form goes to
the polynomial algebra.  Both engines call these same functions, so the
tree-walker and the VM cannot disagree about arithmetic.
"""

from .algebra import PolyRing, is_constant
from .bignum import (big_add, big_cmp, big_divrem, big_mul, big_sub,
                     integerp, make_fixnum, to_bigint)
from .errors import AlgebraError, DivisionByZero, LispTypeError
from .heap import BIGINT, FLOAT
from .value import FIXNUM, HEAPOBJ, NIL, T, TAG_MASK, fixnum_value


def is_float(s, w):
    return w & TAG_MASK == HEAPOBJ and s.heap.obj(w).kind == FLOAT


def numberp(s, w):
    if w & TAG_MASK == FIXNUM:
        return True
    if w & TAG_MASK == HEAPOBJ:
        return s.heap.obj(w).kind in (BIGINT, FLOAT)
    return False


def to_float(s, w):
    if w & TAG_MASK == FIXNUM:
        return float(fixnum_value(w))
    o = s.heap.obj(w)
    if o.kind == FLOAT:
        return o.data
    x = 0.0
    for d in reversed(o.data.digits):
        x = x * 4294967296.0 + d
    return -x if o.data.sign < 0 else x


def ring(s):
    """Polynomial ring honouring the session's current modulus."""
    m = s.modulus_value()
    return PolyRing(None if m is None else to_bigint(s.heap, m))


def _algebraic(s, who, args):
    codec = s.codec
    for a in args:
        if not (numberp(s, a) and not is_float(s, a)) \
                and not codec.is_algebraic(a):
            raise LispTypeError(
                f"{who}: non-numeric argument {s.print(a)}")
    r = ring(s)
    return r, [codec.to_form(r, a) for a in args]


def _floaty(s, a, b):
    return is_float(s, a) or is_float(s, b)


def _check_num(s, who, w):
    if not numberp(s, w):
        raise LispTypeError(f"{who}: non-numeric argument {s.print(w)}")


def add(s, a, b):
    if a & TAG_MASK == FIXNUM and b & TAG_MASK == FIXNUM:
        return make_fixnum(s.heap, fixnum_value(a) + fixnum_value(b))
    if numberp(s, a) and numberp(s, b):
        if _floaty(s, a, b):
            return s.make_float(to_float(s, a) + to_float(s, b))
        return big_add(s.heap, a, b)
    r, (x, y) = _algebraic(s, "plus", (a, b))
    return s.codec.value(r.add(x, y))


def sub(s, a, b):
    if a & TAG_MASK == FIXNUM and b & TAG_MASK == FIXNUM:
        return make_fixnum(s.heap, fixnum_value(a) - fixnum_value(b))
    if numberp(s, a) and numberp(s, b):
        if _floaty(s, a, b):
            return s.make_float(to_float(s, a) - to_float(s, b))
        return big_sub(s.heap, a, b)
    r, (x, y) = _algebraic(s, "difference", (a, b))
    return s.codec.value(r.sub(x, y))


def mul(s, a, b):
    if numberp(s, a) and numberp(s, b):
        if _floaty(s, a, b):
            return s.make_float(to_float(s, a) * to_float(s, b))
        return big_mul(s.heap, a, b)
    r, (x, y) = _algebraic(s, "times", (a, b))
    return s.codec.value(r.mul(x, y))


def quotient(s, a, b):
    if numberp(s, a) and numberp(s, b):
        if _floaty(s, a, b):
            d = to_float(s, b)
            if d == 0.0:
                raise DivisionByZero("quotient: division by zero")
            return s.make_float(to_float(s, a) / d)
        return big_divrem(s.heap, a, b)[0]
    r, (x, y) = _algebraic(s, "quotient", (a, b))
    if not is_constant(y):
        raise AlgebraError("quotient: divisor is not a constant")
    return s.codec.value(r.divide_const(x, y))


def remainder(s, a, b):
    for w in (a, b):
        if not integerp(s.heap, w):
            raise LispTypeError(
                f"remainder: non-integer argument {s.print(w)}")
    return big_divrem(s.heap, a, b)[1]


def minus(s, a):
    if numberp(s, a):
        if is_float(s, a):
            return s.make_float(-to_float(s, a))
        return big_sub(s.heap, 0, a)
    r, (x,) = _algebraic(s, "minus", (a,))
    return s.codec.value(r.neg(x))


def expt(s, a, n):
    if n & TAG_MASK != FIXNUM:
        raise LispTypeError("expt: exponent must be an integer")
    k = fixnum_value(n)
    if integerp(s.heap, a):
        if k < 0:
            raise LispTypeError("expt: negative exponent")
        result = 1 << 3  # fixnum 1
        base = a
        with s.heap.no_gc():
            while k:
                if k & 1:
                    result = big_mul(s.heap, result, base)
                k >>= 1
                if k:
                    base = big_mul(s.heap, base, base)
        return result
    if is_float(s, a):
        return s.make_float(to_float(s, a) ** k)
    if k < 0:
        raise AlgebraError("expt: negative exponent")
    r, (x,) = _algebraic(s, "expt", (a,))
    return s.codec.value(r.pow(x, k))


def compare(s, who, a, b):
    _check_num(s, who, a)
    _check_num(s, who, b)
    if _floaty(s, a, b):
        x, y = to_float(s, a), to_float(s, b)
        return (x > y) - (x < y)
    return big_cmp(s.heap, a, b)


def lessp(s, a, b):
    return T if compare(s, "lessp", a, b) < 0 else NIL


def greaterp(s, a, b):
    return T if compare(s, "greaterp", a, b) > 0 else NIL


def eqn(s, a, b):
    if a == b:
        return T
    if numberp(s, a) and numberp(s, b):
        if _floaty(s, a, b) and not (is_float(s, a) and is_float(s, b)):
            return NIL
        return T if compare(s, "eqn", a, b) == 0 else NIL
    return NIL
