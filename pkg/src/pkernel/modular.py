"""Modular arithmetic: portable reference code plus host natives.

The reference definitions are ordinary Lisp built from ``remainder``.
A session started with natives installs the host versions below first
and flags their names ``native``; instating the reference library then
skips them.  Both read the modulus from the global ``current-modulus``.
"""

from .bignum import big_add, big_cmp, big_divrem, big_mul, big_sub, integerp
from .builtins import builtin
from .errors import LispTypeError, UserError
from .value import NIL

MODULUS_VAR = "current-modulus"

MOD_FUNCTIONS = ("modplus", "moddifference", "modtimes", "modminus",
                 "modrecip", "modquotient")

REFERENCE_SOURCE = """
(de modulus-check ()
  (cond ((null current-modulus) (error "no modulus set"))
        (t current-modulus)))

(de modreduce (n)
  (prog (m r)
    (setq m (modulus-check))
    (setq r (remainder n m))
    (cond ((lessp r 0) (setq r (plus r m))))
    (return r)))

(de modplus (a b) (modreduce (plus a b)))

(de moddifference (a b) (modreduce (difference a b)))

(de modtimes (a b) (modreduce (times a b)))

(de modminus (a) (modreduce (difference 0 a)))

(de modrecip (a)
  (prog (m r0 r1 s0 s1 q tmp)
    (setq m (modulus-check))
    (setq r0 m)
    (setq r1 (modreduce a))
    (setq s0 0)
    (setq s1 1)
   loop
    (cond ((eqn r1 0) (go done)))
    (setq q (quotient r0 r1))
    (setq tmp (difference r0 (times q r1)))
    (setq r0 r1)
    (setq r1 tmp)
    (setq tmp (difference s0 (times q s1)))
    (setq s0 s1)
    (setq s1 tmp)
    (go loop)
   done
    (cond ((null (eqn r0 1)) (error "not invertible")))
    (return (modreduce s0))))

(de modquotient (a b) (modtimes a (modrecip b)))
"""


def _modulus(s):
    m = s.modulus_value()
    if m is None:
        raise UserError("no modulus set")
    return m


def _need_int(s, w, who):
    if not integerp(s.heap, w):
        raise LispTypeError(f"{who}: non-integer argument {s.print(w)}")


def _reduce(s, n):
    m = _modulus(s)
    _need_int(s, n, "remainder")
    r = big_divrem(s.heap, n, m)[1]
    if big_cmp(s.heap, r, 0) < 0:
        r = big_add(s.heap, r, m)
    return r


def _binary(op, who):
    def fn(s, a):
        _modulus(s)
        _need_int(s, a[0], who)
        _need_int(s, a[1], who)
        with s.heap.no_gc():
            return _reduce(s, op(s.heap, a[0], a[1]))
    return fn


builtin("modplus", 2, group="native")(_binary(big_add, "plus"))
builtin("moddifference", 2, group="native")(_binary(big_sub, "difference"))
builtin("modtimes", 2, group="native")(_binary(big_mul, "times"))


@builtin("modminus", 1, group="native")
def n_modminus(s, a):
    _modulus(s)
    with s.heap.no_gc():
        return _reduce(s, big_sub(s.heap, 0, a[0]))


def _recip(s, w):
    m = _modulus(s)
    heap = s.heap
    r0, r1 = m, _reduce(s, w)
    s0, s1 = 0, 1 << 3
    while r1 != 0:
        q = big_divrem(heap, r0, r1)[0]
        r0, r1 = r1, big_sub(heap, r0, big_mul(heap, q, r1))
        s0, s1 = s1, big_sub(heap, s0, big_mul(heap, q, s1))
    if r0 != 1 << 3:
        raise UserError("not invertible")
    return _reduce(s, s0)


@builtin("modrecip", 1, group="native")
def n_modrecip(s, a):
    with s.heap.no_gc():
        return _recip(s, a[0])


@builtin("modquotient", 2, group="native")
def n_modquotient(s, a):
    with s.heap.no_gc():
        inv = _recip(s, a[1])
        _need_int(s, a[0], "times")
        return _reduce(s, big_mul(s.heap, a[0], inv))


def check_modulus(s, w):
    if w == NIL:
        return
    if not integerp(s.heap, w) or big_cmp(s.heap, w, 0) <= 0:
        raise LispTypeError("setmod: modulus must be a positive integer")
