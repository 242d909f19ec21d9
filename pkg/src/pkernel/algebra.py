"""Canonical polynomial forms over the integers and rationals.

A standard form is either a coefficient (:class:`Q`) or a :class:`Poly`
in a main variable whose terms are ``(exponent, standard form)`` pairs
with strictly decreasing exponents and no zero coefficients.  Variables
are identified by symbol index; the earlier a symbol was interned, the
higher it ranks, so every variable inside a coefficient ranks below the
polynomial's own main variable.  With these rules two equal polynomials
always have identical forms, and ``==`` decides equality.

Coefficient arithmetic runs on :class:`~pkernel.bignum.BigInt`.  When a
modulus is active every coefficient is reduced into ``[0, m)``.

At the kernel boundary a form travels as the list ``(*sf . data)``;
see :func:`encode` and :func:`decode`.
"""

from .bignum import ONE, ZERO, BigInt, gcd, make_integer, to_bigint
from .errors import AlgebraError
from .heap import BIGINT
from .value import (CONS, FIXNUM, HEAPOBJ, NIL, SYMBOL, T, TAG_MASK,
                    fixnum_value, symbol_index, symbol_word)


class Q:
    """Reduced rational with positive denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=ONE):
        if isinstance(num, int):
            num = BigInt.from_int(num)
        if isinstance(den, int):
            den = BigInt.from_int(den)
        if not den:
            raise AlgebraError("zero denominator")
        if den.sign < 0:
            num, den = -num, -den
        if not den.is_one():
            g = gcd(num, den)
            if not g.is_one() and g:
                num = num.divrem(g)[0]
                den = den.divrem(g)[0]
            if not num:
                den = ONE
        self.num = num
        self.den = den

    def __eq__(self, other):
        return isinstance(other, Q) and self.num == other.num \
            and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __repr__(self):
        if self.den.is_one():
            return f"Q({self.num})"
        return f"Q({self.num}/{self.den})"

    def __bool__(self):
        return bool(self.num)

    def is_integer(self):
        return self.den.is_one()


Q_ZERO = Q(ZERO)
Q_ONE = Q(ONE)


class Poly:
    __slots__ = ("var", "terms")

    def __init__(self, var, terms):
        self.var = var
        self.terms = terms

    def __eq__(self, other):
        return isinstance(other, Poly) and self.var == other.var \
            and self.terms == other.terms

    def __hash__(self):
        return hash((self.var, self.terms))

    def __repr__(self):
        return f"Poly({self.var}, {self.terms!r})"


def _make_poly(var, terms):
    if not terms:
        return Q_ZERO
    if len(terms) == 1 and terms[0][0] == 0:
        return terms[0][1]
    return Poly(var, tuple(terms))


def is_zero(f):
    return isinstance(f, Q) and not f.num


def is_constant(f):
    return isinstance(f, Q)


class PolyRing:
    """Arithmetic on standard forms, optionally modulo ``modulus``."""

    def __init__(self, modulus=None):
        if modulus is not None:
            if isinstance(modulus, int):
                modulus = BigInt.from_int(modulus)
            if modulus.sign <= 0:
                raise AlgebraError("modulus must be positive")
        self.modulus = modulus

    # -- coefficients ------------------------------------------------------

    def coef(self, q):
        m = self.modulus
        if m is None:
            return q
        r = q.num.divrem(m)[1]
        if not q.den.is_one():
            r = (r * self._inverse(q.den)).divrem(m)[1]
        if r.sign < 0:
            r = r + m
        return Q(r)

    def _inverse(self, a):
        m = self.modulus
        r0, r1 = m, a.divrem(m)[1]
        s0, s1 = ZERO, ONE
        while r1:
            q = r0.divrem(r1)[0]
            r0, r1 = r1, r0 - q * r1
            s0, s1 = s1, s0 - q * s1
        if not r0.is_one():
            raise AlgebraError(f"{a} is not invertible modulo {m}")
        return s0

    def const(self, value):
        if isinstance(value, Q):
            return self.coef(value)
        return self.coef(Q(value))

    def variable(self, var):
        return Poly(var, ((1, Q_ONE),))

    def _cadd(self, a, b):
        if a.den.is_one() and b.den.is_one():
            return self.coef(Q(a.num + b.num))
        return self.coef(Q(a.num * b.den + b.num * a.den, a.den * b.den))

    def _cmul(self, a, b):
        if a.den.is_one() and b.den.is_one():
            return self.coef(Q(a.num * b.num))
        return self.coef(Q(a.num * b.num, a.den * b.den))

    # -- ring operations ---------------------------------------------------

    def add(self, a, b):
        if isinstance(a, Q):
            if isinstance(b, Q):
                return self._cadd(a, b)
            return self._add_const_term(b, a)
        if isinstance(b, Q):
            return self._add_const_term(a, b)
        if a.var == b.var:
            out = []
            ta, tb = a.terms, b.terms
            i = j = 0
            while i < len(ta) and j < len(tb):
                ea, ca = ta[i]
                eb, cb = tb[j]
                if ea > eb:
                    out.append(ta[i])
                    i += 1
                elif eb > ea:
                    out.append(tb[j])
                    j += 1
                else:
                    c = self.add(ca, cb)
                    if not is_zero(c):
                        out.append((ea, c))
                    i += 1
                    j += 1
            out.extend(ta[i:])
            out.extend(tb[j:])
            return _make_poly(a.var, out)
        if a.var < b.var:
            return self._add_const_term(a, b)
        return self._add_const_term(b, a)

    def _add_const_term(self, p, c):
        """p + c where c does not involve p's main variable."""
        if is_zero(c):
            return p
        terms = list(p.terms)
        if terms[-1][0] == 0:
            s = self.add(terms[-1][1], c)
            if is_zero(s):
                terms.pop()
            else:
                terms[-1] = (0, s)
        else:
            terms.append((0, c))
        return _make_poly(p.var, terms)

    def neg(self, a):
        if isinstance(a, Q):
            return self.coef(Q(-a.num, a.den))
        return Poly(a.var, tuple((e, self.neg(c)) for e, c in a.terms))

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if isinstance(a, Q):
            if isinstance(b, Q):
                return self._cmul(a, b)
            return self._scale(b, a)
        if isinstance(b, Q):
            return self._scale(a, b)
        if a.var == b.var:
            acc = {}
            for ea, ca in a.terms:
                for eb, cb in b.terms:
                    e = ea + eb
                    p = self.mul(ca, cb)
                    acc[e] = self.add(acc[e], p) if e in acc else p
            terms = [(e, acc[e]) for e in sorted(acc, reverse=True)
                     if not is_zero(acc[e])]
            return _make_poly(a.var, terms)
        if a.var > b.var:
            a, b = b, a
        # b ranks below a's main variable: multiply into each coefficient
        terms = []
        for e, c in a.terms:
            p = self.mul(c, b)
            if not is_zero(p):
                terms.append((e, p))
        return _make_poly(a.var, terms)

    def _scale(self, p, q):
        """p * q for a constant q."""
        if is_zero(q):
            return Q_ZERO
        if isinstance(p, Q):
            return self._cmul(p, q)
        terms = []
        for e, c in p.terms:
            s = self._scale(c, q)
            if not is_zero(s):
                terms.append((e, s))
        return _make_poly(p.var, terms)

    def pow(self, a, n):
        if n < 0:
            raise AlgebraError("negative exponent")
        result = self.const(Q_ONE)
        base = a
        while n:
            if n & 1:
                result = self.mul(result, base)
            n >>= 1
            if n:
                base = self.mul(base, base)
        return result

    def divide_const(self, a, q):
        if not isinstance(q, Q):
            raise AlgebraError("division by a non-constant polynomial")
        if not q.num:
            raise AlgebraError("division by zero")
        return self._scale(a, self.coef(Q(q.den, q.num)))

    # -- calculus and substitution -----------------------------------------

    def df(self, f, var, n=1):
        if n < 0:
            raise AlgebraError("negative derivative order")
        for _ in range(n):
            f = self._df1(f, var)
            if is_zero(f):
                break
        return f

    def _df1(self, f, var):
        if isinstance(f, Q) or f.var > var:
            return Q_ZERO
        terms = []
        if f.var == var:
            for e, c in f.terms:
                if e:
                    d = self._scale(c, self.const(Q(e)))
                    if not is_zero(d):
                        terms.append((e - 1, d))
        else:
            for e, c in f.terms:
                d = self._df1(c, var)
                if not is_zero(d):
                    terms.append((e, d))
        return _make_poly(f.var, terms)

    def subst(self, f, var, value):
        if isinstance(f, Q) or f.var > var:
            return f
        if f.var == var:
            # Horner over the (possibly sparse) exponents
            result = Q_ZERO
            prev = None
            for e, c in f.terms:
                if prev is not None:
                    result = self.mul(result, self.pow(value, prev - e))
                result = self.add(result, c)
                prev = e
            return self.mul(result, self.pow(value, prev))
        x = self.variable(f.var)
        result = Q_ZERO
        for e, c in f.terms:
            result = self.add(result,
                              self.mul(self.pow(x, e),
                                       self.subst(c, var, value)))
        return result

    def evaluate(self, f, env):
        """Numeric value of ``f`` with variables bound by ``env``.

        ``env`` maps variable index to a host number; coefficients are
        converted with ``num/den`` so the result type follows ``env``.
        """
        if isinstance(f, Q):
            n, d = f.num.to_int(), f.den.to_int()
            return n if d == 1 else n / d
        x = env[f.var]
        return sum(self.evaluate(c, env) * x ** e for e, c in f.terms)


# -- conversion between forms and kernel values ------------------------------

def monomials(f):
    """Flatten ``f`` into [(Q, [(var, exp), ...])] in canonical order."""
    out = []
    work = [(f, ())]
    # explicit stack; push terms in reverse to keep order
    while work:
        g, powers = work.pop()
        if isinstance(g, Q):
            out.append((g, list(powers)))
            continue
        for e, c in reversed(g.terms):
            work.append((c, powers + ((g.var, e),) if e else powers))
    return out


def render(f, name_of):
    """Infix text, e.g. ``3/2*x^2 - 1/2``."""
    mons = monomials(f)
    if not mons:
        return "0"
    parts = []
    for k, (q, powers) in enumerate(mons):
        neg = q.num.sign < 0
        mag = abs(q.num)
        num_text = mag.to_decimal()
        coef_text = num_text if q.den.is_one() \
            else f"{num_text}/{q.den.to_decimal()}"
        factors = []
        for var, e in powers:
            nm = name_of(var)
            factors.append(nm if e == 1 else f"{nm}^{e}")
        if factors:
            if coef_text == "1":
                body = "*".join(factors)
            else:
                body = coef_text + "*" + "*".join(factors)
        else:
            body = coef_text
        if k == 0:
            parts.append("-" + body if neg else body)
        else:
            parts.append((" - " if neg else " + ") + body)
    return "".join(parts)


class Codec:
    """Moves standard forms in and out of the kernel heap."""

    def __init__(self, session):
        self.s = session
        self.heap = session.heap
        self.sym_sf = session.symtab.intern("*sf")
        self.sym_rn = session.symtab.intern(":rn")

    def is_form(self, w):
        return w & TAG_MASK == CONS and self.heap.car(w) == self.sym_sf

    def encode(self, f):
        heap = self.heap
        with heap.no_gc():
            return heap.alloc_cons(self.sym_sf, self._encode(f))

    def value(self, f):
        """Kernel value for ``f``: integer constants become plain integers."""
        if isinstance(f, Q) and f.den.is_one():
            return make_integer(self.heap, f.num)
        return self.encode(f)

    def _encode(self, f):
        heap = self.heap
        if isinstance(f, Q):
            n = make_integer(heap, f.num)
            if f.den.is_one():
                return n
            d = make_integer(heap, f.den)
            return heap.alloc_cons(self.sym_rn, heap.alloc_cons(n, d))
        terms = NIL
        for e, c in reversed(f.terms):
            pair = heap.alloc_cons(e << 3, self._encode(c))
            terms = heap.alloc_cons(pair, terms)
        return heap.alloc_cons(symbol_word(f.var), terms)

    def decode(self, w):
        heap = self.heap
        if w & TAG_MASK != CONS or heap.car(w) != self.sym_sf:
            raise AlgebraError("not a standard form")
        return self._decode(heap.cdr(w))

    def _decode(self, w):
        heap = self.heap
        tag = w & TAG_MASK
        if tag == FIXNUM or tag == HEAPOBJ:
            return Q(to_bigint(heap, w))
        if tag != CONS:
            raise AlgebraError("malformed standard form")
        head = heap.car(w)
        if head == self.sym_rn:
            pair = heap.cdr(w)
            return Q(to_bigint(heap, heap.car(pair)),
                     to_bigint(heap, heap.cdr(pair)))
        terms = []
        t = heap.cdr(w)
        while t != NIL:
            pair = heap.car(t)
            terms.append((fixnum_value(heap.car(pair)),
                          self._decode(heap.cdr(pair))))
            t = heap.cdr(t)
        return Poly(symbol_index(head), tuple(terms))

    def is_kernel(self, w):
        return w & TAG_MASK == SYMBOL and w != NIL and w != T

    def is_algebraic(self, w):
        """True for values the generic operators route to the algebra."""
        return self.is_kernel(w) or self.is_form(w)

    def to_form(self, ring, w):
        """Standard form for a number, kernel symbol or encoded form."""
        tag = w & TAG_MASK
        if tag == FIXNUM:
            return ring.const(Q(fixnum_value(w)))
        if tag == HEAPOBJ and self.heap.obj(w).kind == BIGINT:
            return ring.const(Q(self.heap.obj(w).data))
        if self.is_kernel(w):
            return ring.variable(symbol_index(w))
        if self.is_form(w):
            f = self.decode(w)
            return f if ring.modulus is None else _renormalize(ring, f)
        raise AlgebraError(
            f"not an algebraic value: {self.s.print(w)}")

    def simp(self, ring, w):
        """Standard form of a prefix expression (plus, times, expt...)."""
        s = self.s
        heap = self.heap
        if w & TAG_MASK != CONS or self.is_form(w):
            return self.to_form(ring, w)
        head = heap.car(w)
        args = []
        a = heap.cdr(w)
        while a & TAG_MASK == CONS:
            args.append(heap.car(a))
            a = heap.cdr(a)
        name = s.symtab.name(head) if head & TAG_MASK == SYMBOL else None
        if name == "quote" and len(args) == 1:
            return self.simp(ring, args[0])
        forms = [self.simp(ring, x) for x in args] if name != "expt" else None
        if name == "plus":
            r = Q_ZERO
            for f in forms:
                r = ring.add(r, f)
            return r
        if name == "times":
            r = ring.const(Q_ONE)
            for f in forms:
                r = ring.mul(r, f)
            return r
        if name == "difference" and len(forms) == 2:
            return ring.sub(forms[0], forms[1])
        if name == "minus" and len(forms) == 1:
            return ring.neg(forms[0])
        if name == "quotient" and len(forms) == 2:
            return ring.divide_const(forms[0], forms[1])
        if name == "expt" and len(args) == 2:
            n = args[1]
            if n & TAG_MASK != FIXNUM or fixnum_value(n) < 0:
                raise AlgebraError("exponent must be a nonnegative integer")
            return ring.pow(self.simp(ring, args[0]), fixnum_value(n))
        raise AlgebraError(f"cannot simplify {s.print(w)}")


def _renormalize(ring, f):
    if isinstance(f, Q):
        return ring.coef(f)
    terms = []
    for e, c in f.terms:
        c = _renormalize(ring, c)
        if not is_zero(c):
            terms.append((e, c))
    return _make_poly(f.var, terms)


def legendre_demo(k_max, var=0, ring=None):
    """P_0..P_k_max by Rodrigues: df((x^2-1)^k, x, k) / (2^k k!)."""
    ring = ring or PolyRing()
    x = ring.variable(var)
    base = ring.sub(ring.mul(x, x), Q_ONE)
    out = []
    two_k = ONE
    k_fact = ONE
    for k in range(k_max + 1):
        if k:
            two_k = two_k * BigInt.from_int(2)
            k_fact = k_fact * BigInt.from_int(k)
        d = ring.df(ring.pow(base, k), var, k)
        out.append(ring.divide_const(d, Q(two_k * k_fact)))
    return out
