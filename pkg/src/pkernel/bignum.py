"""Arbitrary-precision integers with base 2**32 digits.

Two layers live here.  :class:`BigInt` is a plain immutable value (sign
plus a little-endian tuple of 32-bit digits) with schoolbook arithmetic;
the algebra layer uses it directly for coefficients.  The ``big_*``
functions work on kernel words: they accept fixnums or BIGINT heap
objects and always hand back a normalized word, demoting to a fixnum
whenever the result fits.

Every double-width intermediate fits in 64 bits, so no carry flag is
needed.  Multiplication is schoolbook only and division is Knuth's
algorithm D.
"""

from .errors import DivisionByZero, LispTypeError
from .heap import BIGINT
from .value import (FIXNUM, FIXNUM_MAX, FIXNUM_MIN, HEAPOBJ, TAG_MASK,
                    encode_fixnum, fixnum_value)

DIGIT_BITS = 32
BASE = 1 << DIGIT_BITS
MASK = BASE - 1
DEC_CHUNK = 10 ** 9
DEC_CHUNK_DIGITS = 9


# -- magnitude helpers (little-endian digit lists, no leading zeros) -----

def _trim(d):
    while d and d[-1] == 0:
        d.pop()
    return d


def _cmp_mag(a, b):
    if len(a) != len(b):
        return -1 if len(a) < len(b) else 1
    for i in range(len(a) - 1, -1, -1):
        if a[i] != b[i]:
            return -1 if a[i] < b[i] else 1
    return 0


def _add_mag(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = []
    carry = 0
    for i in range(len(b)):
        s = a[i] + b[i] + carry
        out.append(s & MASK)
        carry = s >> DIGIT_BITS
    for i in range(len(b), len(a)):
        s = a[i] + carry
        out.append(s & MASK)
        carry = s >> DIGIT_BITS
    if carry:
        out.append(carry)
    return out


def _sub_mag(a, b):
    """a - b for |a| >= |b|."""
    out = []
    borrow = 0
    for i in range(len(b)):
        s = a[i] - b[i] - borrow
        if s < 0:
            s += BASE
            borrow = 1
        else:
            borrow = 0
        out.append(s)
    for i in range(len(b), len(a)):
        s = a[i] - borrow
        if s < 0:
            s += BASE
            borrow = 1
        else:
            borrow = 0
        out.append(s)
    return _trim(out)


def _mul_mag(a, b):
    if not a or not b:
        return []
    if len(a) < len(b):
        a, b = b, a
    out = [0] * (len(a) + len(b))
    for j, bj in enumerate(b):
        if bj == 0:
            continue
        carry = 0
        k = j
        for ai in a:
            t = ai * bj + out[k] + carry
            out[k] = t & MASK
            carry = t >> DIGIT_BITS
            k += 1
        while carry:
            t = out[k] + carry
            out[k] = t & MASK
            carry = t >> DIGIT_BITS
            k += 1
    return _trim(out)


def _mul_small_add(a, m, c):
    """a*m + c in place for single-digit m and c."""
    carry = c
    for i in range(len(a)):
        t = a[i] * m + carry
        a[i] = t & MASK
        carry = t >> DIGIT_BITS
    if carry:
        a.append(carry)
    return a


def _divmod_small(a, d):
    """(a // d, a % d) for a single-digit divisor d > 0."""
    q = [0] * len(a)
    r = 0
    for i in range(len(a) - 1, -1, -1):
        cur = (r << DIGIT_BITS) | a[i]
        q[i] = cur // d
        r = cur - q[i] * d
    return _trim(q), r


def _shl(a, s):
    if s == 0:
        return list(a)
    out = []
    carry = 0
    for x in a:
        out.append(((x << s) & MASK) | carry)
        carry = x >> (DIGIT_BITS - s)
    out.append(carry)
    return out


def _shr(a, s):
    if s == 0:
        return _trim(list(a))
    out = []
    for i in range(len(a)):
        hi = a[i + 1] if i + 1 < len(a) else 0
        out.append((a[i] >> s) | ((hi << (DIGIT_BITS - s)) & MASK))
    return _trim(out)


def _divmod_mag(u, v):
    """Knuth algorithm D on magnitudes; v nonzero."""
    if _cmp_mag(u, v) < 0:
        return [], list(u)
    if len(v) == 1:
        q, r = _divmod_small(u, v[0])
        return q, ([r] if r else [])
    n = len(v)
    m = len(u) - n
    s = DIGIT_BITS - v[-1].bit_length()
    vn = _shl(v, s)[:n]
    un = _shl(u, s)
    if len(un) == len(u):
        un.append(0)
    vtop = vn[n - 1]
    vsec = vn[n - 2]
    q = [0] * (m + 1)
    for j in range(m, -1, -1):
        num = (un[j + n] << DIGIT_BITS) | un[j + n - 1]
        qhat = num // vtop
        rhat = num - qhat * vtop
        while qhat >= BASE or \
                qhat * vsec > ((rhat << DIGIT_BITS) | un[j + n - 2]):
            qhat -= 1
            rhat += vtop
            if rhat >= BASE:
                break
        borrow = 0
        carry = 0
        for i in range(n):
            p = qhat * vn[i] + carry
            carry = p >> DIGIT_BITS
            t = un[i + j] - (p & MASK) - borrow
            if t < 0:
                un[i + j] = t + BASE
                borrow = 1
            else:
                un[i + j] = t
                borrow = 0
        t = un[j + n] - carry - borrow
        if t < 0:
            un[j + n] = t + BASE
            qhat -= 1
            c = 0
            for i in range(n):
                t2 = un[i + j] + vn[i] + c
                un[i + j] = t2 & MASK
                c = t2 >> DIGIT_BITS
            un[j + n] = (un[j + n] + c) & MASK
        else:
            un[j + n] = t
        q[j] = qhat
    return _trim(q), _shr(un[:n], s)


class BigInt:
    """Immutable signed integer; ``sign`` is -1, 0 or +1."""

    __slots__ = ("sign", "digits")

    def __init__(self, sign, digits):
        digits = tuple(digits)
        if not digits:
            sign = 0
        self.sign = sign
        self.digits = digits

    @classmethod
    def _make(cls, sign, mag):
        _trim(mag)
        return cls(sign if mag else 0, mag)

    @classmethod
    def from_int(cls, i):
        """Split a host integer into digits."""
        sign = (i > 0) - (i < 0)
        i = abs(i)
        d = []
        while i:
            d.append(i & MASK)
            i >>= DIGIT_BITS
        return cls(sign, d)

    def to_int(self):
        r = 0
        for x in reversed(self.digits):
            r = (r << DIGIT_BITS) | x
        return -r if self.sign < 0 else r

    @classmethod
    def from_decimal(cls, s):
        if not isinstance(s, str):
            raise TypeError("decimal text expected")
        body = s[1:] if s[:1] == "-" else s
        if not body or not all("0" <= c <= "9" for c in body):
            raise ValueError(f"malformed integer literal {s!r}")
        head = len(body) % DEC_CHUNK_DIGITS or DEC_CHUNK_DIGITS
        mag = []
        _mul_small_add(mag, DEC_CHUNK, int(body[:head]))
        for k in range(head, len(body), DEC_CHUNK_DIGITS):
            _mul_small_add(mag, DEC_CHUNK,
                           int(body[k:k + DEC_CHUNK_DIGITS]))
        _trim(mag)
        return cls(-1 if s[0] == "-" else 1, mag)

    def to_decimal(self):
        if not self.sign:
            return "0"
        parts = []
        mag = list(self.digits)
        while mag:
            mag, r = _divmod_small(mag, DEC_CHUNK)
            parts.append(r)
        text = str(parts[-1]) + "".join(
            f"{p:09d}" for p in reversed(parts[:-1]))
        return "-" + text if self.sign < 0 else text

    def __repr__(self):
        return f"BigInt({self.to_decimal()})"

    def __str__(self):
        return self.to_decimal()

    def __eq__(self, other):
        if isinstance(other, int):
            other = BigInt.from_int(other)
        if not isinstance(other, BigInt):
            return NotImplemented
        return self.sign == other.sign and self.digits == other.digits

    def __hash__(self):
        return hash((self.sign, self.digits))

    def cmp(self, other):
        if self.sign != other.sign:
            return -1 if self.sign < other.sign else 1
        c = _cmp_mag(self.digits, other.digits)
        return -c if self.sign < 0 else c

    def __lt__(self, other):
        return self.cmp(other) < 0

    def __le__(self, other):
        return self.cmp(other) <= 0

    def __gt__(self, other):
        return self.cmp(other) > 0

    def __ge__(self, other):
        return self.cmp(other) >= 0

    def __bool__(self):
        return self.sign != 0

    def __neg__(self):
        return BigInt(-self.sign, self.digits)

    def __abs__(self):
        return BigInt(abs(self.sign), self.digits)

    def __add__(self, other):
        if not self.sign:
            return other
        if not other.sign:
            return self
        if self.sign == other.sign:
            return BigInt(self.sign, _add_mag(self.digits, other.digits))
        c = _cmp_mag(self.digits, other.digits)
        if c == 0:
            return ZERO
        if c > 0:
            return BigInt._make(self.sign,
                                _sub_mag(self.digits, other.digits))
        return BigInt._make(other.sign, _sub_mag(other.digits, self.digits))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not self.sign or not other.sign:
            return ZERO
        return BigInt(self.sign * other.sign,
                      _mul_mag(self.digits, other.digits))

    def divrem(self, other):
        """Truncated division: remainder takes the dividend's sign."""
        if not other.sign:
            raise ZeroDivisionError("division by zero")
        q, r = _divmod_mag(self.digits, other.digits)
        return (BigInt._make(self.sign * other.sign, q),
                BigInt._make(self.sign, r))

    def is_one(self):
        return self.sign == 1 and self.digits == (1,)

    def is_even(self):
        return not self.digits or not (self.digits[0] & 1)

    def fits_fixnum(self):
        if len(self.digits) > 2:
            return False
        return FIXNUM_MIN <= self.to_int() <= FIXNUM_MAX


ZERO = BigInt(0, ())
ONE = BigInt(1, (1,))


def gcd(a, b):
    a, b = abs(a), abs(b)
    while b:
        a, b = b, a.divrem(b)[1]
    return a


# -- kernel-word layer -------------------------------------------------------

def make_fixnum(heap, i):
    """Box a host integer, promoting to a BIGINT object outside 61 bits."""
    if FIXNUM_MIN <= i <= FIXNUM_MAX:
        return encode_fixnum(i)
    return heap.alloc_object(BIGINT, BigInt.from_int(i))


def make_integer(heap, b):
    """Normalize a BigInt into a word; small values become fixnums."""
    if b.fits_fixnum():
        return encode_fixnum(b.to_int())
    return heap.alloc_object(BIGINT, b)


def is_bignum(heap, w):
    return w & TAG_MASK == HEAPOBJ and heap.objects[w >> 3].kind == BIGINT


def integerp(heap, w):
    return w & TAG_MASK == FIXNUM or is_bignum(heap, w)


def to_bigint(heap, w, who="arithmetic"):
    if w & TAG_MASK == FIXNUM:
        return BigInt.from_int(fixnum_value(w))
    if w & TAG_MASK == HEAPOBJ:
        o = heap.objects[w >> 3]
        if o.kind == BIGINT:
            return o.data
    raise LispTypeError(f"{who}: non-integer argument")


def big_from_decimal(heap, s):
    try:
        return make_integer(heap, BigInt.from_decimal(s))
    except ValueError as exc:
        from .errors import ParseError
        raise ParseError(str(exc)) from None


def big_to_decimal(heap, w):
    if w & TAG_MASK == FIXNUM:
        return str(fixnum_value(w))
    return to_bigint(heap, w, "big_to_decimal").to_decimal()


def big_add(heap, a, b):
    if a & TAG_MASK == FIXNUM and b & TAG_MASK == FIXNUM:
        return make_fixnum(heap, fixnum_value(a) + fixnum_value(b))
    return make_integer(heap, to_bigint(heap, a, "plus") +
                        to_bigint(heap, b, "plus"))


def big_sub(heap, a, b):
    if a & TAG_MASK == FIXNUM and b & TAG_MASK == FIXNUM:
        return make_fixnum(heap, fixnum_value(a) - fixnum_value(b))
    return make_integer(heap, to_bigint(heap, a, "difference") -
                        to_bigint(heap, b, "difference"))


_HALF = 1 << 30


def big_mul(heap, a, b):
    if a & TAG_MASK == FIXNUM and b & TAG_MASK == FIXNUM:
        x = fixnum_value(a)
        y = fixnum_value(b)
        if -_HALF < x < _HALF and -_HALF < y < _HALF:
            return encode_fixnum(x * y)
    return make_integer(heap, to_bigint(heap, a, "times") *
                        to_bigint(heap, b, "times"))


def big_divrem(heap, a, b):
    if a & TAG_MASK == FIXNUM and b & TAG_MASK == FIXNUM:
        x = fixnum_value(a)
        y = fixnum_value(b)
        if y == 0:
            raise DivisionByZero("division by zero")
        q = abs(x) // abs(y)
        if (x < 0) != (y < 0):
            q = -q
        return make_fixnum(heap, q), encode_fixnum(x - q * y)
    x = to_bigint(heap, a, "quotient")
    y = to_bigint(heap, b, "quotient")
    if not y:
        raise DivisionByZero("division by zero")
    q, r = x.divrem(y)
    with heap.no_gc():
        return make_integer(heap, q), make_integer(heap, r)


def big_cmp(heap, a, b):
    if a & TAG_MASK == FIXNUM and b & TAG_MASK == FIXNUM:
        x = fixnum_value(a)
        y = fixnum_value(b)
        return (x > y) - (x < y)
    return to_bigint(heap, a, "compare").cmp(to_bigint(heap, b, "compare"))
