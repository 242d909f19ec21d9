"""S-expression reader and printer.

Syntax::

    datum   := atom | '(' datum* ['.' datum] ')' | '[' datum* ']' | "'" datum
    atom    := integer | float | string | symbol | '#\\' char

Integers are ``-?[0-9]+``; floats need a point (``1.5``, ``-2.0e3``).
Strings use double quotes and write an embedded quote as ``""``.  A
``!`` escapes the next character of a symbol name.  ``%`` and ``;``
start comments that run to the end of the line.

Both directions are iterative, so deep or cyclic structure cannot blow
the host stack.  The printer marks a back-edge to a structure still
being printed with ``#<cycle>`` and gives up below ``MAX_DEPTH`` levels
with ``#<deep>``.
"""

import re

from .bignum import big_from_decimal, big_to_decimal
from .errors import ParseError
from .heap import BIGINT, CHUNK, FLOAT, STRING, VECTOR
from .value import (CONS, FIXNUM, HEAPOBJ, IMM_CHAR, IMM_EOF, IMM_UNBOUND,
                    IMMEDIATE, NIL, SYMBOL, TAG_MASK, fixnum_value,
                    immediate_data, immediate_subtag, make_char)

MAX_DEPTH = 10_000
CYCLE_MARK = "#<cycle>"
DEEP_MARK = "#<deep>"

_INT_RE = re.compile(r"-?[0-9]+\Z")
_FLOAT_RE = re.compile(r"-?[0-9]+\.[0-9]+(?:[eE][-+]?[0-9]+)?\Z")
_DELIMS = frozenset("()[]'\";% \t\n\r\f\v")


class Reader:
    """Reads successive data from one text buffer."""

    def __init__(self, session, text, pos=0):
        self.session = session
        self.text = text
        self.pos = pos

    def _where(self, pos=None):
        if pos is None:
            pos = self.pos
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def error(self, message, pos=None):
        line, col = self._where(pos)
        return ParseError(message, line, col)

    def skip_blank(self):
        text = self.text
        n = len(text)
        pos = self.pos
        while pos < n:
            c = text[pos]
            if c in " \t\n\r\f\v":
                pos += 1
            elif c in "%;":
                nl = text.find("\n", pos)
                pos = n if nl < 0 else nl + 1
            else:
                break
        self.pos = pos

    def at_end(self):
        self.skip_blank()
        return self.pos >= len(self.text)

    def _string(self):
        text = self.text
        start = self.pos
        pos = start + 1
        parts = []
        while True:
            q = text.find('"', pos)
            if q < 0:
                raise self.error("unterminated string", start)
            parts.append(text[pos:q])
            if text.startswith('"', q + 1):
                parts.append('"')
                pos = q + 2
            else:
                self.pos = q + 1
                return "".join(parts)

    def _atom_text(self):
        """Returns (text, escaped) for the atom starting at pos."""
        text = self.text
        n = len(text)
        pos = self.pos
        chars = []
        escaped = False
        while pos < n:
            c = text[pos]
            if c == "!":
                if pos + 1 >= n:
                    raise self.error("dangling ! escape", pos)
                chars.append(text[pos + 1])
                escaped = True
                pos += 2
            elif c in _DELIMS:
                break
            else:
                chars.append(c)
                pos += 1
        self.pos = pos
        return "".join(chars), escaped

    def _atom(self):
        s = self.session
        start = self.pos
        if self.text.startswith("#\\", start):
            if start + 2 >= len(self.text):
                raise self.error("missing character after #\\", start)
            code = ord(self.text[start + 2])
            if code > 255:
                raise self.error("character outside 8 bits", start)
            self.pos = start + 3
            return make_char(code)
        name, escaped = self._atom_text()
        if not escaped:
            if _INT_RE.match(name):
                return big_from_decimal(s.heap, name)
            if _FLOAT_RE.match(name):
                return s.make_float(float(name))
            if name.startswith("#<"):
                raise self.error(f"unreadable object {name}", start)
        if not name:
            raise self.error("empty symbol", start)
        return s.symtab.intern(name)

    def read(self):
        """Read one datum.  Raises ParseError at end of input."""
        s = self.session
        with s.heap.no_gc():
            return self._read()

    def _read(self):
        s = self.session
        heap = s.heap
        text = self.text
        # frame: [kind, items, tail, state, start]; kind in "(", "[", "'"
        # state: 0 normal, 1 after dot, 2 tail read
        stack = []
        while True:
            self.skip_blank()
            if self.pos >= len(text):
                if stack:
                    raise self.error("unbalanced parentheses: missing )",
                                     stack[-1][4])
                raise self.error("no datum before end of input")
            c = text[self.pos]
            datum_ready = False
            datum = None
            if c == "(" or c == "[":
                stack.append([c, [], NIL, 0, self.pos])
                self.pos += 1
                continue
            if c == "'":
                stack.append(["'", None, NIL, 0, self.pos])
                self.pos += 1
                continue
            if c == ")" or c == "]":
                if not stack or stack[-1][0] == "'":
                    raise self.error(f"unexpected {c}")
                kind, items, tail, state, start = stack.pop()
                if (kind == "(") != (c == ")"):
                    raise self.error(f"mismatched {c}")
                if state == 1:
                    raise self.error("missing datum after dot")
                self.pos += 1
                if kind == "[":
                    datum = heap.alloc_object(VECTOR, items)
                else:
                    datum = tail
                    for x in reversed(items):
                        datum = heap.alloc_cons(x, datum)
                datum_ready = True
            elif c == '"':
                datum = s.make_string(self._string())
                datum_ready = True
            elif c == "." and (self.pos + 1 >= len(text) or
                               text[self.pos + 1] in _DELIMS):
                if not stack or stack[-1][0] != "(":
                    raise self.error("dot outside a list")
                frame = stack[-1]
                if not frame[1] or frame[3] != 0:
                    raise self.error("bad dotted pair")
                frame[3] = 1
                self.pos += 1
                continue
            else:
                datum = self._atom()
                datum_ready = True
            if datum_ready:
                while True:
                    if not stack:
                        return datum
                    frame = stack[-1]
                    if frame[0] == "'":
                        stack.pop()
                        datum = heap.alloc_cons(
                            s.sym_quote, heap.alloc_cons(datum, NIL))
                        continue
                    if frame[3] == 1:
                        frame[2] = datum
                        frame[3] = 2
                    elif frame[3] == 2:
                        raise self.error("more than one datum after dot")
                    else:
                        frame[1].append(datum)
                    break


def read(session, text, pos=0):
    """Read the first datum of ``text``; returns (value, next position)."""
    r = Reader(session, text, pos)
    v = r.read()
    return v, r.pos


def read_all(session, text):
    """Read every datum in ``text`` into a Python list of words.

    The caller owns rooting: the words are only safe until the next
    allocation that may collect.
    """
    r = Reader(session, text)
    out = []
    with session.heap.no_gc():
        while not r.at_end():
            out.append(r._read())
    return out


# -- printer ---------------------------------------------------------------

def _symbol_text(name):
    out = []
    for c in name:
        if c in _DELIMS or c == "!" or c <= " ":
            out.append("!")
        out.append(c)
    text = "".join(out)
    if (_INT_RE.match(name) or _FLOAT_RE.match(name) or name == "."
            or name.startswith("#")):
        text = "!" + text
    return text


def float_text(x):
    t = repr(x)
    if "e" in t and "." not in t:
        mant, exp = t.split("e")
        t = f"{mant}.0e{exp}"
    return t


def atom_text(session, w):
    tag = w & TAG_MASK
    if tag == FIXNUM:
        return str(fixnum_value(w))
    if tag == SYMBOL:
        return _symbol_text(session.symtab.name(w))
    if tag == IMMEDIATE:
        sub = immediate_subtag(w)
        if sub == IMM_CHAR:
            return "#\\" + chr(immediate_data(w))
        if sub == IMM_UNBOUND:
            return "#<unbound>"
        if sub == IMM_EOF:
            return "#<eof>"
        return f"#<immediate {sub}>"
    if tag == HEAPOBJ:
        o = session.heap.obj(w)
        if o.kind == BIGINT:
            return big_to_decimal(session.heap, w)
        if o.kind == STRING:
            return '"' + o.data.replace('"', '""') + '"'
        if o.kind == FLOAT:
            return float_text(o.data)
        if o.kind == CHUNK:
            nm = o.data.name
            label = session.symtab.name(nm) if nm & TAG_MASK == SYMBOL \
                else "anonymous"
            return f"#<chunk {label}>"
    return f"#<word {w:#x}>"


def print_value(session, w):
    """Canonical single-line text of ``w``; total on cyclic data."""
    heap = session.heap
    mem = heap.mem
    objects = heap.objects
    out = []
    active = set()
    work = [(0, w, 0)]
    while work:
        op, a, b = work.pop()
        if op == 0:
            tag = a & TAG_MASK
            if tag == CONS:
                key = a
            elif tag == HEAPOBJ and objects[a >> 3].kind == VECTOR:
                key = a
            else:
                out.append(atom_text(session, a))
                continue
            if key in active:
                out.append(CYCLE_MARK)
                continue
            if b >= MAX_DEPTH:
                out.append(DEEP_MARK)
                continue
            active.add(key)
            if tag == CONS:
                out.append("(")
                chain = [a]
                work.append((3, chain, ")"))
                work.append((1, a, (b, chain)))
                work.append((0, mem[a >> 3], b + 1))
            else:
                out.append("[")
                work.append((3, [a], "]"))
                items = objects[a >> 3].data
                for k in range(len(items) - 1, -1, -1):
                    work.append((0, items[k], b + 1))
                    if k:
                        work.append((2, " ", 0))
        elif op == 1:
            d = mem[(a >> 3) + 1]
            if d == NIL:
                continue
            depth, chain = b
            if d & TAG_MASK == CONS:
                if d in active:
                    out.append(" . " + CYCLE_MARK)
                    continue
                active.add(d)
                chain.append(d)
                out.append(" ")
                work.append((1, d, b))
                work.append((0, mem[d >> 3], depth + 1))
            else:
                out.append(" . ")
                work.append((0, d, depth + 1))
        elif op == 2:
            out.append(a)
        else:
            out.append(b)
            active.difference_update(a)
    return "".join(out)


def equal(session, a, b):
    """Structural equality: numbers by value, strings by text."""
    from .bignum import integerp, big_cmp
    heap = session.heap
    work = [(a, b)]
    seen = set()
    while work:
        x, y = work.pop()
        if x == y:
            continue
        tx, ty = x & TAG_MASK, y & TAG_MASK
        if tx == CONS and ty == CONS:
            if (x, y) in seen:
                continue
            seen.add((x, y))
            work.append((heap.cdr(x), heap.cdr(y)))
            work.append((heap.car(x), heap.car(y)))
            continue
        if integerp(heap, x) and integerp(heap, y):
            if big_cmp(heap, x, y) != 0:
                return False
            continue
        if tx == HEAPOBJ and ty == HEAPOBJ:
            ox, oy = heap.obj(x), heap.obj(y)
            if ox.kind != oy.kind:
                return False
            if ox.kind in (STRING, FLOAT):
                if ox.data != oy.data:
                    return False
                continue
            if ox.kind == VECTOR:
                if len(ox.data) != len(oy.data):
                    return False
                work.extend(zip(ox.data, oy.data))
                continue
        return False
    return True
