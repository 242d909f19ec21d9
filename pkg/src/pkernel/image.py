"""Portable session images.

Layout (all multi-byte integers little-endian)::

    "PKRN"  u32 version  u32 flags
    varuint nsymbols, then per symbol: varuint len, UTF-8 name
    per symbol, in table order:
        value record, function record,
        varuint nprops, then (key record, value record) pairs,
        varuint nflags, then one record per flag

A record is a tag byte and a payload.  Conses and heap objects get ids
in the order they are first written; a later occurrence is written as a
back-reference to its id, which preserves sharing and cycles.  Children
follow their parent (preorder, car before cdr), and both directions walk
the graph with explicit stacks.
"""

import struct

from .bignum import BigInt, make_fixnum
from .builtins import REGISTRY, Builtin
from .bytecode import ChunkData, verify
from .errors import ImageError
from .heap import BIGINT, CHUNK, FLOAT, STRING, VECTOR
from .value import (CONS, EOF, FIXNUM, IMM_CHAR, IMM_EOF,
                    IMM_UNBOUND, IMMEDIATE, SYMBOL, TAG_MASK, UNBOUND,
                    fixnum_value, immediate_data, immediate_subtag, make_char,
                    symbol_word)

MAGIC = b"PKRN"
VERSION = 1

(R_FIXNUM, R_SYMBOL, R_CONS, R_STRING, R_VECTOR, R_BIGINT, R_FLOAT, R_CHUNK,
 R_BACKREF, R_CHAR, R_UNBOUND, R_EOF, R_BUILTIN, R_NONE) = range(14)

RECORD_NAMES = ("FIXNUM", "SYMBOL", "CONS", "STRING", "VECTOR", "BIGINT",
                "FLOAT", "CHUNK", "BACKREF", "CHAR", "UNBOUND", "EOF",
                "BUILTIN", "NONE")


def _varuint(out, n):
    while True:
        b = n & 0x7F
        n >>= 7
        if n:
            out.append(b | 0x80)
        else:
            out.append(b)
            return


def _zigzag(i):
    return i * 2 if i >= 0 else -i * 2 - 1


def _unzigzag(u):
    return u >> 1 if not u & 1 else -((u + 1) >> 1)


def _bytes(out, data):
    _varuint(out, len(data))
    out += data


# -- writing ------------------------------------------------------------------

class _Writer:
    def __init__(self, session):
        self.s = session
        self.out = bytearray()
        self.ids = {}

    def value(self, w):
        out = self.out
        heap = self.s.heap
        ids = self.ids
        stack = [w]
        while stack:
            w = stack.pop()
            tag = w & TAG_MASK
            if tag == FIXNUM:
                out.append(R_FIXNUM)
                _varuint(out, _zigzag(fixnum_value(w)))
            elif tag == SYMBOL:
                out.append(R_SYMBOL)
                _varuint(out, w >> 3)
            elif tag == IMMEDIATE:
                sub = immediate_subtag(w)
                if sub == IMM_CHAR:
                    out.append(R_CHAR)
                    _varuint(out, immediate_data(w))
                elif sub == IMM_UNBOUND:
                    out.append(R_UNBOUND)
                elif sub == IMM_EOF:
                    out.append(R_EOF)
                else:
                    raise ImageError(f"cannot serialize immediate {w:#x}")
            elif w in ids:
                out.append(R_BACKREF)
                _varuint(out, ids[w])
            elif tag == CONS:
                ids[w] = len(ids)
                out.append(R_CONS)
                stack.append(heap.cdr(w))
                stack.append(heap.car(w))
            else:
                ids[w] = len(ids)
                self._object(heap.obj(w), stack)

    def _object(self, o, stack):
        out = self.out
        k = o.kind
        if k == STRING:
            out.append(R_STRING)
            _bytes(out, o.data.encode("utf-8"))
        elif k == FLOAT:
            out.append(R_FLOAT)
            out += struct.pack("<d", o.data)
        elif k == BIGINT:
            b = o.data
            out.append(R_BIGINT)
            out.append(1 if b.sign < 0 else 0)
            _varuint(out, len(b.digits))
            for d in b.digits:
                out += struct.pack("<I", d)
        elif k == VECTOR:
            out.append(R_VECTOR)
            _varuint(out, len(o.data))
            stack.extend(reversed(o.data))
        elif k == CHUNK:
            c = o.data
            out.append(R_CHUNK)
            _varuint(out, c.name >> 3)
            _varuint(out, c.arity)
            _varuint(out, c.local_slots)
            out.append(1 if c.counts_depth else 0)
            _bytes(out, c.code)
            _varuint(out, len(c.constants))
            stack.extend(reversed(c.constants))
        else:
            raise ImageError(f"cannot serialize heap object kind {k}")

    def function(self, f):
        if f is None:
            self.out.append(R_NONE)
        elif isinstance(f, Builtin):
            self.out.append(R_BUILTIN)
            _bytes(self.out, f.name.encode("utf-8"))
        else:
            self.value(f)


def dump(session):
    """Serialize the session's symbol table and everything it reaches."""
    w = _Writer(session)
    out = w.out
    out += MAGIC
    out += struct.pack("<II", VERSION, 0)
    symbols = session.symtab.symbols
    _varuint(out, len(symbols))
    for sym in symbols:
        _bytes(out, sym.name.encode("utf-8"))
    for sym in symbols:
        w.value(sym.value)
        w.function(sym.function)
        _varuint(out, len(sym.plist))
        for key, val in sym.plist.items():
            w.value(key)
            w.value(val)
        _varuint(out, len(sym.flags))
        for flag in sym.flags:
            w.value(flag)
    return bytes(out)


def cell_listing(session):
    """Printed value, function, property and flag cells of every symbol.

    Two sessions with equal listings are indistinguishable to programs;
    compiled functions are shown with their full disassembly.
    """
    from .bytecode import disassemble_all, is_chunk
    from .sexpr import print_value
    lines = []
    for sym in session.symtab.symbols:
        f = sym.function
        if f is None:
            ftext = "-"
        elif isinstance(f, Builtin):
            ftext = f"#<builtin {f.name}>"
        elif is_chunk(session, f):
            ftext = "\n" + disassemble_all(session, f).rstrip("\n")
        else:
            ftext = print_value(session, f)
        props = " ".join(f"{print_value(session, k)}={print_value(session, v)}"
                         for k, v in sym.plist.items())
        flags = " ".join(print_value(session, k) for k in sym.flags)
        lines.append(f"{sym.name}\tvalue={print_value(session, sym.value)}"
                     f"\tprops=[{props}]\tflags=[{flags}]\tfunction={ftext}")
    return "\n".join(lines) + "\n"


def save_image(session, path):
    """Write an image file; returns the number of bytes written."""
    from .cli import platform
    data = dump(session)
    try:
        return platform.write_bytes(path, data)
    except OSError as e:
        raise ImageError(f"cannot write image {path}: {e.strerror or e}") \
            from None


# -- reading ------------------------------------------------------------------

class _Reader:
    def __init__(self, data, session):
        self.data = data
        self.pos = 0
        self.s = session
        self.ids = []

    def fail(self, message, pos=None):
        raise ImageError(message, self.pos if pos is None else pos)

    def byte(self):
        if self.pos >= len(self.data):
            self.fail("truncated image")
        b = self.data[self.pos]
        self.pos += 1
        return b

    def take(self, n):
        if self.pos + n > len(self.data):
            self.fail("truncated image")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def varuint(self):
        n = 0
        shift = 0
        start = self.pos
        while True:
            b = self.byte()
            n |= (b & 0x7F) << shift
            if not b & 0x80:
                return n
            shift += 7
            if shift > 70:
                self.fail("malformed varuint", start)

    def text(self):
        n = self.varuint()
        start = self.pos
        try:
            return self.take(n).decode("utf-8")
        except UnicodeDecodeError:
            self.fail("malformed UTF-8 text", start)

    def symbol(self, index, at):
        if index >= len(self.s.symtab.symbols):
            self.fail(f"symbol index {index} out of range", at)
        return symbol_word(index)

    def value(self):
        """One record, iteratively; containers are filled after creation."""
        heap = self.s.heap
        result = []
        # each task is (target, field): a list to append to, a cons
        # car/cdr slot, or a final fixup callable with field None
        tasks = [(result, "append")]
        while tasks:
            target, field = tasks.pop()
            if field is None:
                target()
                continue
            at = self.pos
            tag = self.byte()
            if tag == R_FIXNUM:
                v = _unzigzag(self.varuint())
                v = make_fixnum(heap, v)
            elif tag == R_SYMBOL:
                v = self.symbol(self.varuint(), at)
            elif tag == R_CHAR:
                v = make_char(self.varuint())
            elif tag == R_UNBOUND:
                v = UNBOUND
            elif tag == R_EOF:
                v = EOF
            elif tag == R_BACKREF:
                ref = self.varuint()
                if ref >= len(self.ids):
                    self.fail(f"dangling back-reference {ref}", at)
                v = self.ids[ref]
            elif tag == R_CONS:
                v = heap.alloc_cons(0, 0)
                self.ids.append(v)
                tasks.append((v, "cdr"))
                tasks.append((v, "car"))
            elif tag == R_STRING:
                v = heap.alloc_object(STRING, self.text())
                self.ids.append(v)
            elif tag == R_FLOAT:
                v = heap.alloc_object(FLOAT,
                                      struct.unpack("<d", self.take(8))[0])
                self.ids.append(v)
            elif tag == R_BIGINT:
                neg = self.byte()
                n = self.varuint()
                digits = struct.unpack(f"<{n}I", self.take(4 * n))
                if n == 0 or digits[-1] == 0 or neg > 1:
                    self.fail("malformed bignum", at)
                v = heap.alloc_object(BIGINT,
                                      BigInt(-1 if neg else 1, digits))
                self.ids.append(v)
            elif tag == R_VECTOR:
                n = self.varuint()
                items = [0] * n
                v = heap.alloc_object(VECTOR, items)
                self.ids.append(v)
                for i in reversed(range(n)):
                    tasks.append((items, i))
            elif tag == R_CHUNK:
                v = self._chunk(at, tasks)
            else:
                self.fail(f"unknown record tag {tag}", at)
            self._deliver(target, field, v)
        return result[0]

    def _chunk(self, at, tasks):
        heap = self.s.heap
        name = self.symbol(self.varuint(), at)
        arity = self.varuint()
        slots = self.varuint()
        counts = self.byte()
        code = bytes(self.take(self.varuint()))
        n = self.varuint()
        data = ChunkData((), code, arity, slots, name, bool(counts))
        consts = [0] * n
        v = heap.alloc_object(CHUNK, data)
        self.ids.append(v)

        def finish():
            data.constants = tuple(consts)
            problems = verify(data)
            if problems:
                self.fail(f"invalid chunk code: {problems[0]}", at)
        tasks.append((finish, None))
        for i in reversed(range(n)):
            tasks.append((consts, i))
        return v

    def _deliver(self, target, field, v):
        if field == "append":
            target.append(v)
        elif field == "car":
            self.s.heap.set_car(target, v)
        elif field == "cdr":
            self.s.heap.set_cdr(target, v)
        else:
            target[field] = v

    def function(self):
        at = self.pos
        if self.pos < len(self.data):
            tag = self.data[self.pos]
            if tag == R_NONE:
                self.pos += 1
                return None
            if tag == R_BUILTIN:
                self.pos += 1
                name = self.text()
                entry = REGISTRY.get(name)
                if entry is None:
                    self.fail(f"image refers to unknown builtin {name}", at)
                return entry[1]
        return self.value()


def load(data, **session_options):
    """Build a fresh session from image bytes.

    Nothing is returned unless the whole image loads, so a defective file
    never leaves a partial session behind.
    """
    from .session import Session
    data = bytes(data)
    if len(data) < 12:
        raise ImageError("truncated image header", len(data))
    if data[:4] != MAGIC:
        raise ImageError(f"bad magic {data[:4]!r}, expected {MAGIC!r}", 0)
    version, _flags = struct.unpack("<II", data[4:12])
    if version != VERSION:
        raise ImageError(f"unsupported image version {version} "
                         f"(this build reads version {VERSION})", 4)
    s = Session(_blank=True, **session_options)
    r = _Reader(data, s)
    r.pos = 12
    symtab = s.symtab
    with s.heap.no_gc():
        n = r.varuint()
        for i in range(n):
            at = r.pos
            name = r.text()
            if not name or symtab.lookup(name) is not None:
                r.fail(f"bad or duplicate symbol name {name!r}", at)
            symtab.intern(name)
        for sym in symtab.symbols:
            sym.value = r.value()
            sym.function = r.function()
            for _ in range(r.varuint()):
                key = r.value()
                sym.plist[key] = r.value()
            for _ in range(r.varuint()):
                sym.flags[r.value()] = True
        if r.pos != len(data):
            r.fail("trailing bytes after image body")
        if symtab.lookup("nil") != symbol_word(0) or \
                symtab.lookup("t") != symbol_word(1):
            r.fail("image does not start with nil and t", 12)
    s.wire()
    return s


def load_image(path, **session_options):
    from .cli import platform
    try:
        data = platform.read_bytes(path)
    except OSError as e:
        raise ImageError(f"cannot read image {path}: {e.strerror or e}") \
            from None
    return load(data, **session_options)
