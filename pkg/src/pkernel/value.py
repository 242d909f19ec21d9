"""Tagged one-word values and the symbol table.

A value is a 64-bit word held in a Python int.  The low three bits are the
type tag; the remaining 61 bits are either a signed fixnum or a handle.

    FIXNUM     payload is the signed integer itself
    CONS       payload is the byte address of a two-slot cell
    SYMBOL     payload is the symbol's index in the symbol table
    IMMEDIATE  payload is (data << 5) | subtag; characters and markers
    HEAPOBJ    payload is an index into the object table

The numbering is frozen: images store tags verbatim.
"""

FIXNUM = 0
CONS = 1
SYMBOL = 2
IMMEDIATE = 3
HEAPOBJ = 4

TAG_NAMES = {FIXNUM: "FIXNUM", CONS: "CONS", SYMBOL: "SYMBOL",
             IMMEDIATE: "IMMEDIATE", HEAPOBJ: "HEAPOBJ"}

TAG_BITS = 3
TAG_MASK = 7
WORD_MASK = (1 << 64) - 1

FIXNUM_BITS = 61
FIXNUM_MIN = -(1 << 60)
FIXNUM_MAX = (1 << 60) - 1
_FIX_SIGN = 1 << 60
_FIX_WRAP = 1 << 61

# immediate subtags
IMM_CHAR = 0
IMM_UNBOUND = 1
IMM_EOF = 2


def tag_of(v):
    return v & TAG_MASK


def fixnump(v):
    return v & TAG_MASK == FIXNUM


def consp(v):
    return v & TAG_MASK == CONS


def symbolp(v):
    return v & TAG_MASK == SYMBOL


def immediatep(v):
    return v & TAG_MASK == IMMEDIATE


def heapobjp(v):
    return v & TAG_MASK == HEAPOBJ


def fixnum_fits(i):
    return FIXNUM_MIN <= i <= FIXNUM_MAX


def encode_fixnum(i):
    """Box ``i`` as a fixnum word.  The caller guarantees the range."""
    return (i << TAG_BITS) & WORD_MASK


def fixnum_value(v):
    p = v >> TAG_BITS
    if p & _FIX_SIGN:
        p -= _FIX_WRAP
    return p


def make_immediate(subtag, data=0):
    return ((data << 5) | (subtag << TAG_BITS) | IMMEDIATE) & WORD_MASK


def immediate_subtag(v):
    return (v >> TAG_BITS) & 3


def immediate_data(v):
    return v >> 5


def make_char(code):
    if not 0 <= code < 256:
        raise ValueError(f"character code {code} outside 0..255")
    return make_immediate(IMM_CHAR, code)


def char_value(v):
    return immediate_data(v)


def charp(v):
    return v & TAG_MASK == IMMEDIATE and immediate_subtag(v) == IMM_CHAR


UNBOUND = make_immediate(IMM_UNBOUND)
EOF = make_immediate(IMM_EOF)


def symbol_word(index):
    return (index << TAG_BITS) | SYMBOL


def symbol_index(v):
    return v >> TAG_BITS


# NIL and T occupy the first two symbol slots of every session.
NIL = symbol_word(0)
T = symbol_word(1)


class Symbol:
    """One symbol table entry.

    ``function`` holds either a Builtin (host function), a value word
    (a lambda form or a chunk), or None when undefined.
    ``plist`` maps key words to value words; ``flags`` is an ordered set.
    """

    __slots__ = ("name", "value", "function", "plist", "flags")

    def __init__(self, name):
        self.name = name
        self.value = UNBOUND
        self.function = None
        self.plist = {}
        self.flags = {}

    def __repr__(self):
        return f"<Symbol {self.name}>"


class SymbolTable:
    """Interned symbols, indexed in interning order."""

    def __init__(self, bootstrap=True):
        self.symbols = []
        self.by_name = {}
        if bootstrap:
            nil = self.intern("nil")
            t = self.intern("t")
            self.symbols[symbol_index(nil)].value = NIL
            self.symbols[symbol_index(t)].value = T

    def intern(self, name):
        if not name:
            raise ValueError("symbol name must be nonempty")
        w = self.by_name.get(name)
        if w is None:
            w = symbol_word(len(self.symbols))
            self.symbols.append(Symbol(name))
            self.by_name[name] = w
        return w

    def lookup(self, name):
        return self.by_name.get(name)

    def __getitem__(self, w):
        return self.symbols[w >> TAG_BITS]

    def name(self, w):
        return self.symbols[w >> TAG_BITS].name

    def __len__(self):
        return len(self.symbols)

    def words(self):
        return [symbol_word(i) for i in range(len(self.symbols))]
