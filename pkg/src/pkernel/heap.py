"""Cons-cell arena, heap objects and a precise mark-and-sweep collector.

Cons cells live in ``mem``: cell *i* occupies slots ``2i`` (car) and
``2i+1`` (cdr), so its handle is the byte address ``16*i`` and the cons
word is ``(i << 4) | CONS``.  Shifting a cons word right by three bits
gives the car slot directly.

Every other heap datum is a HeapObject in ``objects`` with a header word
(kind + payload length).  Objects never move, so handles stay valid for
as long as the object is reachable.

Collection is precise.  Roots are the symbol table, tickets handed out
by :meth:`Heap.protect`, and any number of root providers (the
evaluator's shadow stack, the VM operand stack, the binding stack).
"""

import time
from contextlib import contextmanager
from dataclasses import dataclass

from .errors import ContractViolation, HeapExhausted
from .value import CONS, HEAPOBJ, TAG_MASK

STRING = 0
VECTOR = 1
BIGINT = 2
FLOAT = 3
CHUNK = 4

KIND_NAMES = {STRING: "STRING", VECTOR: "VECTOR", BIGINT: "BIGINT",
              FLOAT: "FLOAT", CHUNK: "CHUNK"}

WORD_BYTES = 8
CONS_WORDS = 2
DEFAULT_INITIAL = 1 << 20
DEFAULT_CAP = 512 << 20
TRIGGER = 0.8


class HeapObject:
    __slots__ = ("kind", "data")

    def __init__(self, kind, data):
        self.kind = kind
        self.data = data

    def payload_words(self):
        k = self.kind
        if k == VECTOR:
            return len(self.data)
        if k == STRING:
            return (len(self.data) + 7) // 8
        if k == BIGINT:
            return (len(self.data.digits) + 1) // 2
        if k == FLOAT:
            return 1
        c = self.data
        return 2 + len(c.constants) + (len(c.code) + 7) // 8

    def header(self):
        return (self.payload_words() << 8) | self.kind

    def children(self):
        if self.kind == VECTOR:
            return self.data
        if self.kind == CHUNK:
            return self.data.constants
        return ()


class RootTicket:
    __slots__ = ("ident",)

    def __init__(self, ident):
        self.ident = ident

    def __repr__(self):
        return f"<RootTicket {self.ident}>"


@dataclass
class CollectStats:
    live_slots: int
    reclaimed_slots: int
    reclaimed_conses: int
    reclaimed_objects: int
    duration: float


@dataclass
class HeapStats:
    allocations: int = 0
    collections: int = 0
    reclaimed_slots: int = 0
    reclaimed_conses: int = 0
    reclaimed_objects: int = 0
    grows: int = 0


class Heap:
    def __init__(self, symtab, initial_bytes=DEFAULT_INITIAL,
                 cap_bytes=DEFAULT_CAP, clock=time.perf_counter):
        if initial_bytes <= 0 or cap_bytes < initial_bytes:
            raise ValueError("heap sizes must satisfy 0 < initial <= cap")
        self.symtab = symtab
        self.clock = clock
        self.capacity = initial_bytes // WORD_BYTES
        self.cap = cap_bytes // WORD_BYTES
        self.used = 0
        self.mem = []
        self.alive = bytearray()
        self.free = []
        self.objects = []
        self.free_objects = []
        self.roots = {}
        self._next_ticket = 0
        self.providers = []
        self.inhibit = 0
        self.stats = HeapStats()
        self.last = None

    # -- allocation -------------------------------------------------------

    def _reserve(self, words):
        need = self.used + words
        if need > self.capacity * TRIGGER:
            if not self.inhibit:
                self.collect()
                need = self.used + words
            while need > self.capacity * TRIGGER and self.capacity < self.cap:
                self.capacity = min(self.capacity * 2, self.cap)
                self.stats.grows += 1
            if need > self.capacity:
                raise HeapExhausted(
                    f"heap exhausted: {need * WORD_BYTES} bytes needed, "
                    f"cap {self.cap * WORD_BYTES}")
        self.used = need
        self.stats.allocations += 1

    def alloc_cons(self, car, cdr):
        self._reserve(CONS_WORDS)
        mem = self.mem
        if self.free:
            i = self.free.pop()
            mem[2 * i] = car
            mem[2 * i + 1] = cdr
            self.alive[i] = 1
        else:
            i = len(mem) >> 1
            mem.append(car)
            mem.append(cdr)
            self.alive.append(1)
        return (i << 4) | CONS

    def alloc_object(self, kind, data):
        obj = HeapObject(kind, data)
        self._reserve(1 + obj.payload_words())
        if self.free_objects:
            j = self.free_objects.pop()
            self.objects[j] = obj
        else:
            j = len(self.objects)
            self.objects.append(obj)
        return (j << 3) | HEAPOBJ

    def car(self, w):
        return self.mem[w >> 3]

    def cdr(self, w):
        return self.mem[(w >> 3) + 1]

    def set_car(self, w, v):
        self.mem[w >> 3] = v

    def set_cdr(self, w, v):
        self.mem[(w >> 3) + 1] = v

    def obj(self, w):
        return self.objects[w >> 3]

    def kind_of(self, w):
        """Header subtype of a HEAPOBJ word, or None for other tags."""
        if w & TAG_MASK != HEAPOBJ:
            return None
        return self.objects[w >> 3].kind

    def header_word(self, w):
        return self.objects[w >> 3].header()

    # -- roots ------------------------------------------------------------

    def protect(self, v):
        self._next_ticket += 1
        ticket = RootTicket(self._next_ticket)
        self.roots[ticket.ident] = v
        return ticket

    def release(self, ticket):
        if ticket.ident not in self.roots:
            raise ContractViolation(f"{ticket!r} released twice or unknown")
        del self.roots[ticket.ident]

    def add_root_provider(self, provider):
        self.providers.append(provider)

    @contextmanager
    def no_gc(self):
        """Suspend collection; allocation grows the arena instead."""
        self.inhibit += 1
        try:
            yield
        finally:
            self.inhibit -= 1

    def _root_words(self):
        for sym in self.symtab.symbols:
            yield sym.value
            f = sym.function
            if type(f) is int:
                yield f
            if sym.plist:
                yield from sym.plist.keys()
                yield from sym.plist.values()
        yield from self.roots.values()
        for provider in self.providers:
            yield from provider()

    # -- collection ---------------------------------------------------------

    def collect(self):
        start = self.clock()
        mem = self.mem
        objects = self.objects
        mark = bytearray(len(self.alive))
        omark = bytearray(len(objects))
        stack = [w for w in self._root_words() if w & 7 in (CONS, HEAPOBJ)]
        pop = stack.pop
        push = stack.append
        while stack:
            w = pop()
            if w & 7 == CONS:
                i = w >> 4
                if mark[i]:
                    continue
                mark[i] = 1
                a = mem[2 * i]
                d = mem[2 * i + 1]
                if a & 7 in (CONS, HEAPOBJ):
                    push(a)
                if d & 7 in (CONS, HEAPOBJ):
                    push(d)
            elif w & 7 == HEAPOBJ:
                j = w >> 3
                if omark[j]:
                    continue
                omark[j] = 1
                o = objects[j]
                if o.kind == VECTOR or o.kind == CHUNK:
                    stack.extend(o.children())
                    if o.kind == CHUNK:
                        push(o.data.name)

        alive = self.alive
        free = self.free
        # cells that are allocated but unmarked
        dead = [i for i in range(len(alive)) if alive[i] and not mark[i]]
        for i in dead:
            alive[i] = 0
            mem[2 * i] = 0
            mem[2 * i + 1] = 0
        free.extend(dead)
        reclaimed_cells = len(dead)
        reclaimed_objs = 0
        reclaimed_obj_words = 0
        for j, o in enumerate(objects):
            if o is not None and not omark[j]:
                reclaimed_obj_words += 1 + o.payload_words()
                objects[j] = None
                self.free_objects.append(j)
                reclaimed_objs += 1

        reclaimed = reclaimed_cells * CONS_WORDS + reclaimed_obj_words
        self.used -= reclaimed
        st = self.stats
        st.collections += 1
        st.reclaimed_slots += reclaimed
        st.reclaimed_conses += reclaimed_cells
        st.reclaimed_objects += reclaimed_objs
        self.last = CollectStats(
            live_slots=self.used,
            reclaimed_slots=reclaimed,
            reclaimed_conses=reclaimed_cells,
            reclaimed_objects=reclaimed_objs,
            duration=self.clock() - start,
        )
        return self.last

    def live_conses(self):
        return sum(self.alive)

    def live_objects(self):
        return sum(1 for o in self.objects if o is not None)
