"""Bytecode compiler, stack VM, verifier and disassembler.

Instruction encoding: one opcode byte, then at most one operand byte.
Operands of 256 or more are spelled with ``EXT b`` prefixes carrying the
high bytes, most significant first.  Jump operands are absolute byte
offsets of the target instruction (its first prefix, if any).

Locals are the first ``local_slots`` constants, which are symbols: the
VM binds them dynamically on entry exactly as the tree-walker does, so
both engines agree on free-variable references.  ``LOADLOCAL n`` is a
``LOADGLOBAL`` that may skip the unbound check.

Compilation is all-or-nothing per function: a form the compiler cannot
express raises CompileError and the caller keeps the interpreted lambda.
"""

from .builtins import REGISTRY
from .errors import ArityError, CompileError, StackOverflow, \
    UnboundVariable, VMFault
from .heap import CHUNK
from .sexpr import print_value
from .value import CONS, HEAPOBJ, NIL, SYMBOL, T, TAG_MASK, UNBOUND

OPCODES = ("LOADCONST", "LOADLOCAL", "STORELOCAL", "LOADGLOBAL",
           "STOREGLOBAL", "CALL", "JUMP", "JUMPNIL", "RETURN", "CONS",
           "CAR", "CDR", "ADD", "SUB", "MUL", "DIV", "REM", "EQ", "POP",
           "DUP")
(LOADCONST, LOADLOCAL, STORELOCAL, LOADGLOBAL, STOREGLOBAL, CALL, JUMP,
 JUMPNIL, RETURN, CONS_OP, CAR, CDR, ADD, SUB, MUL, DIV, REM, EQ, POP,
 DUP) = range(len(OPCODES))
EXT = 0xFF

WITH_OPERAND = frozenset((LOADCONST, LOADLOCAL, STORELOCAL, LOADGLOBAL,
                          STOREGLOBAL, CALL, JUMP, JUMPNIL))

# inline opcode -> (builtin name, argument count)
INLINE = {CONS_OP: ("cons", 2), CAR: ("car", 1), CDR: ("cdr", 1),
          ADD: ("plus", 2), SUB: ("difference", 2), MUL: ("times", 2),
          DIV: ("quotient", 2), REM: ("remainder", 2), EQ: ("eq", 2)}
_INLINE_BY_NAME = {name: (op, n) for op, (name, n) in INLINE.items()}


class ChunkData:
    """Payload of a CHUNK heap object.  Immutable once built."""

    __slots__ = ("constants", "code", "arity", "local_slots", "name",
                 "counts_depth", "_decoded")

    def __init__(self, constants, code, arity, local_slots, name=NIL,
                 counts_depth=True):
        self.constants = tuple(constants)
        self.code = bytes(code)
        self.arity = arity
        self.local_slots = local_slots
        self.name = name
        self.counts_depth = counts_depth
        self._decoded = None

    def decoded(self):
        """Per-offset opcode, operand and next offset; None between."""
        if self._decoded is None:
            n = len(self.code)
            ops = [None] * n
            args = [0] * n
            nxt = [0] * n
            for off, op, arg, end in decode(self.code):
                ops[off] = op
                args[off] = arg
                nxt[off] = end
            self._decoded = (ops, args, nxt)
        return self._decoded


def decode(code):
    """Yield (offset, opcode, operand, next offset) for each instruction."""
    pc = 0
    n = len(code)
    while pc < n:
        start = pc
        ext = 0
        while code[pc] == EXT:
            if pc + 1 >= n:
                raise VMFault(f"truncated EXT prefix at offset {pc}")
            ext = (ext << 8) | code[pc + 1]
            pc += 2
            if pc >= n:
                raise VMFault(f"EXT prefix without instruction at {start}")
        op = code[pc]
        if op >= len(OPCODES):
            raise VMFault(f"unknown opcode {op} at offset {pc}")
        pc += 1
        arg = 0
        if op in WITH_OPERAND:
            if pc >= n:
                raise VMFault(f"missing operand at offset {pc}")
            arg = (ext << 8) | code[pc]
            pc += 1
        elif ext:
            raise VMFault(f"EXT prefix on {OPCODES[op]} at offset {start}")
        yield start, op, arg, pc


def _operand_bytes(x):
    out = []
    while True:
        out.append(x & 0xFF)
        x >>= 8
        if not x:
            return out[::-1]


def _encode(op, arg):
    if op not in WITH_OPERAND:
        return [op]
    parts = _operand_bytes(arg)
    code = []
    for b in parts[:-1]:
        code += [EXT, b]
    return code + [op, parts[-1]]


# -- compiler -----------------------------------------------------------------

class _Label:
    __slots__ = ("ident",)

    def __init__(self, ident):
        self.ident = ident


class _Unit:
    """Compilation state of one chunk."""

    def __init__(self, locals_, arity, in_prog, name, counts_depth):
        self.constants = list(locals_)
        self.const_index = {}
        for i, w in enumerate(locals_):
            self.const_index.setdefault(("local", w), i)
        self.locals = {w: i for i, w in enumerate(locals_)}
        self.arity = arity
        self.local_slots = len(locals_)
        self.in_prog = in_prog
        self.labels = {}
        self.ir = []
        self.depth = 0
        self.name = name
        self.counts_depth = counts_depth
        self.n_labels = 0

    def const(self, w):
        i = self.const_index.get(w)
        if i is None:
            i = len(self.constants)
            self.constants.append(w)
            self.const_index[w] = i
        return i

    def label(self):
        self.n_labels += 1
        return _Label(self.n_labels)

    def place(self, lab):
        self.ir.append(lab)

    def emit(self, op, arg=0, effect=0):
        self.ir.append((op, arg))
        self.depth += effect


class Compiler:
    def __init__(self, session):
        self.s = session
        intern = session.symtab.intern
        self.forms = {intern(n): getattr(self, "_c_" + n) for n in
                      ("quote", "setq", "cond", "and", "or", "progn",
                       "lambda", "prog", "go", "return")}
        self.sym_lambda = intern("lambda")
        self.sym_prog = intern("prog")
        self.unsupported = {intern(n): n for n in ("de",)}
        self.inline = {}
        for name, (op, n) in _INLINE_BY_NAME.items():
            self.inline[intern(name)] = (op, n, REGISTRY[name][1])

    # -- entry points ---------------------------------------------------------

    def compile_function(self, name, lam):
        return self._guard(lambda: self._lambda_chunk(lam, name, True))

    def compile_toplevel(self, form):
        def build():
            prog = self._as_prog(form)
            if prog is not None:
                return self._prog_chunk((), prog, NIL, False)
            u = _Unit((), 0, False, NIL, False)
            self._expr(form, u)
            u.emit(RETURN)
            return self._finish(u)
        return self._guard(build)

    def _guard(self, build):
        heap = self.s.heap
        try:
            with heap.no_gc():
                return build()
        except RecursionError:
            raise CompileError("form too deeply nested to compile") from None

    # -- helpers --------------------------------------------------------------

    def _list(self, w, what):
        heap = self.s.heap
        out = []
        while w & TAG_MASK == CONS:
            out.append(heap.car(w))
            w = heap.cdr(w)
        if w != NIL:
            raise CompileError(f"improper list in {what}")
        return out

    def _variable(self, w, what):
        if w & TAG_MASK != SYMBOL or w == NIL or w == T:
            raise CompileError(f"{what}: bad variable")
        return w

    def _as_prog(self, form):
        heap = self.s.heap
        if form & TAG_MASK == CONS and heap.car(form) == self.sym_prog:
            return form
        return None

    def _lambda_chunk(self, lam, name, counts_depth):
        heap = self.s.heap
        if lam & TAG_MASK != CONS or heap.car(lam) != self.sym_lambda:
            raise CompileError("not a lambda expression")
        rest = self._list(heap.cdr(lam), "lambda")
        if not rest:
            raise CompileError("lambda without parameter list")
        params = [self._variable(p, "lambda")
                  for p in self._list(rest[0], "lambda parameters")]
        body = rest[1:]
        if len(body) == 1 and self._as_prog(body[0]) is not None:
            return self._prog_chunk(params, body[0], name, counts_depth)
        u = _Unit(params, len(params), False, name, counts_depth)
        self._body(body, u)
        u.emit(RETURN)
        return self._finish(u)

    def _prog_chunk(self, params, form, name, counts_depth):
        parts = self._list(self.s.heap.cdr(form), "prog")
        if not parts:
            raise CompileError("prog without variable list")
        pvars = [self._variable(v, "prog")
                 for v in self._list(parts[0], "prog variables")]
        stmts = parts[1:]
        u = _Unit(list(params) + pvars, len(params), True, name,
                  counts_depth)
        last = {}
        for k, st in enumerate(stmts):
            if st & TAG_MASK == SYMBOL:
                last[st] = k    # a repeated label: the last one wins
        for st in last:
            u.labels[st] = u.label()
        for k, st in enumerate(stmts):
            if st & TAG_MASK == SYMBOL:
                if last[st] == k:
                    u.place(u.labels[st])
                continue
            self._expr(st, u)
            u.emit(POP, effect=-1)
        u.emit(LOADCONST, u.const(NIL), 1)
        u.emit(RETURN)
        return self._finish(u)

    def _body(self, forms, u):
        if not forms:
            u.emit(LOADCONST, u.const(NIL), 1)
            return
        for k, f in enumerate(forms):
            if k:
                u.emit(POP, effect=-1)
            self._expr(f, u)

    def _finish(self, u):
        code = assemble(u.ir)
        data = ChunkData(u.constants, code, u.arity, u.local_slots, u.name,
                         u.counts_depth)
        problems = verify(data)
        if problems:
            raise VMFault("compiler produced invalid code: "
                          + "; ".join(problems))
        return self.s.heap.alloc_object(CHUNK, data)

    # -- expressions ----------------------------------------------------------

    def _expr(self, x, u):
        tag = x & TAG_MASK
        if tag == SYMBOL:
            if x == NIL or x == T:
                u.emit(LOADCONST, u.const(x), 1)
            elif x in u.locals:
                u.emit(LOADLOCAL, u.locals[x], 1)
            else:
                u.emit(LOADGLOBAL, u.const(x), 1)
            return
        if tag != CONS:
            u.emit(LOADCONST, u.const(x), 1)
            return
        heap = self.s.heap
        head = heap.car(x)
        args = self._list(heap.cdr(x), "call")
        if head & TAG_MASK == SYMBOL:
            special = self.forms.get(head)
            if special is not None:
                special(x, args, u)
                return
            if head in self.unsupported:
                raise CompileError(
                    f"unsupported special form {self.unsupported[head]}")
            inl = self.inline.get(head)
            if inl is not None and len(args) == inl[1] \
                    and self.s.symtab[head].function is inl[2]:
                for a in args:
                    self._expr(a, u)
                u.emit(inl[0], effect=1 - len(args))
                return
            u.emit(LOADCONST, u.const(head), 1)
        elif head & TAG_MASK == CONS and heap.car(head) == self.sym_lambda:
            inner = self._lambda_chunk(head, NIL, True)
            u.emit(LOADCONST, u.const(inner), 1)
        else:
            raise CompileError("call of a non-symbol head")
        for a in args:
            self._expr(a, u)
        u.emit(CALL, len(args), -len(args))

    def _c_quote(self, x, args, u):
        if len(args) != 1:
            raise CompileError("malformed quote")
        u.emit(LOADCONST, u.const(args[0]), 1)

    def _c_lambda(self, x, args, u):
        u.emit(LOADCONST, u.const(x), 1)

    def _c_setq(self, x, args, u):
        if len(args) != 2:
            raise CompileError("malformed setq")
        var = self._variable(args[0], "setq")
        self._expr(args[1], u)
        if var in u.locals:
            u.emit(STORELOCAL, u.locals[var])
        else:
            u.emit(STOREGLOBAL, u.const(var))

    def _c_progn(self, x, args, u):
        self._body(args, u)

    def _c_cond(self, x, clauses, u):
        end = u.label()
        for clause in clauses:
            if clause & TAG_MASK != CONS:
                raise CompileError("malformed cond clause")
            parts = self._list(clause, "cond clause")
            nxt = u.label()
            self._expr(parts[0], u)
            if len(parts) == 1:
                u.emit(DUP, effect=1)
                u.emit(JUMPNIL, nxt, -1)
                u.emit(JUMP, end)
                u.place(nxt)
                u.emit(POP, effect=-1)
            else:
                u.emit(JUMPNIL, nxt, -1)
                self._body(parts[1:], u)
                u.emit(JUMP, end)
                u.depth -= 1
                u.place(nxt)
        u.emit(LOADCONST, u.const(NIL), 1)
        u.place(end)

    def _c_and(self, x, args, u):
        self._junction(args, u, T, stop_on_nil=True)

    def _c_or(self, x, args, u):
        self._junction(args, u, NIL, stop_on_nil=False)

    def _junction(self, args, u, empty, stop_on_nil):
        if not args:
            u.emit(LOADCONST, u.const(empty), 1)
            return
        end = u.label()
        for k, a in enumerate(args):
            self._expr(a, u)
            if k == len(args) - 1:
                break
            u.emit(DUP, effect=1)
            if stop_on_nil:
                u.emit(JUMPNIL, end, -1)
                u.emit(POP, effect=-1)
            else:
                nxt = u.label()
                u.emit(JUMPNIL, nxt, -1)
                u.emit(JUMP, end)
                u.place(nxt)
                u.emit(POP, effect=-1)
        u.place(end)

    def _c_prog(self, x, args, u):
        inner = self._prog_chunk((), x, NIL, False)
        u.emit(LOADCONST, u.const(inner), 1)
        u.emit(CALL, 0)

    def _c_go(self, x, args, u):
        if len(args) != 1:
            raise CompileError("malformed go")
        if not u.in_prog or args[0] not in u.labels:
            raise CompileError("go to a label outside the current prog")
        for _ in range(u.depth):
            u.ir.append((POP, 0))
        u.ir.append((JUMP, u.labels[args[0]]))
        u.depth += 1   # go is an expression; its value is never used

    def _c_return(self, x, args, u):
        if len(args) > 1:
            raise CompileError("malformed return")
        if not u.in_prog:
            raise CompileError("return outside the current prog")
        if args:
            self._expr(args[0], u)
        else:
            u.emit(LOADCONST, u.const(NIL), 1)
        u.emit(RETURN)


def assemble(ir):
    """Resolve labels to byte offsets, growing EXT prefixes as needed."""
    sizes = {}
    while True:
        offsets = {}
        pos = 0
        for k, item in enumerate(ir):
            if isinstance(item, _Label):
                offsets[item.ident] = pos
            else:
                pos += sizes.get(k, 2 if item[0] in WITH_OPERAND else 1)
        changed = False
        code = []
        for k, item in enumerate(ir):
            if isinstance(item, _Label):
                continue
            op, arg = item
            if isinstance(arg, _Label):
                arg = offsets[arg.ident]
            enc = _encode(op, arg)
            if sizes.get(k, 2 if op in WITH_OPERAND else 1) != len(enc):
                sizes[k] = len(enc)
                changed = True
            code += enc
        if not changed:
            return bytes(code)


# -- verifier -----------------------------------------------------------------

_EFFECT = {LOADCONST: (0, 1), LOADLOCAL: (0, 1), LOADGLOBAL: (0, 1),
           STORELOCAL: (1, 0), STOREGLOBAL: (1, 0), RETURN: (1, -1),
           CONS_OP: (2, -1), CAR: (1, 0), CDR: (1, 0), ADD: (2, -1),
           SUB: (2, -1), MUL: (2, -1), DIV: (2, -1), REM: (2, -1),
           EQ: (2, -1), POP: (1, -1), DUP: (1, 1), JUMP: (0, 0),
           JUMPNIL: (1, -1)}


def verify(chunk):
    """Static checks; returns a list of problems (empty when valid).

    Every jump must land on an instruction boundary, operands must be in
    range, and every reachable instruction must be entered with a single
    stack depth that never goes negative.
    """
    problems = []
    try:
        instrs = {off: (op, arg, nxt)
                  for off, op, arg, nxt in decode(chunk.code)}
    except VMFault as e:
        return [str(e)]
    if not instrs:
        return ["empty code"]
    nconst = len(chunk.constants)
    for off, (op, arg, nxt) in instrs.items():
        if op in (LOADCONST, LOADGLOBAL, STOREGLOBAL) and arg >= nconst:
            problems.append(f"{off}: constant {arg} out of range")
        if op in (LOADLOCAL, STORELOCAL) and arg >= chunk.local_slots:
            problems.append(f"{off}: local {arg} out of range")
        if op in (JUMP, JUMPNIL) and arg not in instrs:
            problems.append(f"{off}: jump to {arg} is not an instruction "
                            "boundary")
    if problems:
        return problems
    depth_at = {0: 0}
    work = [0]
    while work:
        off = work.pop()
        d = depth_at[off]
        op, arg, nxt = instrs[off]
        if op == CALL:
            need, delta = arg + 1, -arg
        else:
            need, delta = _EFFECT[op]
        if d < need:
            problems.append(f"{off}: stack underflow in {OPCODES[op]}")
            continue
        d += delta
        if op == RETURN:
            continue
        succ = []
        if op == JUMP:
            succ.append(arg)
        else:
            if op == JUMPNIL:
                succ.append(arg)
            if nxt >= len(chunk.code):
                problems.append(f"{off}: control falls off the end")
                continue
            succ.append(nxt)
        for t in succ:
            if t in depth_at:
                if depth_at[t] != d:
                    problems.append(f"{t}: inconsistent stack depth "
                                    f"{depth_at[t]} vs {d}")
            else:
                depth_at[t] = d
                work.append(t)
    return problems


# -- disassembler -------------------------------------------------------------

def disassemble(session, w):
    """One line per instruction: ``offset opcode operands ; comment``."""
    c = session.heap.obj(w).data
    lines = []
    for off, op, arg, _ in decode(c.code):
        name = OPCODES[op]
        if op in WITH_OPERAND:
            text = f"{off:5d} {name:<11} {arg}"
        else:
            text = f"{off:5d} {name}"
        comment = None
        if op in (LOADCONST, LOADGLOBAL, STOREGLOBAL):
            comment = print_value(session, c.constants[arg])
        elif op in (LOADLOCAL, STORELOCAL):
            comment = print_value(session, c.constants[arg])
        elif op in (JUMP, JUMPNIL):
            comment = f"-> {arg}"
        if comment is not None:
            text = f"{text:<24} ; {comment}"
        lines.append(text)
    return "\n".join(lines) + "\n"


def disassemble_all(session, w):
    """The chunk and, depth first, every chunk among its constants."""
    heap = session.heap
    out = []
    seen = set()
    todo = [w]
    while todo:
        cw = todo.pop()
        if cw in seen:
            continue
        seen.add(cw)
        c = heap.obj(cw).data
        label = session.symtab.name(c.name) if c.name != NIL else "anonymous"
        out.append(f";; chunk {label} arity {c.arity} "
                   f"locals {c.local_slots}\n")
        out.append(disassemble(session, cw))
        inner = [k for k in c.constants
                 if k & TAG_MASK == HEAPOBJ and heap.obj(k).kind == CHUNK]
        todo.extend(reversed(inner))
    return "".join(out)


def is_chunk(session, w):
    return w & TAG_MASK == HEAPOBJ and session.heap.obj(w).kind == CHUNK


# -- virtual machine ----------------------------------------------------------

class VM:
    def __init__(self, session):
        self.s = session
        self.stack = []
        self.fns = {op: REGISTRY[name][1].fn for op, (name, _) in
                    INLINE.items()}

    def roots(self):
        return self.stack

    def execute(self, cw, args):
        s = self.s
        c = s.heap.obj(cw).data
        if len(args) != c.arity:
            label = s.symtab.name(c.name) if c.name != NIL else "lambda"
            raise ArityError(label, c.arity, len(args))
        counts = c.counts_depth
        if counts:
            if s.depth >= s.max_depth:
                raise StackOverflow(f"stack overflow: depth limit "
                                    f"{s.max_depth} exceeded")
            s.depth += 1
        stack = self.stack
        base = len(stack)
        stack.append(cw)
        bindings = s.bindings
        mark = len(bindings)
        symbols = s.symbols
        consts = c.constants
        arity = c.arity
        for i in range(c.local_slots):
            v = consts[i]
            sym = symbols[v >> 3]
            bindings.append(v)
            bindings.append(sym.value)
            sym.value = args[i] if i < arity else NIL
        try:
            return self._run(c)
        finally:
            del stack[base:]
            s.unbind(mark)
            if counts:
                s.depth -= 1

    def _run(self, c):
        s = self.s
        stack = self.stack
        push = stack.append
        pop = stack.pop
        symbols = s.symbols
        consts = c.constants
        fns = self.fns
        ops, opargs, nxt = c.decoded()
        pc = 0
        while True:
            op = ops[pc]
            a = opargs[pc]
            pc = nxt[pc]
            if op == LOADLOCAL:
                push(symbols[consts[a] >> 3].value)
            elif op == LOADCONST:
                push(consts[a])
            elif op == LOADGLOBAL:
                w = consts[a]
                v = symbols[w >> 3].value
                if v == UNBOUND:
                    if not s.algebraic:
                        raise UnboundVariable(symbols[w >> 3].name)
                    v = w
                push(v)
            elif op == JUMPNIL:
                if pop() == NIL:
                    pc = a
            elif op == JUMP:
                pc = a
            elif op == CALL:
                n = len(stack) - a
                r = s.apply(stack[n - 1], stack[n:])
                del stack[n - 1:]
                push(r)
            elif op == POP:
                pop()
            elif op == RETURN:
                return stack[-1]
            elif op == STORELOCAL or op == STOREGLOBAL:
                symbols[consts[a] >> 3].value = stack[-1]
            elif op == DUP:
                push(stack[-1])
            elif op == CAR or op == CDR:
                r = fns[op](s, [stack[-1]])
                stack[-1] = r
            elif op is None:
                raise VMFault(f"jump into the middle of an instruction "
                              f"at offset {pc}")
            elif CONS_OP <= op <= EQ:
                r = fns[op](s, stack[-2:])
                del stack[-2:]
                push(r)
            else:
                raise VMFault(f"unknown opcode {op}")
