"""A kernel session: heap, symbol table, both engines and the top level.

Programs are run one top-level form at a time.  Each form produces an
:class:`Outcome` holding the text it printed, its echoed value and any
error message, which is what the command line prints and what the
differential engine compares.
"""

from dataclasses import dataclass

from . import modular
from .algebra import Codec, render
from .builtins import REGISTRY, Builtin
from .bytecode import VM, Compiler
from .errors import (ArityError, CompileError, KernelError, LispError,
                     LispTypeError, ParseError, StackOverflow,
                     UndefinedFunction)
from .evaluator import Evaluator, GoSignal, ReturnSignal, instate_reference
from .heap import CHUNK, DEFAULT_CAP, DEFAULT_INITIAL, FLOAT, STRING, Heap
from .sexpr import Reader, print_value, read_all
from .value import (CONS, HEAPOBJ, NIL, SYMBOL, TAG_MASK, UNBOUND,
                    SymbolTable)

ENGINES = ("tree", "byte")
MODES = ("lisp", "rlisp")


@dataclass
class Outcome:
    output: str
    echo: str | None = None
    error: str | None = None

    def key(self):
        return (self.output, self.echo, self.error)



class Session:
    def __init__(self, engine="tree", mode="lisp", natives=False,
                 heap_initial=DEFAULT_INITIAL, heap_cap=DEFAULT_CAP,
                 max_depth=10_000, clock=None, runner=None,
                 dialect="fn-first", _blank=False):
        if engine not in ENGINES:
            raise ValueError(f"unknown engine {engine!r}")
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        if runner is None:
            from .cli.platform import run_deep
            runner = run_deep
        self.engine = engine
        self.mode = mode
        self.algebraic = mode == "rlisp"
        self.dialect = dialect
        self.runner = runner
        self.symtab = SymbolTable(bootstrap=not _blank)
        self.symbols = self.symtab.symbols
        heap_kwargs = {} if clock is None else {"clock": clock}
        self.heap = Heap(self.symtab, heap_initial, heap_cap, **heap_kwargs)
        self.bindings = []
        self.pinned = []
        self.depth = 0
        self.max_depth = max_depth
        self._out = []
        self._input = ""
        self._input_pos = 0
        self.input_source = None    # callable giving more text, or ""
        self.reference_report = []
        if _blank:
            return      # the image loader fills the table, then calls wire()
        self.wire()
        for name, (group, b) in REGISTRY.items():
            if group in ("core", "algebra"):
                self.symtab[self.symtab.intern(name)].function = b
        self.symtab[self.sym_modulus].value = NIL
        self._install_natives(natives)
        self.reference_report = self.instate_source(modular.REFERENCE_SOURCE)

    def wire(self):
        """Intern the kernel's own symbols and build both engines."""
        intern = self.symtab.intern
        self.sym_quote = intern("quote")
        self.sym_lambda = intern("lambda")
        self.sym_de = intern("de")
        self.sym_native = intern("native")
        self.sym_modulus = intern(modular.MODULUS_VAR)
        self.codec = Codec(self)
        self.evaluator = Evaluator(self)
        self.vm = VM(self)
        self.compiler = Compiler(self)
        heap = self.heap
        heap.add_root_provider(lambda: self.bindings)
        heap.add_root_provider(lambda: self.pinned)
        heap.add_root_provider(self.evaluator.roots)
        heap.add_root_provider(self.vm.roots)

    def _install_natives(self, natives):
        if natives is True:
            names = modular.MOD_FUNCTIONS
        elif not natives:
            names = ()
        else:
            names = tuple(natives)
        for name in names:
            entry = REGISTRY.get(name)
            if entry is None or entry[0] != "native":
                raise ValueError(f"no native implementation of {name}")
            sym = self.symtab[self.symtab.intern(name)]
            sym.function = entry[1]
            sym.flags[self.sym_native] = True

    # -- reference library --------------------------------------------------

    def instate_source(self, text):
        """Read ``(de name params . body)`` forms and instate them."""
        mark = len(self.pinned)
        forms = read_all(self, text)
        self.pinned.extend(forms)
        try:
            defs = []
            heap = self.heap
            for f in forms:
                if f & TAG_MASK != CONS or heap.car(f) != self.sym_de:
                    raise LispError("reference library: expected a de form, "
                                    f"got {self.print(f)}")
                rest = heap.cdr(f)
                lam = heap.alloc_cons(self.sym_lambda, heap.cdr(rest))
                self.pinned.append(lam)
                defs.append((heap.car(rest), lam))
            return instate_reference(self, defs)
        finally:
            del self.pinned[mark:]

    # -- values ---------------------------------------------------------------

    def make_float(self, x):
        return self.heap.alloc_object(FLOAT, float(x))

    def make_string(self, text):
        return self.heap.alloc_object(STRING, text)

    def print(self, w):
        return print_value(self, w)

    def render(self, w):
        """Text for ``write``: strings raw, algebra in infix."""
        tag = w & TAG_MASK
        if tag == HEAPOBJ and self.heap.obj(w).kind == STRING:
            return self.heap.obj(w).data
        if self.codec.is_form(w):
            f = self.codec.decode(w)
            return render(f, lambda i: self.symbols[i].name)
        return self.print(w)

    def write(self, text):
        self._out.append(text)

    def take_output(self):
        text = "".join(self._out)
        self._out.clear()
        return text

    def feed_input(self, text):
        self._input = self._input[self._input_pos:] + text
        self._input_pos = 0

    def read_input(self):
        """Next datum of the input stream, or None at end of input."""
        while True:
            r = Reader(self, self._input, self._input_pos)
            if not r.at_end():
                try:
                    v = r.read()
                except ParseError:
                    if not self._pull_input():
                        raise
                    continue
                self._input_pos = r.pos
                return v
            if not self._pull_input():
                self._input_pos = len(self._input)
                return None

    def _pull_input(self):
        more = self.input_source() if self.input_source else ""
        if not more:
            return False
        self.feed_input(more)
        return True

    # -- modulus --------------------------------------------------------------

    def modulus_value(self):
        v = self.symbols[self.sym_modulus >> 3].value
        return None if v == NIL or v == UNBOUND else v

    def set_modulus(self, w):
        modular.check_modulus(self, w)
        sym = self.symbols[self.sym_modulus >> 3]
        old = sym.value
        sym.value = w
        return NIL if old == UNBOUND else old

    # -- functions ------------------------------------------------------------

    def unbind(self, mark):
        b = self.bindings
        symbols = self.symbols
        while len(b) > mark:
            old = b.pop()
            symbols[b.pop() >> 3].value = old

    def define_function(self, name, lam, replace_builtin=True):
        sym = self.symtab[name]
        if not replace_builtin and isinstance(sym.function, Builtin):
            return
        self.pinned.append(lam)
        try:
            fn = lam
            if self.engine == "byte":
                try:
                    fn = self.compiler.compile_function(name, lam)
                except CompileError:
                    fn = lam
            sym.function = fn
        finally:
            self.pinned.pop()

    def install_function(self, name, w):
        if w & TAG_MASK == CONS and self.heap.car(w) == self.sym_lambda:
            self.define_function(name, w)
        elif w & TAG_MASK == HEAPOBJ and self.heap.obj(w).kind == CHUNK:
            self.symtab[name].function = w
        else:
            raise LispTypeError(f"putd: not a function: {self.print(w)}")

    def apply(self, fn, args):
        if fn & TAG_MASK == SYMBOL:
            sym = self.symbols[fn >> 3]
            f = sym.function
            if f is None:
                raise UndefinedFunction(sym.name)
            if type(f) is Builtin:
                n = len(args)
                if n < f.min_args or (f.max_args is not None
                                      and n > f.max_args):
                    raise ArityError(f.name, f.arity_text(), n)
                return f.fn(self, args)
            return self._apply_word(f, args, sym.name)
        return self._apply_word(fn, args, "lambda")

    def _apply_word(self, f, args, name):
        tag = f & TAG_MASK
        if tag == CONS and self.heap.car(f) == self.sym_lambda:
            return self.evaluator.apply_lambda(f, args, name)
        if tag == HEAPOBJ and self.heap.obj(f).kind == CHUNK:
            return self.vm.execute(f, args)
        raise LispTypeError(f"not a function: {self.print(f)}")

    # -- top level ------------------------------------------------------------

    def eval(self, form):
        """Evaluate one top-level form with the session's engine."""
        mark = len(self.pinned)
        self.pinned.append(form)
        try:
            if self.engine == "byte":
                try:
                    chunk = self.compiler.compile_toplevel(form)
                except CompileError:
                    return self.evaluator.eval(form)
                self.pinned.append(chunk)
                return self.vm.execute(chunk, [])
            return self.evaluator.eval(form)
        except GoSignal as g:
            raise LispError(f"go: no enclosing prog has label "
                            f"{self.print(g.label)}") from None
        except ReturnSignal:
            raise LispError("return: not inside a prog") from None
        except RecursionError:
            raise StackOverflow("stack overflow: host recursion limit") \
                from None
        finally:
            del self.pinned[mark:]
            if not mark:
                self.reset_stacks()

    def reset_stacks(self):
        self.unbind(0)
        self.depth = 0
        del self.evaluator.stack[:]
        del self.vm.stack[:]

    def eval_text(self, text):
        """Evaluate every datum of Lisp ``text``; returns the last value."""
        result = NIL
        for o in self.run(text, "lisp"):
            if o.error is not None:
                raise LispError(o.error)
            result = self._last
        return result

    def run(self, text, mode=None, echo=True):
        """Yield one Outcome per top-level form of ``text``."""
        mode = mode or self.mode
        if mode == "rlisp":
            from .rlisp import statements
            source = statements(self, text)
        else:
            source = self._lisp_forms(text)
        while True:
            self.take_output()
            try:
                item = self.runner(next, source, None)
            except KernelError as e:
                yield Outcome(self.take_output(), None, str(e))
                return
            if item is None:
                return
            form, show = item
            self.algebraic = mode == "rlisp"
            try:
                value = self.runner(self.eval, form)
            except KernelError as e:
                yield Outcome(self.take_output(), None, str(e))
                continue
            self._last = value
            text_out = None
            if echo and show:
                text_out = self.render(value) if mode == "rlisp" \
                    else self.print(value)
            yield Outcome(self.take_output(), text_out)

    def _lisp_forms(self, text):
        r = Reader(self, text)
        while not r.at_end():
            yield r.read(), True

    _last = NIL
