"""Command-line driver: batch runs, one-shot expressions and a REPL."""

import argparse
import re

from .. import image
from ..bytecode import disassemble_all, is_chunk
from ..builtins import Builtin
from ..differential import DifferentialSession
from ..errors import CompileError, KernelError
from ..session import Session
from ..value import CONS
from . import platform

EXIT_OK, EXIT_ERROR, EXIT_USAGE = 0, 1, 2

_SIZE = re.compile(r"(\d+)([kmg]?)(i?b)?\Z", re.IGNORECASE)
_UNITS = {"": 1, "k": 1 << 10, "m": 1 << 20, "g": 1 << 30}


def parse_size(text):
    """Byte count from ``4194304``, ``64M`` or ``1GiB``."""
    m = _SIZE.match(text.strip())
    if not m:
        raise argparse.ArgumentTypeError(f"invalid size {text!r}")
    return int(m.group(1)) * _UNITS[m.group(2).lower()]


def build_parser():
    p = argparse.ArgumentParser(
        prog="pkernel",
        description="Small Lisp kernel with an Algol-like front end.")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--lisp", dest="mode", action="store_const",
                      const="lisp", help="read S-expressions")
    mode.add_argument("--rlisp", dest="mode", action="store_const",
                      const="rlisp", help="read rlisp statements (default)")
    p.add_argument("-e", dest="exprs", action="append", default=[],
                   metavar="EXPR", help="evaluate EXPR (repeatable)")
    p.add_argument("files", nargs="*", metavar="FILE",
                   help=".red (rlisp) or .lsp (Lisp) source files")
    p.add_argument("--image-save", metavar="PATH")
    p.add_argument("--image-load", metavar="PATH")
    p.add_argument("--heap", type=parse_size, metavar="N",
                   help="initial heap size in bytes (K/M/G suffixes)")
    p.add_argument("--heap-cap", type=parse_size, metavar="N",
                   help="maximum heap size in bytes")
    p.add_argument("--engine", choices=("tree", "byte", "diff"),
                   default="tree")
    p.add_argument("--dump-bytecode", metavar="NAME",
                   help="print the bytecode of function NAME and exit")
    p.add_argument("--dialect", choices=("fn-first", "list-first"),
                   default="fn-first",
                   help="argument order of mapcar in rlisp input")
    p.add_argument("--natives", action="store_true",
                   help="use host modular arithmetic instead of the "
                        "reference definitions")
    return p


def mode_for(path, explicit):
    if explicit:
        return explicit
    if path.endswith(".lsp"):
        return "lisp"
    return "rlisp"


class Driver:
    def __init__(self, args, out=platform.stdout_write,
                 err=platform.stderr_write):
        self.args = args
        self.out = out
        self.err = err
        self.failed = False
        options = {"dialect": args.dialect}
        heap = args.heap or _env_size("PKERNEL_HEAP")
        cap = args.heap_cap or _env_size("PKERNEL_HEAP_CAP")
        if heap:
            options["heap_initial"] = heap
        if cap:
            options["heap_cap"] = cap
        if heap and not cap:
            options["heap_cap"] = max(heap, 512 << 20)
        if cap and not heap:
            options["heap_initial"] = min(cap, 1 << 20)
        data = None
        if args.image_load:
            data = platform.read_bytes(args.image_load)
        if args.engine == "diff":
            self.runner = DifferentialSession(data, **options)
            self.session = self.runner.primary
        else:
            if data is not None:
                self.session = image.load(data, engine=args.engine,
                                          **options)
            else:
                self.session = Session(engine=args.engine,
                                       natives=args.natives, **options)
            self.runner = self.session
        for s in self._sessions():
            s.input_source = _once(platform.stdin_read)

    def _sessions(self):
        if isinstance(self.runner, DifferentialSession):
            return (self.runner.tree, self.runner.byte)
        return (self.session,)

    def run_text(self, text, mode, where=None):
        for o in self.runner.run(text, mode):
            if o.output:
                self.out(o.output)
            if o.echo is not None:
                self.out(o.echo + "\n")
            if o.error is not None:
                self.failed = True
                prefix = f"{where}: " if where else ""
                self.err(f"{prefix}error: {o.error}\n")

    def dump_bytecode(self, name):
        s = self.session
        if isinstance(self.runner, DifferentialSession):
            s = self.runner.byte
        w = s.symtab.lookup(name)
        f = s.symtab[w].function if w is not None else None
        if f is None:
            raise KernelError(f"undefined function {name}")
        if isinstance(f, Builtin):
            raise KernelError(f"{name} is a builtin and has no bytecode")
        if not is_chunk(s, f):
            if f & 7 != CONS:
                raise KernelError(f"{name} has no compilable definition")
            try:
                f = s.compiler.compile_function(w, f)
            except CompileError as e:
                raise KernelError(f"{name} cannot be compiled: {e}") \
                    from None
        self.out(disassemble_all(s, f))

    def repl(self):
        mode = self.args.mode or "rlisp"
        buf = []
        while True:
            self.out("> " if not buf else "  ")
            line = platform.stdin_readline()
            if not line:
                if buf:
                    self.run_text("".join(buf), mode)
                self.out("\n")
                return
            buf.append(line)
            text = "".join(buf)
            if not _complete(text, mode):
                continue
            buf = []
            self.run_text(text, mode)


def _complete(text, mode):
    """Whether ``text`` ends at a statement or form boundary."""
    stripped = text.rstrip()
    if not stripped:
        return True
    if mode == "rlisp":
        return stripped.endswith((";", "$"))
    depth = 0
    in_string = False
    i = 0
    while i < len(text):
        c = text[i]
        if in_string:
            if c == '"':
                in_string = False
        elif c == '"':
            in_string = True
        elif c == "!":
            i += 1
        elif c in "%;":
            while i < len(text) and text[i] != "\n":
                i += 1
        elif c in "([":
            depth += 1
        elif c in ")]":
            depth -= 1
        i += 1
    return depth <= 0 and not in_string


def _once(fn):
    done = []

    def source():
        if done:
            return ""
        done.append(True)
        return fn()
    return source


def _env_size(name):
    v = platform.getenv(name)
    if not v:
        return None
    try:
        return parse_size(v)
    except argparse.ArgumentTypeError:
        raise KernelError(f"{name}: invalid size {v!r}") from None


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        d = Driver(args)
        for path in args.files:
            try:
                text = platform.read_text(path)
            except OSError as e:
                platform.stderr_write(
                    f"pkernel: cannot read {path}: {e.strerror or e}\n")
                return EXIT_ERROR
            d.run_text(text, mode_for(path, args.mode), path)
        for expr in args.exprs:
            d.run_text(expr, args.mode or "rlisp")
        if args.dump_bytecode:
            d.dump_bytecode(args.dump_bytecode)
        if not args.files and not args.exprs and not args.dump_bytecode:
            d.repl()
        if args.image_save:
            image.save_image(d.session, args.image_save)
    except OSError as e:
        platform.stderr_write(f"pkernel: {e}\n")
        return EXIT_ERROR
    except KernelError as e:
        platform.stderr_write(f"pkernel: {e}\n")
        return EXIT_ERROR
    return EXIT_ERROR if d.failed else EXIT_OK


def run(argv=None):
    """Console entry point."""
    raise SystemExit(main(argv))
