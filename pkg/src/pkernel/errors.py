"""Exception hierarchy shared by every layer of the kernel."""


class KernelError(Exception):
    """Base class for all errors raised by the kernel."""


class ContractViolation(KernelError):
    """Misuse of an internal API (double release, stale handle...)."""


class HeapExhausted(KernelError):
    """Allocation failed even after a full collection at the arena cap."""


class ParseError(KernelError):
    """Malformed S-expression text."""

    def __init__(self, message, line=1, column=1):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class RlispError(KernelError):
    """Lexical or syntax error in rlisp source."""

    def __init__(self, message, line=1, column=1):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class CompileError(KernelError):
    """The bytecode compiler cannot handle a form."""


class VMFault(KernelError):
    """Malformed bytecode reached the interpreter loop (a compiler bug)."""


class ImageError(KernelError):
    """An image file could not be written or loaded."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class LispError(KernelError):
    """Evaluation error, unwinds to the top level."""


class UnboundVariable(LispError):
    def __init__(self, name):
        super().__init__(f"unbound variable {name}")
        self.name = name


class UndefinedFunction(LispError):
    def __init__(self, name):
        super().__init__(f"undefined function {name}")
        self.name = name


class ArityError(LispError):
    def __init__(self, name, expected, got):
        super().__init__(f"{name}: expected {expected} argument(s), got {got}")
        self.name = name


class LispTypeError(LispError):
    pass


class DivisionByZero(LispError):
    pass


class StackOverflow(LispError):
    pass


class UserError(LispError):
    """Raised by the ``error`` builtin."""


class AlgebraError(LispError):
    pass


class EngineMismatch(KernelError):
    """The tree-walker and the VM disagreed on a top-level form."""
