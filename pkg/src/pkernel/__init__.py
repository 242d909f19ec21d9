"""A small Lisp kernel with bignums, a bytecode VM and a polynomial algebra."""

from .errors import KernelError, LispError
from .session import Outcome, Session

__version__ = "0.1.0"

__all__ = ["KernelError", "LispError", "Outcome", "Session", "__version__"]
