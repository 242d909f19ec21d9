"""The one place that touches the host: files, clock, environment, streams.

Everything else in the package receives these services as arguments, so
the kernel itself never opens a file or reads a clock directly.
"""

import os
import sys
import threading
import time

DEEP_STACK_BYTES = 512 << 20
RECURSION_LIMIT = 400_000

_deep = threading.local()


def clock():
    return time.perf_counter()


def getenv(name, default=None):
    return os.environ.get(name, default)


def read_text(path):
    with open(path, encoding="utf-8") as f:
        return f.read()


def read_bytes(path):
    with open(path, "rb") as f:
        return f.read()


def write_bytes(path, data):
    with open(path, "wb") as f:
        f.write(data)
    return len(data)


def stdout_write(text):
    sys.stdout.write(text)
    if "\n" in text:
        sys.stdout.flush()


def stderr_write(text):
    sys.stderr.write(text)
    sys.stderr.flush()


def stdin_readline():
    return sys.stdin.readline()


def stdin_read():
    return sys.stdin.read()


def stdin_is_tty():
    try:
        return sys.stdin.isatty()
    except (AttributeError, ValueError):
        return False


def run_deep(fn, *args, **kwargs):
    """Call ``fn`` on a thread with a large C stack.

    Deeply recursive Lisp programs nest many host frames per Lisp call;
    the main thread's default stack would overflow long before the
    kernel's own depth limit.  Nested calls run inline.
    """
    if getattr(_deep, "active", False):
        return fn(*args, **kwargs)
    box = {}

    def body():
        _deep.active = True
        try:
            box["value"] = fn(*args, **kwargs)
        except BaseException as e:  # re-raised on the caller's thread
            box["error"] = e

    if sys.getrecursionlimit() < RECURSION_LIMIT:
        sys.setrecursionlimit(RECURSION_LIMIT)
    old = threading.stack_size()
    threading.stack_size(DEEP_STACK_BYTES)
    try:
        t = threading.Thread(target=body, name="pkernel-eval")
        t.start()
    finally:
        threading.stack_size(old)
    t.join()
    if "error" in box:
        raise box["error"]
    return box.get("value")
