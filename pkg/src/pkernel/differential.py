"""Run every top-level form through both engines and compare.

Two independent sessions, one per engine, read the same text.  After
each form the printed output, echoed value and error text must match
byte for byte; the first difference raises EngineMismatch.
"""

from . import image
from .errors import EngineMismatch
from .session import Session


class DifferentialSession:
    def __init__(self, image_bytes=None, **options):
        options.pop("engine", None)
        if image_bytes is None:
            self.tree = Session(engine="tree", **options)
            self.byte = Session(engine="byte", **options)
        else:
            self.tree = image.load(image_bytes, engine="tree", **options)
            self.byte = image.load(image_bytes, engine="byte", **options)
        self.forms = 0

    @property
    def primary(self):
        return self.tree

    def run(self, text, mode=None, echo=True):
        a = self.tree.run(text, mode, echo)
        b = self.byte.run(text, mode, echo)
        while True:
            x = next(a, None)
            y = next(b, None)
            if x is None and y is None:
                return
            self.forms += 1
            if x is None or y is None or x.key() != y.key():
                raise EngineMismatch(
                    f"engine mismatch at form {self.forms}: "
                    f"tree {_describe(x)} vs byte {_describe(y)}")
            yield x


def _describe(o):
    if o is None:
        return "<no form>"
    return repr(o.key())
