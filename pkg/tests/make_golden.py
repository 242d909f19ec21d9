"""Regenerate the files under tests/golden.

    python3 tests/make_golden.py

Review the diff before committing: the tests treat these files as the
expected output, so regenerating them after a regression hides it.
"""

import pathlib

from pkernel import Session
from pkernel.bytecode import disassemble_all
from pkernel.image import cell_listing, dump
from pkernel.rlisp import statements

HERE = pathlib.Path(__file__).parent
GOLDEN = HERE / "golden"
LEGENDRE = HERE.parent / "demos" / "legendre.red"

# Data chosen to exercise every image record kind: shared tails, a cycle,
# nested vectors, bignums of both signs, floats, strings,
# characters, property lists, flags and compiled functions.
IMAGE_SETUP = r'''
(de fact (n) (cond ((lessp n 2) 1) (t (times n (fact (difference n 1))))))
(de walk (l) (prog (n) (setq n 0)
  top (cond ((null l) (return n)))
  (setq n (plus n 1)) (setq l (cdr l)) (go top)))
(setq tail (quote (x y z)))
(setq left (cons 1 tail))
(setq right (cons 2 tail))
(setq ring (list 1 2 3))
(rplacd (cdr (cdr ring)) ring)
(setq big (expt 7 100))
(setq negbig (minus (expt 2 200)))
(setq pi 3.25)
(setq greeting "hello, ""world""")
(setq letter (car (quote (#\q))))
(setq vec (quote [1 [2 3] "s"]))
(put (quote box) (quote colour) (quote red))
(put (quote box) (quote parts) tail)
(flag (quote (box fact)) (quote special))
(setq poly (simp (quote (expt (plus x 1) 3))))
'''


def legendre_output():
    s = Session(mode="rlisp")
    return "".join((o.output or "") + (o.echo + "\n" if o.echo else "")
                   for o in s.run(LEGENDRE.read_text()))


def transcript(text, mode="rlisp", engine="tree"):
    """Output, echoes and errors of a program, as the command line shows."""
    s = Session(engine=engine)
    parts = []
    for o in s.run(text, mode):
        parts.append(o.output)
        if o.echo is not None:
            parts.append(o.echo + "\n")
        if o.error is not None:
            parts.append(f"error: {o.error}\n")
    return "".join(parts)


def legendre_loop_disassembly():
    s = Session(engine="byte", mode="rlisp")
    src = LEGENDRE.read_text()
    for o in s.run(src):
        assert o.error is None, o.error
    loop = [f for f, _ in statements(s, src)][-1]
    return disassemble_all(s, s.compiler.compile_toplevel(loop))


def factorial_disassembly():
    s = Session(engine="byte", mode="rlisp")
    for o in s.run(LEGENDRE.read_text()):
        assert o.error is None, o.error
    return disassemble_all(s, s.symtab[s.symtab.lookup("factorial")].function)


def golden_session():
    s = Session(engine="byte")
    for o in s.run(IMAGE_SETUP, "lisp"):
        assert o.error is None, o.error
    return s


def main():
    GOLDEN.mkdir(exist_ok=True)
    (GOLDEN / "legendre.out").write_text(legendre_output())
    (GOLDEN / "legendre_loop.dis").write_text(legendre_loop_disassembly())
    (GOLDEN / "factorial.dis").write_text(factorial_disassembly())
    for prog in sorted((HERE / "programs").glob("*.red")):
        (GOLDEN / (prog.stem + ".out")).write_text(transcript(prog.read_text()))
    s = golden_session()
    (GOLDEN / "session.img").write_bytes(dump(s))
    (GOLDEN / "session.cells").write_text(cell_listing(s))


if __name__ == "__main__":
    main()
