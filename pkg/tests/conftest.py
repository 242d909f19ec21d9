import pathlib

import pytest

from pkernel import Session

HERE = pathlib.Path(__file__).parent
ROOT = HERE.parent
GOLDEN = HERE / "golden"
PROGRAMS = HERE / "programs"

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(ident, title): test backs an acceptance "
                   "criterion; reported as one PASS/FAIL line per ident")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when != "call" and not report.failed:
        return
    ident, title = marker.args
    _, ok = _criteria.get(ident, (title, True))
    _criteria[ident] = (title, ok and report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for ident in sorted(_criteria, key=lambda k: int(k[2:])):
        title, ok = _criteria[ident]
        terminalreporter.write_line(
            f"{ident} {'PASS' if ok else 'FAIL'}  {title}")


def outcomes(session, text, mode="lisp"):
    return list(session.run(text, mode))


def echoes(session, text, mode="lisp"):
    """Echoed values, failing loudly on the first error."""
    out = []
    for o in session.run(text, mode):
        assert o.error is None, o.error
        if o.echo is not None:
            out.append(o.echo)
    return out


def value_of(session, text, mode="lisp"):
    got = echoes(session, text, mode)
    return got[-1]


@pytest.fixture
def session():
    return Session()


@pytest.fixture(params=["tree", "byte"])
def engine_session(request):
    return Session(engine=request.param)


@pytest.fixture
def rlisp():
    return Session(mode="rlisp")
