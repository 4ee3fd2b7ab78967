import sys
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"
BENCHMARKS = Path(__file__).parent.parent / "benchmarks"

_acceptance_results: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        _acceptance_results[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance_results):
        outcome = _acceptance_results[name]
        mark = "PASS" if outcome == "passed" else outcome.upper()
        terminalreporter.write_line(f"{mark}  {name}")


def data_text(name: str) -> str:
    return (DATA / name).read_text()


def load(name: str):
    from syguskit.frontend import read_problem
    return read_problem(data_text(name))


def term(text: str, variables=None, funs=None, expected=None):
    """Parse one term from concrete syntax for test setup."""
    from syguskit.frontend import parse_term
    from syguskit.sexpr import read_sexprs
    (sx,) = read_sexprs(text)
    t, _ = parse_term(sx, variables or {}, funs or {}, expected)
    return t


@pytest.fixture(scope="session")
def max2():
    return load("max2.sl")


@pytest.fixture(scope="session")
def lsz32():
    return load("lsz_bv32.sl")


@pytest.fixture(scope="session")
def lsz8():
    return load("lsz_w8.sl")


@pytest.fixture(scope="session")
def lsz8_fixed():
    return load("lsz_w8_fixed.sl")


@pytest.fixture(scope="session")
def inv_loop():
    return load("inv_loop.sl")


@pytest.fixture(scope="session")
def inv_loop_fixed():
    return load("inv_loop_fixed.sl")


@pytest.fixture(scope="session")
def qm_loop():
    return load("qm_loop_1.sl")


@pytest.fixture(scope="session")
def hd17_w8():
    return load("hd17_w8.sl")


def fake_solver_script(tmp_path, stdout: str, name="fakesmt.py") -> str:
    """A stand-in SMT solver command printing a canned response."""
    path = tmp_path / name
    path.write_text(
        "import sys\n"
        "sys.stdin.read()\n"
        f"sys.stdout.write({stdout!r})\n")
    return f"{sys.executable} {path}"
