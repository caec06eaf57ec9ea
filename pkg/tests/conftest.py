from functools import lru_cache
from pathlib import Path

import pytest

from oml.parser import parse_program
from oml.typecheck import check_program

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

ACCEPTED = ["bool", "elems", "elems_impr", "eq", "id2", "let", "loop", "mu", "plain"]
REJECTED = ["ambig", "fundep_overlap", "uncovered", "univ"]


def corpus_path(name: str) -> Path:
    return CORPUS / f"{name}.oml"


def load(name: str):
    return parse_program(corpus_path(name).read_text())


@lru_cache(maxsize=None)
def typed(name: str):
    return check_program(load(name))


@pytest.fixture
def id2():
    return typed("id2")


@pytest.fixture
def elems():
    return typed("elems")


# one PASS/FAIL line per acceptance criterion, printed after the run
_CRITERIA = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py::test_criterion_" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        _CRITERIA[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA, key=lambda n: int(n.split("_")[2])):
        verdict = "PASS" if _CRITERIA[name] == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}")
