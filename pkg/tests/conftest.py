from pathlib import Path

import pytest

from rtakit.model import FieldRef, MethodRef
from rtakit.textformat import load_model, parse_model

MODELS = Path(__file__).parent / "models"


def model_path(name: str) -> Path:
    return MODELS / f"{name}.model"


def load(name: str):
    return load_model(model_path(name))


def M(text: str) -> MethodRef:
    return MethodRef.parse(text)


def F(text: str) -> FieldRef:
    return FieldRef.parse(text)


def methods(*texts: str) -> frozenset:
    return frozenset(M(t) for t in texts)


EMPTY_MAIN = """
root Main.main()

class Main
  method static main(): void
    return
"""


@pytest.fixture
def running_example():
    return load("running_example")


@pytest.fixture
def empty_main():
    return parse_model(EMPTY_MAIN)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
