from pathlib import Path

import pytest

from indescent import parse_system

DATA = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def fol():
    return parse_system((DATA / "fol_pq.sys").read_text())


@pytest.fixture(scope="session")
def sl():
    return parse_system((DATA / "sl_ls.sys").read_text())


@pytest.fixture(scope="session")
def dangling():
    """An empty subgoal whose variable is still pointed to by a cell."""
    return parse_system(
        """
        (theory seplog)
        (pred e (Loc Loc))
        (pred r (Loc))
        (rule (e (x y)) (constraint (and (= x y) emp)))
        (rule (r (x)) (constraint (pto x (u))) (subgoals ((e u v))))
        """
    )


_ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance line; it is printed now and again in the summary."""

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        _ACCEPTANCE.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
