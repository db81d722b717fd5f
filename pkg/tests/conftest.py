import math

import pytest
from hypothesis import settings

from fracleibniz.field import make_grid, random_smooth

settings.register_profile("default", deadline=None, max_examples=25)
settings.load_profile("default")


@pytest.fixture(scope="session")
def grid1():
    return make_grid(1, 256, 2 * math.pi * 4)


@pytest.fixture(scope="session")
def grid2():
    return make_grid(2, 64, 20.0)


@pytest.fixture
def pair1(grid1):
    return random_smooth(grid1, 1), random_smooth(grid1, 2)


# acceptance criteria report: criterion -> [(part, passed, detail)]
_ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


@pytest.fixture(scope="session")
def acceptance():
    def record(criterion: int, part: str, passed: bool, detail: str):
        _ACCEPTANCE.setdefault(criterion, []).append((part, bool(passed), detail))
        print(f"{'PASS' if passed else 'FAIL'}  criterion {criterion} [{part}] {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(_ACCEPTANCE):
        parts = _ACCEPTANCE[crit]
        ok = all(p for _, p, _ in parts)
        failed = [name for name, p, _ in parts if not p]
        tail = f" (failed: {', '.join(failed)})" if failed else ""
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {crit}: {len(parts) - len(failed)}/{len(parts)} parts{tail}")
        for name, p, detail in parts:
            tr.write_line(f"      {'ok ' if p else 'BAD'} {name}: {detail}")
