from __future__ import annotations

import pytest

from kgscape.fixtures import academic_fixture_document, load_academic_fixture
from kgscape.model import derive_ontology
from kgscape.preferences import UserPreference

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def record_acceptance(name: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE_RESULTS.append((name, ok, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        status = "PASS" if ok else "FAIL"
        suffix = f"  ({detail})" if detail else ""
        terminalreporter.write_line(f"{status}: {name}{suffix}")


@pytest.fixture(scope="session")
def academic_document():
    return academic_fixture_document()


@pytest.fixture(scope="session")
def academic_kg():
    return load_academic_fixture()


@pytest.fixture(scope="session")
def academic_ontology(academic_kg):
    return derive_ontology(academic_kg)


@pytest.fixture(scope="session")
def paper_2018_pref():
    return UserPreference(
        interest_type="Paper",
        attribute="year",
        attribute_value="2018",
        connected_types=("Author",),
    )


def point_in_polygon(polygon, point) -> bool:
    """Ray-casting oracle used by hull containment checks."""
    x, y = point
    inside = False
    n = len(polygon)
    for i in range(n):
        x1, y1 = polygon[i]
        x2, y2 = polygon[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            cross_x = (x2 - x1) * (y - y1) / (y2 - y1) + x1
            if x < cross_x:
                inside = not inside
    return inside
