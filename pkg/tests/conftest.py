from __future__ import annotations

from pathlib import Path

import pytest

from crala import check_files, load_repository, parse

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
NAVIGATION = FIXTURES / "navigation"
VIOLATIONS = FIXTURES / "violations"
DOCS = ROOT / "docs"

CHAIN_FILES = [
    NAVIGATION / "spec1.crala",
    NAVIGATION / "config1.crala",
    NAVIGATION / "config2.crala",
    NAVIGATION / "ass1.crala",
    NAVIGATION / "ass2.crala",
]


@pytest.fixture(scope="session")
def chain_files() -> list[str]:
    return [str(path) for path in CHAIN_FILES]


@pytest.fixture(scope="session")
def chain(chain_files):
    return check_files(chain_files)


@pytest.fixture(scope="session")
def spec1(chain):
    return chain.workspace.document("Spec1")


@pytest.fixture(scope="session")
def config1(chain):
    return chain.workspace.document("Config1")


@pytest.fixture(scope="session")
def config2(chain):
    return chain.workspace.document("Config2")


@pytest.fixture(scope="session")
def ass1(chain):
    return chain.workspace.document("Ass1")


@pytest.fixture(scope="session")
def ass2(chain):
    return chain.workspace.document("Ass2")


@pytest.fixture(scope="session")
def two_machine_cloud():
    text = (NAVIGATION / "cloud.crala").read_text(encoding="utf-8")
    return parse(text, "cloud.crala").documents[0]


@pytest.fixture(scope="session")
def repository():
    return load_repository(FIXTURES / "repository.json")


def pytest_terminal_summary(terminalreporter):
    rows = []
    for outcome in ("passed", "failed"):
        for report in terminalreporter.stats.get(outcome, []):
            if "test_acceptance" in report.nodeid and report.when == "call":
                rows.append((report.nodeid.split("::")[-1], outcome.upper()))
    if rows:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, outcome in sorted(rows):
            terminalreporter.write_line(f"{outcome:8s} {name}")
