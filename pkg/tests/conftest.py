import random
from pathlib import Path

import pytest

from procdiff.ingest import load_model, load_schema
from procdiff.model import Literal, Model, Node, Statement
from procdiff.store import add_variant, init_repo

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"

SUBJECTS = [Node(f"e:{i}") for i in range(8)]
PREDICATES = [Node(f"r:{p}") for p in ("type", "has", "name", "desc")]
OBJECTS = SUBJECTS + [Literal(t) for t in ("x", "y z", 'q"uote', "")]
UNIVERSE = [Statement(s, p, o) for s in SUBJECTS for p in PREDICATES for o in OBJECTS]


def random_model(rng: random.Random, id: str = "m", max_size: int = 200) -> Model:
    return Model(id, frozenset(rng.sample(UNIVERSE, rng.randint(0, max_size))))


def fixture_lines(name: str) -> set[str]:
    """Raw statement lines of a fixture file: the set-algebra oracle works on these strings."""
    text = (FIXTURES / name).read_text(encoding="utf-8")
    return {line for line in text.splitlines() if line.strip() and not line.startswith("#")}


@pytest.fixture(scope="session")
def anc():
    return load_model(FIXTURES / "anc.nt", "anc")


@pytest.fixture(scope="session")
def fix_a():
    return load_model(FIXTURES / "a.nt", "a")


@pytest.fixture(scope="session")
def fix_b():
    return load_model(FIXTURES / "b.nt", "b")


@pytest.fixture(scope="session")
def schema():
    return load_schema(FIXTURES / "process.schema")


@pytest.fixture
def repo(tmp_path, anc, fix_a, fix_b, schema):
    r = init_repo(tmp_path / "repo", schema)
    add_variant(r, anc)
    add_variant(r, fix_a, "anc")
    add_variant(r, fix_b, "anc")
    return r


_ACCEPTANCE: list[tuple[str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(name): exit criterion reported in the summary")


def pytest_runtest_logreport(report):
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = getattr(report, "acceptance_name", None)
        if name:
            _ACCEPTANCE.append((name, "PASS" if report.passed else "FAIL"))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("acceptance")
    if marker:
        outcome.get_result().acceptance_name = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in _ACCEPTANCE:
        terminalreporter.write_line(f"[{status}] {name}")
