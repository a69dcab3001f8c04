"""Test configuration."""

from pathlib import Path

import pytest

from app.main import main
from app.services.canonicalize_service import canonicalize
from app.services.machine_file_service import load_machine

MACHINES_DIR = Path(__file__).resolve().parent.parent / "machines"

# label, machine file, canonicalization clock (None when already canonical), input, T, space bound
CORPUS = [
    ("d1", "d1", None, "a", 2, 1),
    ("quarter", "quarter", None, "a", 2, 1),
    ("coin_half", "coin_half", None, "", 1, 1),
    ("det_acc-T2", "det_acc", 2, "a", 2, 1),
    ("det_acc-T4", "det_acc", 4, "", 4, 1),
    ("worker-T3", "worker", 3, "", 3, 1),
    ("worker-T4", "worker", 4, "a", 4, 1),
    ("walker-T3-a", "walker", 3, "a", 3, 1),
    ("walker-T3-b", "walker", 3, "b", 3, 1),
    ("d1-T3", "d1", 3, "a", 3, 1),
    ("quarter-T4", "quarter", 4, "a", 4, 1),
    ("coin_half-T3", "coin_half", 3, "", 3, 1),
    ("shuttle", "shuttle", None, "", 3, 2),
]


def pytest_generate_tests(metafunc):
    if "corpus_entry" in metafunc.fixturenames:
        metafunc.parametrize("corpus_entry", [case[0] for case in CORPUS], indirect=True)


@pytest.fixture(scope="session")
def machines_dir():
    """Directory holding the machine description fixtures."""
    return MACHINES_DIR


@pytest.fixture(scope="session")
def load(machines_dir):
    """Load a fixture machine by file stem."""
    def _load(name):
        return load_machine(str(machines_dir / f"{name}.tm"))
    return _load


@pytest.fixture(scope="session")
def d1(load):
    return load("d1")


@pytest.fixture(scope="session")
def det_acc(load):
    return load("det_acc")


@pytest.fixture(scope="session")
def coin_half(load):
    return load("coin_half")


@pytest.fixture(scope="session")
def quarter(load):
    return load("quarter")


@pytest.fixture(scope="session")
def post_half(load):
    return load("post_half")


@pytest.fixture(scope="session")
def post_eighth(load):
    return load("post_eighth")


@pytest.fixture(scope="session")
def contains_a_n1(load):
    return load("contains_a_n1")


@pytest.fixture(scope="session")
def contains_a_n2(load):
    return load("contains_a_n2")


@pytest.fixture(scope="session")
def corpus(load):
    """Canonical machines as (label, spec, input, T, space bound)."""
    canonical = {}
    entries = []
    for label, name, clock, word, T, space_bound in CORPUS:
        if clock is None:
            spec = load(name)
        else:
            if (name, clock) not in canonical:
                canonical[(name, clock)] = canonicalize(load(name), clock, space_bound)
            spec = canonical[(name, clock)]
        entries.append((label, spec, word, T, space_bound))
    return entries


@pytest.fixture
def corpus_entry(request, corpus):
    """One corpus machine, selected by label."""
    return next(entry for entry in corpus if entry[0] == request.param)


@pytest.fixture(scope="session")
def scribe_canonical(load):
    """Scribe canonicalized over two work cells at T = 8."""
    return canonicalize(load("scribe"), 8, 2)


@pytest.fixture
def cli(capsys):
    """Run the command line entry point; returns (exit code, stdout)."""
    def _run(*argv):
        code = main([str(arg) for arg in argv])
        return code, capsys.readouterr().out
    return _run
