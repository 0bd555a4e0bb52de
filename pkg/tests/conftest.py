import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from geflochtener.bench import CANTERBURY, check_corpus, corpus_dir

sys.path.insert(0, str(Path(__file__).parent))

# numba compiles lazily; the first example of a test may pay for it
settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

CANTERBURY_DIR = corpus_dir(CANTERBURY)


def available_canterbury():
    missing = {d.split(":")[0].split("/", 1)[1] for d in check_corpus(CANTERBURY, CANTERBURY_DIR)}
    return [name for name, _ in CANTERBURY.members if name not in missing]


@pytest.fixture(scope="session")
def alice():
    p = CANTERBURY_DIR / "alice29.txt"
    if not p.is_file():
        pytest.skip("alice29.txt not present")
    return p.read_bytes()


# one verdict line per acceptance criterion, repeated after the test summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
