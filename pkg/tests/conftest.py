import numpy as np
import pytest

from hashfactor.ingest import build_matrices
from hashfactor.synth import SynthParams, generate


@pytest.fixture(scope="session")
def small_corpus():
    return generate(SynthParams(n_users=60, n_hashtags=90, n_topics=8, seed=3))


@pytest.fixture(scope="session")
def small_matrices(small_corpus):
    return build_matrices(small_corpus)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# One line per acceptance criterion, printed at the end of the run.
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def criterion(request):
    """Record a criterion's outcome: ``criterion(n, ok, detail)`` then assert ``ok``."""

    def record(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
