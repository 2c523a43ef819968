from fractions import Fraction

import pytest

from hypersteiner.core import Instance, metric_closure
from hypersteiner.hyper import enumerate_full_components

# criterion number -> (passed, detail), filled by test_acceptance
ACCEPTANCE_RESULTS: dict = {}


def star(spokes=(1, 1, 1)) -> Instance:
    """Steiner centre 3 joined to terminals 0, 1, 2."""
    return Instance.build(4, [(t, 3, c) for t, c in enumerate(spokes)], [0, 1, 2])


@pytest.fixture
def star_instance() -> Instance:
    return star()


@pytest.fixture
def star_closed() -> Instance:
    return metric_closure(star())


@pytest.fixture
def star_components(star_closed):
    return enumerate_full_components(star_closed)


def frac(x) -> Fraction:
    return Fraction(x)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
