import math

import numpy as np
import pytest
from hypothesis import strategies as st

from dehnrot import MapSpec

ACCEPTANCE_LINES: list[str] = []


def random_spec(rng: np.random.Generator, zero_mean: bool = False, max_k: int = 3) -> MapSpec:
    """A random member of the shear family with up to three harmonics per shear."""
    def harmonics():
        n = int(rng.integers(0, 4))
        return tuple((int(rng.integers(1, 5)), float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)))
                     for _ in range(n))

    c = 0.0 if zero_mean else float(rng.uniform(-1, 1))
    return MapSpec(int(rng.integers(1, max_k + 1)), harmonics(), harmonics(), c)


harmonic = st.tuples(st.integers(1, 4), st.floats(-1, 1), st.floats(-1, 1))
specs = st.builds(MapSpec, st.integers(1, 3), st.lists(harmonic, max_size=3).map(tuple),
                  st.lists(harmonic, max_size=3).map(tuple), st.floats(-1, 1))


def chirikov(K: float) -> MapSpec:
    return MapSpec(1, (), ((1, K / (2 * math.pi), 0.0),))


@pytest.fixture
def acceptance_report():
    def record(criterion: int, ok: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
