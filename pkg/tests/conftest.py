import random
import sys

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from fibertor.linalg import IntMatrix

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

CAT = IntMatrix.from_rows([[2, 1], [1, 1]])
MINUS_I = IntMatrix.from_rows([[-1, 0], [0, -1]])
UNIPOTENT = IntMatrix.from_rows([[1, 2], [0, 1]])


def matrices(min_size=1, max_size=5, lo=-9, hi=9, square=True):
    @st.composite
    def build(draw):
        r = draw(st.integers(min_size, max_size))
        c = r if square else draw(st.integers(min_size, max_size))
        vals = draw(st.lists(st.integers(lo, hi), min_size=r * c, max_size=r * c))
        return IntMatrix(r, c, tuple(vals))
    return build()


def random_unimodular(rng: random.Random, n: int, steps: int = 12, spread: int = 2) -> IntMatrix:
    """Product of random elementary and sign/swap matrices."""
    M = IntMatrix.identity(n)
    for _ in range(steps):
        i, j = rng.sample(range(n), 2) if n > 1 else (0, 0)
        rows = [list(M.row(k)) for k in range(n)]
        move = rng.random()
        if n > 1 and move < 0.8:
            c = rng.choice([x for x in range(-spread, spread + 1) if x])
            rows[i] = [a + c * b for a, b in zip(rows[i], rows[j])]
        elif n > 1 and move < 0.9:
            rows[i], rows[j] = rows[j], rows[i]
        else:
            rows[i] = [-a for a in rows[i]]
        M = IntMatrix.from_rows(rows)
    return M


@pytest.fixture
def rng():
    return random.Random(20260101)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
