import numpy as np
import pytest
from hypothesis import strategies as st

from pollcoop.game import GameSpec, random_regular_spec, validate_spec

ACCEPTANCE_LINES: list[str] = []


def g1_spec() -> GameSpec:
    return GameSpec.from_arrays([1, 2], [0.1, 0.2], t0=0, T=1, x0=0)


@pytest.fixture
def g1():
    return g1_spec()


def random_specs(count: int, seed: int, n_range=(1, 6)) -> list[GameSpec]:
    rng = np.random.default_rng(seed)
    return [random_regular_spec(rng, int(rng.integers(n_range[0], n_range[1] + 1))) for _ in range(count)]


@st.composite
def regular_specs(draw, min_n=1, max_n=6):
    n = draw(st.integers(min_n, max_n))
    d = draw(st.lists(st.floats(0.01, 0.5), min_size=n, max_size=n))
    t0 = draw(st.floats(0.0, 2.0))
    T = t0 + draw(st.floats(0.1, 3.0))
    D_N = 0.0
    for v in d:
        D_N += v
    need = D_N * (T - t0)
    factors = draw(st.lists(st.floats(1.0, 2.0), min_size=n, max_size=n))
    x0 = draw(st.floats(0.0, 5.0))
    spec = GameSpec.from_arrays([need * f for f in factors], d, t0=t0, T=T, x0=x0)
    assert validate_spec(spec).valid
    return spec


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
