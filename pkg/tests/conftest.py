import numpy as np
import pytest

from cheapns.spectral import from_values, make_grid

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def grid1():
    return make_grid(1, 1 / 16, 8.0)


@pytest.fixture
def grid2():
    return make_grid(2, 1 / 8, 2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_field(grid, rng, even=False, density=1.0, exp2=0):
    vals = rng.random(grid.shape) * (rng.random(grid.shape) < density)
    if even:
        vals = 0.5 * (vals + np.flip(vals))
    f = from_values(grid, vals, even=even)
    return f.replace(f.coeffs, exp2=f.exp2 + exp2)
