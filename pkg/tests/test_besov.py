import math

import numpy as np
import pytest

from cheapns.besov import besov_norm, block_masses, shell_index, shell_masses
from cheapns.profiles import lp_symbol, make_w, make_wk
from cheapns.spectral import NEG_INF, from_values, heat_multiplier, make_grid, scale


@pytest.fixture(scope="module")
def grid():
    return make_grid(1, 1 / 16, 64.0)


def test_blocks_of_w(grid):
    blocks = block_masses(make_w(grid))
    live = {k for k, v in blocks.items() if v != NEG_INF}
    # support 1/2 < |ξ| < 1 meets the filters k = -1 and k = 0 only
    assert live == {-1, 0}


def test_block_mass_matches_direct_sum(grid, rng):
    f = from_values(grid, rng.random(grid.n))
    blocks = block_masses(f)
    for k in (-2, 0, 3):
        ref = math.fsum(lp_symbol(k, grid.radius) * f.values()) * grid.dxi
        assert blocks[k] == pytest.approx(math.log2(ref), abs=1e-13)


def test_norm_scales_linearly_in_a(grid):
    f = make_wk(3, grid)
    blocks = block_masses(f)
    n0 = besov_norm(f, 0.0, blocks)
    for a in (-1.0, 0.5, 2.0):
        na = besov_norm(f, a, blocks)
        for k, v in blocks.items():
            if v != NEG_INF:
                assert na.block_log2[k] == pytest.approx(n0.block_log2[k] + a * k, abs=1e-12)
    # higher a favors higher blocks, so the norm is nondecreasing in a on k >= 0 data
    assert besov_norm(f, 1.0).norm_log2 >= n0.norm_log2


def test_norm_is_homogeneous(grid):
    f = make_w(grid)
    assert besov_norm(scale(f, 8.0), -1).norm_log2 == pytest.approx(besov_norm(f, -1).norm_log2 + 3, abs=1e-12)


def test_norm_is_monotone_in_data(grid, rng):
    g = from_values(grid, rng.random(grid.n))
    f = g.replace(g.coeffs * rng.random(grid.n))
    for a in (-1, 0, 1):
        assert besov_norm(f, a).norm_log2 <= besov_norm(g, a).norm_log2


def test_heat_flow_lowers_every_block(grid):
    f = make_wk(2, grid)
    before = block_masses(f)
    after = block_masses(heat_multiplier(f, 0.05))
    for k in before:
        assert after[k] <= before[k]


def test_zero_field_norm(grid):
    z = from_values(grid, np.zeros(grid.n))
    assert besov_norm(z, 0).norm_log2 == NEG_INF


def test_shell_index_boundaries():
    g = make_grid(1, 1 / 4, 4.0)
    idx = dict(zip(g.axis, shell_index(g)))
    assert idx[1.0] == 0 and idx[1.25] == 1 and idx[2.0] == 1 and idx[4.0] == 2
    assert idx[0.25] == -2 and idx[0.0] == -2 and idx[-3.0] == 2


def test_shell_masses_of_wk(grid):
    for k in (1, 3):
        sm = shell_masses(make_wk(k, grid))
        live = [j for j, v in sm.items() if v != NEG_INF]
        assert live == [k]
        assert sm[k] == pytest.approx(0.0, abs=1e-12)
