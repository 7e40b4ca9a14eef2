import math
from fractions import Fraction

import numpy as np
import pytest

from cheapns.certifier import (
    T_INF,
    THRESHOLD_LOG2,
    CascadeTime,
    Verdict,
    alpha_log2,
    besov_lower_bound_log2,
    build_certificate,
    check_field_dominates,
    classify,
    first_iterate_lower_bound,
    noexist_partial_sum,
    noexist_partial_sums,
    noexist_terms,
    t_k,
    time_ratio,
    verify_inductive_step,
)
from cheapns.profiles import make_v, make_wk
from cheapns.spectral import make_grid, scale_log2

LN2 = math.log(2.0)


# stage times

def test_stage_time_values():
    assert float(t_k(0)) == 0.0
    assert float(t_k(1)) == pytest.approx(LN2 / 4, rel=1e-15)  # one-term sum
    assert float(t_k(1)) == pytest.approx(0.173287, abs=1e-6)
    assert float(T_INF) == pytest.approx(math.log(2 ** (1 / 3)), rel=1e-15)
    assert float(T_INF) == pytest.approx(0.231049, abs=1e-6)


def test_stage_times_increase_to_the_limit():
    ratios = [t_k(k).ratio for k in range(0, 200)]
    assert all(b > a for a, b in zip(ratios, ratios[1:]))
    assert all(r < T_INF.ratio for r in ratios)
    # distinct even where the floats coincide
    assert float(t_k(60)) == float(t_k(61)) and t_k(60).ratio != t_k(61).ratio


def test_stage_time_errors():
    for bad in (-1, 1.5):
        with pytest.raises(ValueError):
            t_k(bad)


def test_time_ratio_of_plain_float():
    assert time_ratio(LN2) == 1
    assert time_ratio(CascadeTime(Fraction(2, 7))) == Fraction(2, 7)
    assert repr(t_k(1)).startswith("CascadeTime(1/4")


# amplitudes and the inductive step

def test_alpha_matches_direct_formula():
    for k in range(1, 6):
        for t in (float(t_k(k)), float(T_INF)):
            direct = 2.0 ** (k - 4 * (2 ** k - 1)) * math.exp(-(2 ** k) * t)
            assert alpha_log2(k, t) == pytest.approx(math.log2(direct), abs=1e-9)
    assert alpha_log2(3, t_k(2)) == -math.inf


def test_inductive_step_margin_against_direct_expression():
    for k in (1, 2, 3):
        t = float(t_k(k)) + 0.01
        direct = 2 * (1 - math.exp(2 ** (2 * k) * (float(t_k(k - 1)) - t)))
        assert verify_inductive_step(k, t) == pytest.approx(math.log2(direct), abs=1e-9)


def test_inductive_step_errors():
    with pytest.raises(ValueError):
        verify_inductive_step(0, T_INF)
    with pytest.raises(ValueError, match="precedes"):
        verify_inductive_step(3, t_k(2))


# Besov bound and verdict

def test_lower_bound_direct_for_small_k():
    A, a = 32.0, 0.5
    for k in range(0, 5):
        t = float(T_INF)
        direct = A ** (2 ** k) * 2.0 ** (a * k + k - 4 * (2 ** k - 1)) * math.exp(-(2 ** k) * t)
        assert besov_lower_bound_log2(5, a, k, T_INF) == pytest.approx(math.log2(direct), abs=1e-9)
    with pytest.raises(ValueError):
        besov_lower_bound_log2(5, 0, -1, T_INF)


def test_classify_threshold():
    assert THRESHOLD_LOG2 == Fraction(13, 3)
    assert 2 ** float(THRESHOLD_LOG2) == pytest.approx(20.1587, abs=1e-4)
    assert classify(THRESHOLD_LOG2) is Verdict.BELOW_THRESHOLD
    assert classify(THRESHOLD_LOG2 + Fraction(1, 10 ** 30)) is Verdict.DIVERGES
    for a in (-1, 0, 2):
        assert classify(5, a) is Verdict.DIVERGES
        assert classify(4, a) is Verdict.BELOW_THRESHOLD


def test_certificate_structure():
    cert = build_certificate(5, a=0, k_max=10)
    assert [s.k for s in cert.stages] == list(range(11))
    assert cert.stages[0].step_margin_bits is None
    assert all(s.step_margin_bits > 0 for s in cert.stages[1:])
    assert cert.failed_stage() is None
    d = cert.to_dict()
    assert d["verdict"] == "diverges" and len(d["stages"]) == 11


def test_certificate_at_intermediate_time():
    cert = build_certificate(5, a=0, k_max=6, t=t_k(3))
    active = [s.k for s in cert.stages if s.besov_lb_log2 != -math.inf]
    assert active == [0, 1, 2, 3]
    assert cert.stages[3].step_margin_bits == pytest.approx(0.0, abs=1e-12)
    assert cert.stages[4].step_margin_bits is None


def test_certificate_validates():
    with pytest.raises(ValueError):
        build_certificate(5, k_max=-1)


# grid domination

def test_domination_of_the_bound_itself():
    g = make_grid(1, 1 / 16, 8.0)
    k, A_log2, t = 2, 0.0, t_k(2)
    bound = scale_log2(make_wk(k, g, method="direct"), 2 ** k * A_log2 + alpha_log2(k, t))
    assert check_field_dominates(bound, k, A_log2, t) == pytest.approx(0.0, abs=1e-9)
    assert check_field_dominates(scale_log2(bound, 1.5), k, A_log2, t) == pytest.approx(1.5, abs=1e-9)


def test_domination_errors():
    g = make_grid(1, 1 / 16, 2.0)
    f = make_wk(1, g)
    with pytest.raises(ValueError, match="truncates"):
        check_field_dominates(f, 2, 0.0, t_k(2))
    with pytest.raises(ValueError, match="precedes"):
        check_field_dominates(f, 1, 0.0, 0.01)


# non-existence series

def test_series_terms_match_naive_form():
    t = 0.1
    k = np.arange(1, 11)
    naive = (2.0 ** (2 * k - 1) / (2.0 ** (2 * k + 1) - 4) * math.exp(-4 * t)
             * (1 - np.exp((4 - 2.0 ** (2 * k + 1)) * t)))
    np.testing.assert_allclose(noexist_terms(10, t), naive, rtol=1e-13)


def test_series_first_term():
    # k = 1: (2/4) e^{-4t} (1 - e^{-4t})
    t = 0.1
    assert noexist_partial_sum(1, t) == pytest.approx(0.5 * math.exp(-0.4) * -math.expm1(-0.4), rel=1e-15)


def test_series_grows_linearly():
    t = 0.1
    Ks = [10, 100, 1000, 10_000]
    sums = noexist_partial_sums(Ks, t)
    assert sums == sorted(sums)
    assert sums[-1] / 10_000 == pytest.approx(math.exp(-4 * t) / 4, rel=1e-3)
    assert sums[2] == noexist_partial_sum(1000, t)


def test_series_finite_for_huge_k():
    assert np.all(np.isfinite(noexist_terms(5000, 1e-3)))


def test_series_errors():
    with pytest.raises(ValueError):
        noexist_terms(0, 0.1)
    with pytest.raises(ValueError):
        noexist_terms(5, 0.0)


def _oracle(u0, t, nodes=64):
    grid = u0.grid
    x, wq = np.polynomial.legendre.leggauss(nodes)
    acc = np.zeros(grid.n)
    base = u0.values()
    for s, w in zip((x + 1) * t / 2, wq * t / 2):
        vs = base * np.exp(-s * grid.radius_sq)
        conv = np.convolve(vs, vs)[grid.half:grid.half + grid.n] * grid.dxi
        acc += w * np.exp((s - t) * grid.radius_sq) * grid.radius * conv
    return acc


@pytest.mark.parametrize("t", [0.05, 0.1, 0.3])
def test_first_iterate_bound_below_quadrature(t):
    g = make_grid(1, 1 / 16, 4.0)
    oracle = _oracle(make_v(1, g), t)
    bound = first_iterate_lower_bound(g, 1, t)
    assert np.all(bound.values() <= oracle)
    assert bound.meta["S_K"] == noexist_partial_sum(1, t)


def test_unweighted_bound_holds_only_away_from_origin():
    g = make_grid(1, 1 / 16, 4.0)
    t = 0.1
    oracle = _oracle(make_v(1, g), t)
    literal = first_iterate_lower_bound(g, 1, t, frequency_weight=False).values()
    far = g.radius >= 1
    assert np.all(literal[far] <= oracle[far])
    # the nonlinear term carries a factor |ξ| and vanishes at the origin
    assert oracle[g.half] == 0 and literal[g.half] > 0


def test_first_iterate_bound_needs_room():
    with pytest.raises(ValueError):
        first_iterate_lower_bound(make_grid(1, 1 / 16, 1.0), 1, 0.1)


def test_plain_float_stage_times():
    # floats cannot separate t_k for large k; a float at t_k still reaches it
    for k in range(1, 64):
        assert verify_inductive_step(k, float(t_k(k))) >= 0
    cert = build_certificate(5, k_max=60, t=float(t_k(40)))
    assert cert.failed_stage() is None
