"""Norm token grammar and quadrature tests."""

import math
from types import SimpleNamespace

import numpy as np
import pytest

from imexbdf import norms
from imexbdf.errors import ConfigError, DomainError
from imexbdf.operators import dirichlet_grid, periodic_grid


# ------------------------------------------------------------- tokens


def test_parse_basic_tokens():
    assert norms.parse_norm_token("l2") == norms.L2
    assert norms.parse_norm_token("linf") == norms.LINF
    assert norms.parse_norm_token("w1inf") == norms.W1INF

def test_parse_exponent_tokens():
    kind = norms.parse_norm_token("lq:3.5")
    assert kind.parts == (norms.NormPart(False, 3.5),)
    kind = norms.parse_norm_token("w1q:4")
    assert kind.parts == (norms.NormPart(True, 4.0),)

def test_parse_sum_token():
    kind = norms.parse_norm_token("l2+w1inf")
    assert kind.parts == (norms.NormPart(False, 2.0), norms.NormPart(True, math.inf))

@pytest.mark.parametrize("bad", ["h1", "l3", "w2inf", "", "lq:1", "lq:0.5", "lq:x", "l2+"])
def test_parse_rejects_bad_tokens(bad):
    with pytest.raises(ConfigError):
        norms.parse_norm_token(bad)


# ------------------------------------------------------ spatial norms


def test_constant_one_l2_periodic():
    g = periodic_grid((0.0, 1.0), 64)
    assert norms.spatial_norm(np.ones(64), norms.L2, g) == pytest.approx(1.0, abs=1e-14)

def test_sine_l2_value():
    g = dirichlet_grid((0.0, 1.0), 2000)
    x = g.axis_nodes(0)
    val = norms.spatial_norm(np.sin(np.pi * x), norms.L2, g)
    assert val == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-4)

def test_sine_w1inf_value():
    g = dirichlet_grid((0.0, 1.0), 2000)
    x = g.axis_nodes(0)
    v = np.sin(np.pi * x)
    val = norms.spatial_norm(v, norms.W1INF, g)
    assert val == pytest.approx(math.pi, abs=1e-3)
    # intersection form adds the L^inf part
    both = norms.spatial_norm(v, norms.parse_norm_token("linf+w1inf"), g)
    assert both == pytest.approx(math.pi + np.max(np.abs(v)), abs=2e-3)

def test_periodic_gradient_is_spectral():
    g = periodic_grid((0.0, 2.0 * np.pi), 32)
    x = g.axis_nodes(0)
    v = np.sin(3.0 * x)
    val = norms.spatial_norm(v, norms.W1INF, g)
    assert val == pytest.approx(3.0, abs=1e-10)  # exact to round-off

def test_h1_is_quadratic_mean():
    g = periodic_grid((0.0, 2.0 * np.pi), 128)
    x = g.axis_nodes(0)
    v = np.sin(x)
    l2 = norms.spatial_norm(v, norms.L2, g)
    grad_l2 = norms.spatial_norm(v, norms.parse_norm_token("w1q:2"), g)
    h1 = norms.spatial_norm(v, norms.H1, g)
    assert h1 == pytest.approx(math.hypot(l2, grad_l2), rel=1e-13)

def test_lq_matches_direct_formula():
    g = periodic_grid((0.0, 1.0), 50)
    rng = np.random.default_rng(3)
    v = rng.standard_normal(50)
    q = 3.0
    direct = (g.h[0] * np.sum(np.abs(v) ** q)) ** (1.0 / q)
    val = norms.spatial_norm(v, norms.parse_norm_token("lq:3"), g)
    assert val == pytest.approx(direct, rel=1e-13)

def test_mismatched_shape_rejected():
    g = dirichlet_grid((0.0, 1.0), 16)
    with pytest.raises(DomainError):
        norms.spatial_norm(np.ones(17), norms.L2, g)

def test_quadrature_second_order_convergence():
    # L2 norm of a smooth function approaches the analytic value at
    # order >= 2 in h
    exact = math.sqrt(0.5 - math.sin(2.0) / 4.0)  # ||sin(x)||_{L2(0,1)}
    errs = []
    for M in (100, 200, 400):
        g = dirichlet_grid((0.0, 1.0), M)
        x = g.axis_nodes(0)
        errs.append(abs(norms.spatial_norm(np.sin(x), norms.L2, g) - exact))
    assert errs[0] / errs[1] > 1.8
    assert errs[1] / errs[2] > 1.8


def test_norm_axioms_random_states():
    g = periodic_grid((0.0, 1.0), 40)
    rng = np.random.default_rng(9)
    kinds = [norms.L2, norms.LINF, norms.W1INF, norms.parse_norm_token("l2+w1q:3"), norms.H1]
    for _ in range(5):
        u = rng.standard_normal(40) + 1j * rng.standard_normal(40)
        v = rng.standard_normal(40) + 1j * rng.standard_normal(40)
        c = rng.uniform(0.1, 10.0)
        for kind in kinds:
            nu = norms.spatial_norm(u, kind, g)
            nv = norms.spatial_norm(v, kind, g)
            nc = norms.spatial_norm(c * u, kind, g)
            nsum = norms.spatial_norm(u + v, kind, g)
            assert nc == pytest.approx(c * nu, rel=1e-12)
            assert nsum <= nu + nv + 1e-12 * (nu + nv)


# --------------------------------------------------------- time norms


def test_time_norm_constant_sequence():
    N, tau, c, p = 16, 0.25, 3.0, 4.0
    val = norms.lp_time_norm([c] * N, tau, p)
    assert val == pytest.approx(c * (N * tau) ** (1.0 / p), rel=1e-13)

def test_time_norm_single_value_tau_one():
    assert norms.lp_time_norm([2.5], 1.0, 2.0) == pytest.approx(2.5)

def test_time_norm_hand_example():
    assert norms.lp_time_norm([1.0, 2.0, 3.0], 0.5, 2.0) == pytest.approx(math.sqrt(7.0))

def test_time_norm_max_for_infinite_p():
    assert norms.lp_time_norm([1.0, 5.0, 2.0], 0.1, math.inf) == 5.0

def test_time_norm_bounded_by_max():
    rng = np.random.default_rng(4)
    vals = rng.uniform(0.0, 2.0, size=20)
    tau = 0.05
    for p in (1.5, 2.0, 4.0):
        lp = norms.lp_time_norm(vals, tau, p)
        bound = (len(vals) * tau) ** (1.0 / p) * vals.max()
        assert lp <= bound * (1.0 + 1e-13)

def test_time_norm_rejects_empty_and_bad_input():
    with pytest.raises(DomainError):
        norms.lp_time_norm([], 0.1, 2.0)
    with pytest.raises(DomainError):
        norms.lp_time_norm([1.0], 0.0, 2.0)
    with pytest.raises(DomainError):
        norms.lp_time_norm([np.nan], 0.1, 2.0)
    with pytest.raises(DomainError):
        norms.lp_time_norm([1.0], 0.1, 1.0)


# ------------------------------------------- difference quotients


def _fake_trajectory(states, tau, grid):
    return SimpleNamespace(states=states, tau=tau, grid=grid)

def test_difference_quotients_constant_trajectory():
    g = periodic_grid((0.0, 1.0), 8)
    traj = _fake_trajectory([np.ones(8)] * 4, 0.1, g)
    assert norms.difference_quotient_seq(traj, norms.LINF) == [0.0, 0.0, 0.0]

def test_difference_quotients_linear_growth():
    g = periodic_grid((0.0, 1.0), 8)
    w = np.arange(8.0)
    tau = 0.2
    states = [n * tau * w for n in range(5)]
    traj = _fake_trajectory(states, tau, g)
    vals = norms.difference_quotient_seq(traj, norms.LINF)
    expect = norms.spatial_norm(w, norms.LINF, g)
    assert vals == pytest.approx([expect] * 4, rel=1e-12)

def test_difference_quotients_match_direct_formula():
    g = periodic_grid((0.0, 1.0), 12)
    rng = np.random.default_rng(8)
    states = [rng.standard_normal(12) for _ in range(3)]
    tau = 0.3
    traj = _fake_trajectory(states, tau, g)
    vals = norms.difference_quotient_seq(traj, norms.L2)
    for n in (1, 2):
        direct = norms.spatial_norm((states[n] - states[n - 1]) / tau, norms.L2, g)
        assert vals[n - 1] == pytest.approx(direct, rel=1e-14)

def test_difference_quotients_need_two_states():
    g = periodic_grid((0.0, 1.0), 8)
    with pytest.raises(DomainError):
        norms.difference_quotient_seq(_fake_trajectory([np.ones(8)], 0.1, g), norms.L2)
