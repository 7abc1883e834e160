import numpy as np
import pytest

from sldiv.displacement import (BracketError, DiffusivityDomainError, DisplacementPolicy,
                                LineSampler, advective_displacement, along, bracket_upper,
                                diffusive_bisection, diffusive_fixed_point, solve_displacements)
from sldiv.grid import Dirichlet, Grid1D
from sldiv.interp import nodal_sampler
from sldiv.oracles import BarenblattParams, barenblatt_eval


def linear_root(a, b, x, dt, side=1):
    """Positive root of d^2 - 2 dt b side d - 2 dt (a + b x) = 0 (nu = a + b x)."""
    p = 2 * dt * b * side
    q = 2 * dt * (a + b * x)
    return 0.5 * (p + np.sqrt(p * p + 4 * q))


def test_constant_nu_one_iteration():
    sampler = along(lambda x: np.full_like(x, 0.05), np.array([0.0, 3.0]))
    res = diffusive_fixed_point(sampler, 0.0275, DisplacementPolicy(max_iters=1))
    assert np.allclose(res.delta, np.sqrt(0.00275), atol=1e-16)
    assert res.delta[0] == pytest.approx(5.2440e-2, abs=1e-6)
    assert res.converged.all()


def test_zero_nu_gives_zero():
    sampler = along(lambda x: np.zeros_like(x), np.linspace(0, 1, 5))
    for policy in (DisplacementPolicy(), DisplacementPolicy("bisection")):
        res = solve_displacements(sampler, 0.1, policy, hi=1.0)
        assert np.all(res.delta == 0.0)


def test_linear_nu_matches_quadratic_formula():
    nu = lambda x: 0.01 + 0.002 * x
    expected = linear_root(0.01, 0.002, 1.0, 0.1)
    assert expected == pytest.approx(4.919e-2, abs=5e-6)
    sampler = along(nu, np.array([1.0]))
    fp = diffusive_fixed_point(sampler, 0.1, DisplacementPolicy(max_iters=3))
    bis = diffusive_bisection(sampler, 0.1, bracket_upper(0.1, 0.02, 0.1))
    assert fp.delta[0] == pytest.approx(expected, abs=1e-8)
    assert bis.delta[0] == pytest.approx(expected, abs=1e-12)
    minus = along(nu, np.array([1.0]), side=-1)
    assert diffusive_bisection(minus, 0.1, 1.0).delta[0] == pytest.approx(
        linear_root(0.01, 0.002, 1.0, 0.1, side=-1), abs=1e-12)


def test_iteration_error_order_in_dt():
    nu = lambda x: 0.01 + 0.05 * x
    errors = {}
    for dt in (4e-3, 1e-3):
        exact = linear_root(0.01, 0.05, 1.0, dt)
        errors[dt] = [abs(diffusive_fixed_point(along(nu, np.array([1.0])), dt,
                                                DisplacementPolicy(max_iters=k)).delta[0] - exact)
                      for k in (1, 2)]
    # error(k) = O(dt^((k+1)/2)) at least; for smooth nu the initial guess is
    # already O(dt) accurate, so the observed ratios are 4^((k+2)/2)
    for k, observed in zip((1, 2), (8.0, 16.0)):
        ratio = errors[4e-3][k - 1] / errors[1e-3][k - 1]
        assert ratio >= 0.85 * 4.0 ** ((k + 1) / 2)
        assert ratio == pytest.approx(observed, rel=0.15)


def test_bisection_picks_nonzero_root_near_support_edge():
    params = BarenblattParams()
    g = Grid1D(20.0, 51, Dirichlet(), origin=-10.0)
    nu_nodes = 3.0 * barenblatt_eval(g.nodes, 0.0, params) ** 2
    nu = nodal_sampler(g, nu_nodes)
    outside = np.flatnonzero((nu_nodes == 0) & (np.roll(nu_nodes, -1) > 0))[:1]
    x = g.nodes[outside]
    dt = 0.05
    hi = bracket_upper(dt, nu_nodes.max(), g.dx)
    res = diffusive_bisection(along(nu, x, +1, g), dt, hi)
    # dense scan oracle for the largest sign change of g on [0, hi]
    s = np.linspace(0.0, hi, 200001)
    gs = s - np.sqrt(2 * dt * nu(x[0] + s))
    largest = s[np.flatnonzero(gs < 0)[-1]]
    assert res.delta[0] > 0
    assert res.delta[0] == pytest.approx(largest, abs=2 * hi / 200000)
    stalled = diffusive_fixed_point(along(nu, x, +1, g), dt, DisplacementPolicy())
    assert stalled.delta[0] == 0.0


def test_fallback_agrees_with_bisection_where_converged():
    g = Grid1D(20.0, 101, Dirichlet(), origin=-10.0)
    nu = nodal_sampler(g, 3.0 * barenblatt_eval(g.nodes, 0.0) ** 2)
    sampler = LineSampler(nu, (g.nodes,), (1.0,), (g,))
    hi = bracket_upper(0.05, 3.0, g.dx)
    policy = DisplacementPolicy("fallback", init="large").for_length(20.0)
    fb = solve_displacements(sampler, 0.05, policy, hi)
    bis = solve_displacements(sampler, 0.05, DisplacementPolicy("bisection").for_length(20.0), hi)
    tol = policy.tolerance()
    assert np.all(np.abs(fb.delta - bis.delta)[fb.converged] <= 10 * tol + 1e-9)


def test_bracket_expands_when_needed():
    sampler = along(lambda x: np.full_like(x, 4.0), np.zeros(3))
    res = diffusive_bisection(sampler, 1.0, hi=0.1)
    assert np.allclose(res.delta, np.sqrt(8.0), atol=1e-10)


def test_bracket_error_when_nu_unbounded():
    sampler = along(lambda x: 1.0 + x**4, np.zeros(1))
    with pytest.raises(BracketError):
        diffusive_bisection(sampler, 1.0, hi=1.0)


def test_negative_nu_reports_nodes():
    sampler = along(lambda x: x - 0.5, np.array([1.0, 0.0, 2.0]))
    with pytest.raises(DiffusivityDomainError, match=r"\[1\]"):
        diffusive_fixed_point(sampler, 0.1)


def test_policy_validation_and_defaults():
    assert DisplacementPolicy("fp").method == "fixed_point"
    assert DisplacementPolicy().iterations == 3
    assert DisplacementPolicy("bisect").iterations == 60
    assert DisplacementPolicy().for_length(20.0).tolerance() == pytest.approx(2e-11)
    with pytest.raises(ValueError):
        DisplacementPolicy("newton")
    with pytest.raises(ValueError):
        DisplacementPolicy(max_iters=0)
    with pytest.raises(ValueError):
        DisplacementPolicy(init="small")
    with pytest.raises(ValueError):
        diffusive_fixed_point(along(lambda x: x, np.ones(1)), 0.1,
                              DisplacementPolicy(init="large"))


def test_advective_constant_and_zero():
    x = np.linspace(0, 1, 7)
    assert np.allclose(advective_displacement(lambda y: np.full_like(y, 2.0), x, 0.1), 0.2)
    assert np.all(advective_displacement(lambda y: 0.0 * y, x, 0.1, iters=1) == 0.0)
    with pytest.raises(ValueError):
        advective_displacement(lambda y: y, x, 0.1, iters=0)


def test_advective_geometric_series():
    x = np.array([0.5, 1.0, 2.0])
    dt = 0.01
    alpha = advective_displacement(lambda y: y, x, dt, iters=3)
    exact = dt * x / (1 + dt)
    assert np.all(np.abs(alpha - exact) <= 2 * dt**5 * np.abs(x))


def test_advective_2d_rotation():
    x1, x2 = np.array([1.0]), np.array([0.0])
    a1, a2 = advective_displacement(lambda a, b: (b, -a), (x1, x2), 1e-3)
    assert a1[0] == pytest.approx(0.0, abs=2e-6)
    assert a2[0] == pytest.approx(-1e-3, rel=1e-5)


def test_fixed_point_map_is_contractive(rng):
    nu = lambda x: 0.5 + 0.1 * np.sin(x)
    dt = 0.01
    x = rng.uniform(0, 6, size=200)
    d1, d2 = rng.uniform(0.0, 0.3, size=(2, 200))
    t1 = np.sqrt(2 * dt * nu(x + d1))
    t2 = np.sqrt(2 * dt * nu(x + d2))
    lip = np.max(np.abs(t1 - t2) / np.abs(d1 - d2))
    assert lip <= np.sqrt(dt / 2) * 0.1 / 0.4 + 1e-6
