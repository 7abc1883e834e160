import math

import numpy as np
import pytest

from sldiv.grid import (DegenerateReferenceError, Dirichlet, Grid1D, Grid2D, TimeGrid,
                        check_values, l2_norm, linf_norm, relative_error, stability_numbers)


def test_periodic_spacing_and_nodes():
    g = Grid1D(10.0, 200)
    assert g.dx == 0.05
    assert g.nodes[0] == 0.0
    assert g.nodes[-1] == pytest.approx(10.0 - 0.05)


def test_dirichlet_includes_endpoints():
    g = Grid1D(2000.0, 33, Dirichlet(0.0, 10.0))
    assert g.dx == 62.5
    assert g.nodes[-1] == 2000.0
    assert g.bc.values(3.0) == (0.0, 10.0)


def test_dirichlet_values_may_depend_on_time():
    bc = Dirichlet(lambda t: 2 * t, 1.0)
    assert bc.values(1.5) == (3.0, 1.0)


@pytest.mark.parametrize("n", [0, 3])
def test_too_few_nodes(n):
    with pytest.raises(ValueError):
        Grid1D(1.0, n)


def test_nonpositive_length():
    with pytest.raises(ValueError):
        Grid1D(0.0, 10)


def test_canonical_wraps_or_clamps():
    g = Grid1D(10.0, 20)
    assert np.allclose(g.canonical([-1.0, 10.5]), [9.0, 0.5])
    d = Grid1D(10.0, 21, Dirichlet())
    assert np.allclose(d.canonical([-1.0, 10.5]), [0.0, 10.0])


def test_refine_nests_nodes():
    for g in (Grid1D(10.0, 50), Grid1D(20.0, 51, Dirichlet(), origin=-10.0)):
        fine = g.refine(4)
        assert np.allclose(fine.nodes[::4], g.nodes, atol=1e-12)
    with pytest.raises(ValueError):
        Grid1D(10.0, 50).refine(0)


def test_time_grid_hits_horizon_exactly():
    t = TimeGrid(2.75, 3)
    assert t.time(3) == 2.75
    assert t.dt == pytest.approx(2.75 / 3)
    with pytest.raises(ValueError):
        TimeGrid(1.0, 0)


def test_grid2d_mesh_is_row_major():
    g = Grid2D(Grid1D(1.0, 4), Grid1D(2.0, 5))
    x1, x2 = g.mesh()
    assert g.shape == (4, 5) == x1.shape
    assert np.all(x1[:, 0] == g.axis1.nodes)
    assert np.all(x2[0, :] == g.axis2.nodes)


def test_check_values_rejects_bad_input():
    g = Grid1D(1.0, 4)
    with pytest.raises(ValueError):
        check_values(np.zeros(5), g)
    with pytest.raises(ValueError):
        check_values([0.0, np.nan, 0.0, 0.0], g)


def test_l2_norm_examples():
    g = Grid1D(10.0, 37)
    assert l2_norm(np.zeros(37), g) == 0.0
    assert l2_norm(np.ones(37), g) == pytest.approx(math.sqrt(10.0), rel=1e-15)


def test_l2_norm_against_two_pass_sum(rng):
    g = Grid1D(3.0, 1001)
    w = rng.normal(size=1001)
    total = 0.0
    for v in w:
        total += v * v
    assert l2_norm(w, g) == pytest.approx(math.sqrt(g.dx * total), rel=1e-12)


def test_l2_norm_2d_uses_cell_area():
    g = Grid2D(Grid1D(2.0, 4), Grid1D(3.0, 6))
    assert l2_norm(np.ones(g.shape), g) == pytest.approx(math.sqrt(6.0))


def test_relative_error_examples():
    g = Grid1D(1.0, 8)
    ref = np.linspace(1.0, 2.0, 8)
    assert relative_error(ref, ref, g) == 0.0
    assert relative_error(2 * ref, ref, g) == pytest.approx(1.0)
    bumped = ref.copy()
    bumped[3] += 1e-3
    assert relative_error(bumped, ref, g, "linf") == pytest.approx(1e-3 / 2.0)


def test_relative_error_degenerate_and_bad_norm():
    g = Grid1D(1.0, 8)
    with pytest.raises(DegenerateReferenceError):
        relative_error(np.ones(8), np.zeros(8), g)
    with pytest.raises(ValueError):
        relative_error(np.ones(8), np.ones(8), g, "l1")


def test_linf_norm():
    assert linf_norm([1.0, -3.0, 2.0]) == 3.0


def test_stability_numbers_examples():
    c, mu = stability_numbers(0.0, 0.05, 0.1, 0.05)
    assert c == 0.0
    # N = 400, M = 100 on L = 10, T = 2.75
    c, mu = stability_numbers(1.0, 0.05, 2.75 / 100, 10.0 / 400)
    assert mu == pytest.approx(1.1)
    c, mu = stability_numbers(1.0, 0.05, 2.75 / 200, 10.0 / 200)
    assert c == pytest.approx(0.275)
    assert mu == pytest.approx(0.1375)
    with pytest.raises(ValueError):
        stability_numbers(1.0, 0.05, 0.0, 0.1)


def test_mu_scales_like_inverse_dx_squared():
    _, mu1 = stability_numbers(1.0, 0.05, 0.01, 0.1)
    _, mu2 = stability_numbers(1.0, 0.05, 0.01, 0.05)
    assert mu2 / mu1 == pytest.approx(4.0, rel=1e-12)
