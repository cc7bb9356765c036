import numpy as np
import pytest
from scipy import integrate

from distdp import (
    Dirac,
    Normal,
    ProjectionParam,
    lp_cdf_distance,
    project,
    wasserstein,
    xi_lin,
    xi_stats,
)
from helpers import project_oracle, random_finite


def test_xi_lin_examples():
    xi = xi_lin(3, 1.0, 0.0)
    assert np.allclose(xi.xs, [-1.0, 0.0, 1.0])
    assert np.allclose(xi.ys, [-0.5, 0.5])
    one = xi_lin(1, 1.0, 5.0)
    assert np.array_equal(one.xs, [5.0])
    assert one.ys.size == 0
    two = xi_lin(2, 2.0, 0.0)
    assert np.allclose(two.xs, [-2.0, 2.0])
    assert np.allclose(two.ys, [0.0])
    with pytest.raises(ValueError):
        xi_lin(3, 0.0, 0.0)
    with pytest.raises(ValueError):
        xi_lin(3, -1.0, 0.0)


def test_interlacing_enforced():
    with pytest.raises(ValueError):
        ProjectionParam(np.array([0.0, 1.0]), np.array([2.0]))
    # equality is allowed
    ProjectionParam(np.array([0.0, 1.0]), np.array([1.0]))


def test_project_normal_symmetry():
    got = project(Normal(0, 1), xi_lin(2, 1.0, 0.0))
    assert np.allclose(got.points, [-1.0, 1.0])
    assert np.allclose(got.weights, [0.5, 0.5])


def test_project_dirac_full_mass_in_cell():
    xi = xi_lin(4, 3.0, 0.0)  # xs -3,-1,1,3; ys -2,0,2
    got = project(Dirac(0.5), xi)
    assert got.cdf(1.0) - got.cdf(0.99) == pytest.approx(1.0)
    # boundary: mass at y_i belongs to the left cell (half-open cells)
    got = project(Dirac(0.0), xi)
    weights = np.zeros(4)
    weights[np.searchsorted(got.points, -1.0)] = 1.0
    assert np.allclose(got.weights[got.points == -1.0], 1.0)


def test_project_matches_atom_pushforward_oracle():
    rng = np.random.default_rng(11)
    for _ in range(200):
        mu = random_finite(rng, max_atoms=8)
        m = int(rng.integers(1, 7))
        xi = xi_lin(m, float(rng.uniform(0.5, 6.0)), float(rng.normal()))
        got = project(mu, xi)
        want = project_oracle(mu, xi)
        assert np.array_equal(got.points, want.points)
        assert np.max(np.abs(got.weights - want.weights)) <= 1e-15


def test_xi_stats_examples():
    assert xi_stats(xi_lin(3, 1.0, 0.0)) == (1.0, 0.0, 1.0)
    assert xi_stats(xi_lin(1, 1.0, 5.0)) == (0.0, 5.0, 0.0)
    xi = ProjectionParam(np.array([0.0, 1.0, 5.0]), np.array([0.5, 3.0]))
    assert xi_stats(xi)[0] == 4.0


def test_mass_conservation_exact():
    rng = np.random.default_rng(5)
    for dist in [Normal(0.7, 2.0), random_finite(rng, 6)]:
        for m in (1, 2, 5, 33):
            got = project(dist, xi_lin(m, 2.5, 0.3))
            assert abs(got.weights.sum() - 1.0) <= 1e-12


def test_support_confinement():
    rng = np.random.default_rng(6)
    for _ in range(50):
        m = int(rng.integers(1, 9))
        w = float(rng.uniform(0.5, 4.0))
        z = float(rng.normal())
        xi = xi_lin(m, w, z)
        got = project(Normal(0, 4), xi)
        delta, zc, wc = xi_stats(xi)
        assert got.points[0] >= zc - wc - 1e-12
        assert got.points[-1] <= zc + wc + 1e-12


def test_quantile_identity_with_cell_representatives():
    # quantile of the projection equals the cell representative of the quantile
    rng = np.random.default_rng(7)
    for _ in range(100):
        mu = random_finite(rng, 7)
        xi = xi_lin(int(rng.integers(2, 8)), float(rng.uniform(1, 5)), float(rng.normal()))
        pi = project(mu, xi)
        us = rng.uniform(1e-9, 1 - 1e-9, 64)
        raw = mu.quantile(us)
        cells = np.searchsorted(xi.ys, raw, side="left")
        assert np.array_equal(pi.quantile(us), xi.xs[cells])


def test_zero_weight_cells_from_tied_cuts():
    xi = ProjectionParam(np.array([0.0, 1.0, 2.0]), np.array([1.0, 1.0]))
    got = project(Normal(0, 1), xi)
    assert got.size == 3
    assert got.weights[1] == 0.0


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_projection_error_bound(beta):
    # projection error is within 4*max{delta^(b/(1vb)), tail^(1/(1vb))}
    mu = Normal(0, 1)
    for m, w in [(8, 2.0), (16, 3.0), (64, 4.0), (128, 2.0)]:
        xi = xi_lin(m, w, 0.0)
        delta, z, wc = xi_stats(xi)
        measured = wasserstein(project(mu, xi), mu, beta)

        def integrand(x):
            lo = mu.cdf(z - wc - x)
            hi = 1.0 - mu.cdf(z + wc + x)
            return x ** (beta - 1.0) * (lo + hi)

        tail, _ = integrate.quad(integrand, 0.0, np.inf)
        one_v = max(1.0, beta)
        bound = 4.0 * max(delta ** (beta / one_v), tail ** (1.0 / one_v))
        assert measured <= bound + 1e-9, (m, w, beta)


def test_lp_projection_error_bound():
    mu = Normal(0, 1)
    beta = 2.0
    for m, w in [(8, 2.0), (32, 3.0)]:
        xi = xi_lin(m, w, 0.0)
        delta, z, wc = xi_stats(xi)
        measured = lp_cdf_distance(project(mu, xi), mu, beta)

        def integrand(x):
            p = mu.cdf(z - wc - x) + 1.0 - mu.cdf(z + wc + x)
            return p ** beta

        tail, _ = integrate.quad(integrand, 0.0, np.inf)
        bound = 4.0 * max(delta ** (1.0 / beta), tail ** (1.0 / beta))
        assert measured <= bound + 1e-9
