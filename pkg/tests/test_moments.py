import numpy as np
import pytest

from sweyl.grid import make_grid
from sweyl.moments import (
    MomentBoundaryError, UnderResolvedPhase, analytic_first_moment, analytic_second_moment,
    classical_limit_scan, conditional_moment, hj_residual,
)
from sweyl.states import WkbFields, free_particle_fields, gaussian_density, gaussian_state, ho_eigenstate
from sweyl.transform import PhaseSpaceFunction, s_wigner


@pytest.fixture
def g256():
    return make_grid(256, -12, 12)


@pytest.mark.parametrize("s", [0, 0.5, -0.3])
def test_ground_state_closed_forms(g256, s):
    q = g256.q_values
    psi = gaussian_state(g256)
    p1 = analytic_first_moment(psi, s).values
    p2 = analytic_second_moment(psi, s).values
    core = np.abs(q) < 5
    assert np.abs(p1 - 1j * s * q)[core].max() < 1e-9
    assert np.abs(p2 - ((1 + s**2) / 2 - s**2 * q**2))[core].max() < 1e-8


def test_boosted_state_first_moment(g256):
    psi = gaussian_state(g256, 0.0, 2.0)
    q = g256.q_values
    core = np.abs(q) < 5
    assert np.abs(analytic_first_moment(psi, 0).values - 2)[core].max() < 1e-9


@pytest.mark.parametrize("s", [0, 0.3, -0.3, 0.5])
@pytest.mark.parametrize("state", ["ground", "boosted", "ho3"])
def test_grid_moments_match_analytic(g256, s, state):
    psi = {"ground": gaussian_state(g256), "boosted": gaussian_state(g256, 0, 2.0),
           "ho3": ho_eigenstate(g256, 3)}[state]
    a = s_wigner(psi, s)
    dens = np.abs(psi.samples) ** 2
    mask = dens > 1e-6 * dens.max()
    for n, fn in ((1, analytic_first_moment), (2, analytic_second_moment)):
        c = conditional_moment(a, n).values
        assert np.abs(c - fn(psi, s).values)[mask].max() < 1e-7


def test_zero_order_is_one(g256):
    a = s_wigner(gaussian_state(g256), 0.3)
    prof = conditional_moment(a, 0)
    assert np.abs(prof.values[prof.defined] - 1).max() < 1e-12


def test_node_is_undefined(g256):
    psi = ho_eigenstate(g256, 1)
    prof = analytic_first_moment(psi, 0)
    assert not prof.defined[128]
    assert prof.defined[100]


def test_moment_argument_checks(g256):
    a = s_wigner(gaussian_state(g256), 0)
    with pytest.raises(ValueError):
        conditional_moment(a, -1)
    with pytest.raises(ValueError):
        conditional_moment(a, 1.5)
    with pytest.raises(ValueError):
        conditional_moment(PhaseSpaceFunction(g256, a.samples, 0, "operator-symbol"), 1)


def test_boundary_error():
    g = make_grid(32, -4, 4)
    # a boosted packet whose momentum tail reaches the lattice edge
    a = s_wigner(gaussian_state(g, 0, 3.0), 0)
    with pytest.raises(MomentBoundaryError):
        conditional_moment(a, 2)


def test_hj_residual_examples():
    g = make_grid(200, -2, 2)
    q = g.q_values
    quad = WkbFields(gaussian_density(), lambda x: x**2, lambda x: 0 * x)
    # S = q^2, m = 1, V = 0: R = 2 q^2, so R(1) = 2
    r = hj_residual(quad, g)
    assert r[np.argmin(np.abs(q - 1))] == pytest.approx(2.0, abs=1e-10)
    # S = -E t: R = V - E
    stat = WkbFields(gaussian_density(), lambda x: 0 * x, lambda x: -0.5 + 0 * x,
                     potential_fn=lambda x: x**2 / 2)
    assert np.abs(hj_residual(stat, g) - (q**2 / 2 - 0.5)).max() < 1e-12
    assert np.abs(hj_residual(free_particle_fields(1.3), g)).max() < 1e-12


def test_gradient_override():
    g = make_grid(64, -2, 2)
    quad = WkbFields(gaussian_density(), lambda x: x**2, lambda x: 0 * x)
    r = hj_residual(quad, g, gradient_fn=lambda x: 2 * x)
    assert np.abs(r - 2 * g.q_values**2).max() < 1e-13


def test_scan_free_particle_is_exact():
    g = make_grid(1024, -16, 16)
    rep = classical_limit_scan(free_particle_fields(1.0, width=2.0), [-0.5, 0, 0.5], [0.4, 0.2], g)
    for row in rep.per_hbar:
        assert row["p1_s0_vs_gradS"] < 1e-9
        assert row["p2_s2_vs_minus_mR"] >= 0
    assert rep.per_hbar[-1]["p2_s0_vs_gradS2"] < 0.05
    assert len(rep.rates["p1_s1_max"]) == 1


def test_scan_rate_for_nonsolution():
    g = make_grid(4096, -8, 8)
    fields = WkbFields(gaussian_density(), lambda x: x**2, lambda x: 0 * x)
    rep = classical_limit_scan(fields, [-0.5, 0, 0.5], [0.4, 0.2, 0.1], g)
    # the s^1 coefficient of <p> is hbar (ln rho)'/2, linear in hbar
    for ratio in rep.rates["p1_s1_max"]:
        assert ratio == pytest.approx(2.0, rel=1e-6)
    # away from a Hamilton-Jacobi solution the s^0 term of <p^2> carries R too
    assert rep.per_hbar[-1]["p2_s0_vs_gradS2"] > 0.1
    assert rep.per_hbar[-1]["p2_s2_vs_minus_mR"] < 0.01


def test_scan_errors():
    g = make_grid(64, -4, 4)
    f = free_particle_fields(1.0)
    with pytest.raises(ValueError):
        classical_limit_scan(f, [0, 0.5], [0.5], g)
    with pytest.raises(ValueError):
        classical_limit_scan(f, [0, 0.5, -0.5], [], g)
    with pytest.raises(UnderResolvedPhase):
        classical_limit_scan(WkbFields(gaussian_density(), lambda x: 40 * x, lambda x: 0 * x),
                             [0, 0.5, -0.5], [0.1], g)
