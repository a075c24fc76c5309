import numpy as np
import pytest
from numpy.polynomial import Polynomial

from sweyl.dynamics import (
    RK4_STABILITY, HamiltonianSpec, NonFiniteError, StabilityError, cross_validate,
    evolve_moyal, evolve_schrodinger,
)
from sweyl.grid import make_grid
from sweyl.states import gaussian_state, ho_eigenstate
from sweyl.transform import marginal_position, s_wigner


def _center(a):
    g = a.grid
    q, p = np.meshgrid(g.q_values, g.p_values, indexing="ij")
    w = a.samples
    return (w * q).sum().real * g.dq * g.dp, (w * p).sum().real * g.dq * g.dp


def test_hamiltonian_spec_validation():
    with pytest.raises(ValueError):
        HamiltonianSpec("quartic")
    with pytest.raises(ValueError):
        HamiltonianSpec(mass=0)
    with pytest.raises(ValueError):
        HamiltonianSpec("custom")
    with pytest.raises(ValueError):
        HamiltonianSpec("custom", potential=lambda q: 1j * q).potential_values(np.ones(3))
    h = HamiltonianSpec("harmonic", mass=2.0, omega=3.0)
    assert h.potential_values(np.array([1.0]))[0] == pytest.approx(9.0)


def test_zero_steps_returns_initial():
    g = make_grid(32, -6, 6)
    rho = s_wigner(gaussian_state(g), 0.3)
    res = evolve_moyal(rho, HamiltonianSpec(), 0.3, 1e-3, 0)
    assert res.times == [0.0]
    assert res.final is rho


def test_harmonic_quarter_period_rotates_center():
    g = make_grid(64, -8, 8)
    rho = s_wigner(gaussian_state(g, 1.0, 0.0), 0)
    n = 1571
    res = evolve_moyal(rho, HamiltonianSpec("harmonic"), 0, np.pi / 2 / n, n)
    q, p = _center(res.final)
    assert abs(q) < 1e-6 and abs(p + 1) < 1e-6


@pytest.mark.parametrize("s", [0, 0.3])
def test_mass_and_marginal_over_period(s):
    g = make_grid(64, -8, 8)
    psi = gaussian_state(g, 1.0, 0.5)
    rho = s_wigner(psi, s)
    n = 3142
    res = evolve_moyal(rho, HamiltonianSpec("harmonic"), s, 2 * np.pi / n, n)
    assert res.diagnostics["max_mass_drift"] < 1e-12
    mq, _ = marginal_position(res.final)
    assert np.abs(mq - np.abs(psi.samples) ** 2).max() < 1e-6


def test_stationary_eigenstate():
    # the box must hold the kernel tails, hence [-12, 12]
    g = make_grid(128, -12, 12)
    rho = s_wigner(ho_eigenstate(g, 2), 0.3)
    res = evolve_moyal(rho, HamiltonianSpec("harmonic"), 0.3, 1e-3, 300)
    assert np.abs(res.final.samples - rho.samples).max() < 1e-12


def test_free_spreading_variance():
    g = make_grid(256, -20, 20)
    res = evolve_schrodinger(gaussian_state(g), HamiltonianSpec(), 1e-2, 100)
    d = np.abs(res.final.samples) ** 2
    # width 1 at t=0 has variance 1/2; it grows as (1 + t^2)/2
    assert (d * g.q_values**2).sum() * g.dq == pytest.approx(1.0, abs=1e-10)
    assert res.diagnostics["max_norm_drift"] < 1e-12


def test_time_reversal():
    g = make_grid(64, -8, 8)
    rho = s_wigner(gaussian_state(g, 1.0), 0.3)
    H = HamiltonianSpec("harmonic")
    fwd = evolve_moyal(rho, H, 0.3, 1e-2, 20).final
    back = evolve_moyal(fwd, H, 0.3, -1e-2, 20).final
    assert np.abs(back.samples - rho.samples).max() < 1e-9


def test_stability_guard():
    g = make_grid(64, -8, 8)
    rho = s_wigner(gaussian_state(g), 0)
    with pytest.raises(StabilityError):
        evolve_moyal(rho, HamiltonianSpec("harmonic"), 0, 1.0, 1)
    scale = evolve_moyal(rho, HamiltonianSpec("harmonic"), 0, 1e-3, 1).diagnostics["spectral_scale"]
    evolve_moyal(rho, HamiltonianSpec("harmonic"), 0, 0.99 * RK4_STABILITY / scale, 1)


def test_non_finite_detected():
    g = make_grid(32, -6, 6)
    rho = s_wigner(gaussian_state(g), 0)
    bad = rho.replace(np.where(rho.samples > 0.3, np.nan, rho.samples))
    with pytest.raises(NonFiniteError) as info:
        evolve_moyal(bad, HamiltonianSpec(), 0, 1e-3, 5)
    assert info.value.step == 1


def test_bad_arguments():
    g = make_grid(32, -6, 6)
    rho = s_wigner(gaussian_state(g), 0)
    with pytest.raises(ValueError):
        evolve_moyal(rho, HamiltonianSpec(), 0, 0.0, 1)
    with pytest.raises(ValueError):
        evolve_moyal(rho, HamiltonianSpec(), 0.3, 1e-3, 1)
    with pytest.raises(ValueError):
        evolve_moyal(rho, HamiltonianSpec(), 0, 1e-3, 5, save_every=0)


def test_snapshots():
    g = make_grid(32, -6, 6)
    res = evolve_schrodinger(gaussian_state(g), HamiltonianSpec(), 1e-2, 10, save_every=4)
    assert res.times == pytest.approx([0, 0.04, 0.08, 0.1])


@pytest.mark.parametrize("s,H", [(0.3, HamiltonianSpec()), (0, HamiltonianSpec("harmonic")),
                                 (0.2, HamiltonianSpec("custom", potential=Polynomial([0, 0, 0.5, 0, 0.05])))])
def test_cross_validation(s, H):
    g = make_grid(128, -10, 10)
    rep = cross_validate(gaussian_state(g, 0.5, 0.5), H, s, 0.1, dt=5e-4)
    assert rep.passed, rep.to_dict()
    assert rep.n_steps == 200


def test_cross_validation_at_zero_time():
    g = make_grid(64, -8, 8)
    rep = cross_validate(gaussian_state(g), HamiltonianSpec(), 0, 0.0)
    assert rep.n_steps == 0 and rep.max_deviation == 0
    with pytest.raises(ValueError):
        cross_validate(gaussian_state(g), HamiltonianSpec(), 0, -1.0)


def test_growth_bound_only_for_complex_s():
    g = make_grid(64, -8, 8)
    h = HamiltonianSpec("harmonic")
    for s, positive in ((0, False), (0.4, False), (0.2j, True)):
        rho = s_wigner(gaussian_state(g), s)
        bound = evolve_moyal(rho, h, s, 1e-3, 1).diagnostics["growth_bound"]
        assert (bound > 0) == positive
