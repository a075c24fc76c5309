import numpy as np
import pytest

from sweyl.grid import OverflowGuardError, make_grid, to_momentum
from sweyl.states import gaussian_state, ho_eigenstate
from sweyl.transform import (
    PhaseSpaceFunction, SParameter, SParameterError, as_s, characteristic, format_complex,
    kirkwood_product, marginal_momentum, marginal_position, s_wigner, s_wigner_kirkwood,
    s_wigner_momentum, wigner_from_characteristic,
)

S_VALUES = [0, 0.3, -0.3, 0.5, 0.4j]


def origin_value(s):
    """Ground-Gaussian A_s(0, 0) with hbar = 1, from the Gaussian integral of its characteristic function."""
    return 1 / (np.pi * np.sqrt(1 + s**2))


def test_sparameter_validation():
    assert as_s(0.5).r == pytest.approx(-0.75)
    assert as_s(as_s(1j)).value == 1j
    with pytest.raises(SParameterError):
        SParameter(complex(np.nan, 0))
    assert format_complex(0.5 - 2j) == "0.5-2i"


def test_s0_gaussian_is_closed_form():
    g = make_grid(128, -10, 10)
    a = s_wigner(gaussian_state(g), 0)
    q, p = np.meshgrid(g.q_values, g.p_values, indexing="ij")
    assert np.abs(a.samples - np.exp(-q**2 - p**2) / np.pi).max() < 1e-12


@pytest.mark.parametrize("s", [0, 0.5, -0.3])
def test_origin_value(s):
    g = make_grid(256, -12, 12)
    a = s_wigner(gaussian_state(g), s)
    assert a.samples[128, 128] == pytest.approx(origin_value(s), abs=1e-10)


@pytest.mark.parametrize("s", [0.5j, 0.3 + 0.2j])
def test_origin_value_complex_s_is_floor_limited(s):
    # the noise floor clips amplified modes, so the error tracks the floor
    g = make_grid(256, -12, 12)
    psi = gaussian_state(g)
    coarse = abs(s_wigner(psi, s).samples[128, 128] - origin_value(s))
    fine = abs(s_wigner(psi, s, noise_floor=1e-15).samples[128, 128] - origin_value(s))
    assert coarse < 5e-8
    assert fine < 5e-9


@pytest.mark.parametrize("s", S_VALUES)
@pytest.mark.parametrize("state", ["ground", "boosted", "ho3"])
def test_marginals(s, state):
    g = make_grid(256, -12, 12)
    psi = {"ground": gaussian_state(g), "boosted": gaussian_state(g, 0.0, 2.0),
           "ho3": ho_eigenstate(g, 3)}[state]
    a = s_wigner(psi, s)
    mq, iq = marginal_position(a)
    mp, ip = marginal_momentum(a)
    assert np.abs(mq - np.abs(psi.samples) ** 2).max() < 1e-12
    assert np.abs(mp - np.abs(to_momentum(psi).samples) ** 2).max() < 1e-12
    assert max(np.abs(iq).max(), np.abs(ip).max()) < 1e-12


@pytest.mark.parametrize("s", [0, 0.3, -0.3, 0.5, -1, 1])
def test_routes_agree(s):
    g = make_grid(128, -12, 12)
    for psi in (gaussian_state(g, 0.5, -0.7), ho_eigenstate(g, 3)):
        ref = s_wigner(psi, s).samples
        assert np.abs(s_wigner_momentum(to_momentum(psi), s).samples - ref).max() < 1e-11
        assert np.abs(s_wigner_kirkwood(psi, s).samples - ref).max() < 1e-11
        via_m = wigner_from_characteristic(characteristic(psi, s)).samples
        assert np.abs(via_m - ref).max() < 1e-11


def test_kirkwood_product_is_s_plus_one():
    g = make_grid(128, -12, 12)
    psi = gaussian_state(g, 0.3, 0.4)
    assert np.abs(kirkwood_product(psi) - s_wigner(psi, 1).samples).max() < 1e-12


def test_s0_is_real():
    g = make_grid(128, -12, 12)
    assert np.abs(s_wigner(ho_eigenstate(g, 2), 0).samples.imag).max() < 1e-15


@pytest.mark.parametrize("s", [0.4j, 0.8j])
def test_imaginary_s_is_real(s):
    g = make_grid(256, -12, 12)
    assert np.abs(s_wigner(gaussian_state(g), s).samples.imag).max() < 1e-10


@pytest.mark.parametrize("s", [0.3, 0.3 + 0.2j, -0.2 + 0.1j])
def test_conjugation_symmetry(s):
    g = make_grid(256, -12, 12)
    psi = gaussian_state(g, 0.5, 1.0)
    lhs = np.conj(s_wigner(psi, s).samples)
    assert np.abs(lhs - s_wigner(psi, -np.conj(s)).samples).max() < 1e-10


def test_characteristic_at_origin_is_norm():
    g = make_grid(128, -12, 12)
    m = characteristic(ho_eigenstate(g, 1), 0.3)
    assert m.samples[64, 64] == pytest.approx(1.0, abs=1e-12)
    assert m.tau_values[64] == 0 and m.theta_values[64] == 0


def test_guard_reports_admissible_imag_s():
    g = make_grid(64, -6, 6)
    with pytest.raises(OverflowGuardError) as info:
        s_wigner(gaussian_state(g), 0.5 + 3j)
    err = info.value
    assert 0 < err.max_imag_s < 3
    s_wigner(gaussian_state(g), 0.5 + 0.9 * err.max_imag_s * 1j)


def test_marginals_need_state_symbol():
    g = make_grid(16, -4, 4)
    op = PhaseSpaceFunction(g, np.ones((16, 16)), 0, "operator-symbol")
    with pytest.raises(ValueError):
        marginal_position(op)


def test_phase_space_function_validation():
    g = make_grid(16, -4, 4)
    with pytest.raises(ValueError):
        PhaseSpaceFunction(g, np.ones((8, 8)), 0)
    with pytest.raises(ValueError):
        PhaseSpaceFunction(g, np.ones((16, 16)), 0, "density")
    a = PhaseSpaceFunction(g, np.ones((16, 16)), 0)
    assert ((a + a) * 0.5 - a).samples.max() == 0
    assert a.total() == pytest.approx(g.length * g.n_points * g.dp)


def test_momentum_route_needs_momentum_state():
    g = make_grid(16, -4, 4)
    with pytest.raises(ValueError):
        s_wigner_momentum(gaussian_state(g), 0)
    with pytest.raises(ValueError):
        s_wigner(to_momentum(gaussian_state(g)), 0)
