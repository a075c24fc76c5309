import numpy as np
import pytest
from numpy.polynomial import Polynomial

from sweyl.checks import random_band_limited_hermitian
from sweyl.grid import make_grid
from sweyl.states import gaussian_state, ho_eigenstate
from sweyl.star import (
    SeparableSymbol, SymbolMismatch, bracket_multipliers, commutator_symbol, momentum_symbol,
    moyal_bracket, position_symbol, star_product,
)
from sweyl.symbol import operator_to_symbol, symbol_to_operator
from sweyl.transform import PhaseSpaceFunction, s_wigner

S_VALUES = [0, 0.3, -0.5, 1, -1, 0.2 + 0.1j]


def _ops(seed=7):
    g = make_grid(32, -6, 6)
    rng = np.random.default_rng(seed)
    a = random_band_limited_hermitian(g, 6, rng)
    b = random_band_limited_hermitian(g, 6, rng)
    return g, a, b


@pytest.mark.parametrize("s", S_VALUES)
def test_star_is_operator_composition(s):
    g, a, b = _ops()
    prod = star_product(operator_to_symbol(a, s), operator_to_symbol(b, s), s)
    assert np.abs(symbol_to_operator(prod).entries - (a @ b).entries).max() < 1e-12


@pytest.mark.parametrize("s", [0, 0.4])
def test_star_associative(s):
    g, a, b = _ops()
    c = random_band_limited_hermitian(g, 6, np.random.default_rng(3))
    wa, wb, wc = (operator_to_symbol(x, s) for x in (a, b, c))
    left = star_product(star_product(wa, wb, s), wc, s).samples
    right = star_product(wa, star_product(wb, wc, s), s).samples
    assert np.abs(left - right).max() < 1e-11


@pytest.mark.parametrize("s", S_VALUES)
def test_identity_is_unit(s):
    g, a, _ = _ops()
    one = PhaseSpaceFunction(g, np.ones((32, 32)), s)
    wa = operator_to_symbol(a, s)
    assert np.abs(star_product(one, wa, s).samples - wa.samples).max() < 1e-12


@pytest.mark.parametrize("s", S_VALUES)
def test_canonical_commutator(s):
    g = make_grid(16, -3, 3, hbar=0.7)
    c = commutator_symbol(position_symbol(), momentum_symbol(), s, grid=g)
    assert np.abs(c.samples - 1j * 0.7).max() < 1e-14


def test_qp_ordering():
    g = make_grid(16, -3, 3)
    q, p = np.meshgrid(g.q_values, g.p_values, indexing="ij")
    for s, extra in ((0, 0.5j), (-1, 0), (1, 1j)):
        qp = star_product(position_symbol(), momentum_symbol(), s, grid=g).samples
        assert np.abs(qp - (q * p + extra)).max() < 1e-13


@pytest.mark.parametrize("s", [0, 0.3, 0.2j, 0.2 + 0.1j])
def test_sine_kernel_matches_star(s):
    g = make_grid(64, -10, 10)
    a = s_wigner(gaussian_state(g, 0.5, 0.5), s)
    b = s_wigner(ho_eigenstate(g, 1), s)
    star = commutator_symbol(a, b, s).samples
    sine = commutator_symbol(a, b, s, route="sine").samples
    assert np.abs(star - sine).max() < 1e-7


@pytest.mark.parametrize("s", [0, 0.3, -0.4, 0.2j])
def test_free_bracket(s):
    g = make_grid(128, -12, 12)
    rho = s_wigner(gaussian_state(g, 0.3, 0.8), s)
    H = SeparableSymbol(kinetic=Polynomial([0, 0, 0.5]))
    out = moyal_bracket(H, rho, s).samples
    kq = 2 * np.pi * np.fft.fftfreq(128, g.dq)[:, None]
    dq = np.fft.ifft(1j * kq * np.fft.fft(rho.samples, axis=0), axis=0)
    dqq = np.fft.ifft(-kq**2 * np.fft.fft(rho.samples, axis=0), axis=0)
    p = g.p_values[None, :]
    expected = -p * dq - 0.5j * s * dqq
    assert np.abs(out - expected).max() < 1e-10


@pytest.mark.parametrize("s", [0, 0.3, 0.2j])
def test_multipliers_match_bracket(s):
    g = make_grid(64, -10, 10)
    rho = s_wigner(gaussian_state(g, 1.0), s)
    H = SeparableSymbol(Polynomial([0, 0, 0.5]), Polynomial([0, 0, 0.5]))
    a = moyal_bracket(H, rho, s).samples
    b = bracket_multipliers(H, g, s).apply(rho.samples)
    assert np.abs(a - b).max() < 1e-12


def test_mismatched_s_raises():
    g = make_grid(16, -3, 3)
    a = PhaseSpaceFunction(g, np.ones((16, 16)), 0)
    b = PhaseSpaceFunction(g, np.ones((16, 16)), 0.3)
    with pytest.raises(SymbolMismatch):
        star_product(a, b, 0)
    with pytest.raises(SymbolMismatch):
        star_product(position_symbol(), b, 0)
    with pytest.raises(SymbolMismatch):
        moyal_bracket(position_symbol(), a, 0, hbar=2.0)


def test_separable_product_needs_polynomials():
    g = make_grid(16, -3, 3)
    with pytest.raises(TypeError):
        star_product(SeparableSymbol(potential=np.sin), momentum_symbol(), 0, grid=g)
    with pytest.raises(ValueError):
        star_product(position_symbol(), momentum_symbol(), 0)


def test_unknown_route():
    g = make_grid(16, -3, 3)
    a = PhaseSpaceFunction(g, np.ones((16, 16)), 0)
    with pytest.raises(ValueError):
        commutator_symbol(a, a, 0, route="fast")
    with pytest.raises(TypeError):
        commutator_symbol(position_symbol(), a, 0, route="sine")
