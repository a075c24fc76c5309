"""s-ordered star product, commutator symbol and s-Moyal bracket.

Plane waves ``e_mu = exp(i(kappa q + lambda p))`` compose as

    e_1 * e_2 = exp(-i hbar (1+s) kappa_1 lambda_2 / 2 + i hbar (1-s) lambda_1 kappa_2 / 2) e_(1+2)

so the star product of lattice symbols is a twisted convolution of their 2-D
Fourier coefficients. On the lattice the s = -1 phase ``exp(i hbar lambda_1
kappa_2)`` is periodic in both mode indices; the general-s product is that one
conjugated by the diagonal ordering multiplier. This keeps it exactly equal
to operator composition, including modes that alias.

Symbols that are not periodic (q, p, p^2/2, V(q)) cannot live on the lattice
as Fourier series. :class:`SeparableSymbol` carries T(p) + V(q) as functions,
and its products with lattice symbols are evaluated by exact shifts of T and V.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Callable, Optional, Union

import numpy as np
from numpy.polynomial import Polynomial

from .grid import Grid, angular_frequencies, check_same_grid
from .transform import PhaseSpaceFunction, as_s

Fn = Union[Polynomial, Callable[[np.ndarray], np.ndarray]]


class SymbolMismatch(ValueError):
    pass


@dataclass(frozen=True)
class SeparableSymbol:
    """kinetic(p) + potential(q); either part may be None (zero).

    Products between two separable symbols need :class:`Polynomial` parts,
    since the bidifferential series then terminates.
    """

    kinetic: Optional[Fn] = None
    potential: Optional[Fn] = None

    def sample(self, grid: Grid, s, kind: str = "operator-symbol") -> PhaseSpaceFunction:
        q, p = np.meshgrid(grid.q_values, grid.p_values, indexing="ij")
        return PhaseSpaceFunction(grid, _eval(self.kinetic, p) + _eval(self.potential, q), s, kind)


def position_symbol() -> SeparableSymbol:
    return SeparableSymbol(potential=Polynomial([0.0, 1.0]))


def momentum_symbol() -> SeparableSymbol:
    return SeparableSymbol(kinetic=Polynomial([0.0, 1.0]))


def _eval(fn, x):
    if fn is None:
        return np.zeros(np.shape(x), dtype=complex)
    return np.asarray(fn(x), dtype=complex) * np.ones(np.shape(x))


def _ordering(grid: Grid, s: complex) -> np.ndarray:
    kq = angular_frequencies(grid.n_points, grid.dq)[:, None]
    kp = angular_frequencies(grid.n_points, grid.dp)[None, :]
    return np.exp(-0.5j * grid.hbar * (1 + s) * kq * kp)


def _check_pair(a: PhaseSpaceFunction, b: PhaseSpaceFunction, s) -> complex:
    check_same_grid(a.grid, b.grid)
    s = as_s(s)
    for x in (a, b):
        if x.s != s:
            raise SymbolMismatch(f"symbol tagged s={x.s} used with s={s}")
    return s.value


def _lattice_star(a: np.ndarray, b: np.ndarray, grid: Grid, s: complex) -> np.ndarray:
    n = grid.n_points
    t = _ordering(grid, s)
    ah = np.fft.fft2(a) / t
    bh = np.fft.fft2(b) / t
    # s = -1 phase exp(i hbar lambda_l1 kappa_k2) = exp(2 pi i l1 k2 / N)
    k = np.arange(n)
    circ = (k[:, None] - k[None, :]) % n  # circ[k_out, k1] = k_out - k1
    out = np.zeros((n, n), dtype=complex)
    for l1 in range(n):
        x = bh * np.exp(2j * np.pi * l1 * k / n)[:, None]
        # sum_k1 ah[k1, l1] x[k_out - k1, l]: convolution along the q-mode axis
        conv = np.einsum("j,ijl->il", ah[:, l1], x[circ])
        out += np.roll(conv, l1, axis=1)
    return np.fft.ifft2(out * t / n**2)


def _star_sep_left(h: SeparableSymbol, r: PhaseSpaceFunction, s: complex) -> np.ndarray:
    """(T + V) * rho by shifted evaluation of T and V."""
    g = r.grid
    hb = g.hbar
    kq = angular_frequencies(g.n_points, g.dq)[:, None]
    kp = angular_frequencies(g.n_points, g.dp)[None, :]
    q = g.q_values[:, None]
    p = g.p_values[None, :]
    out = np.zeros((g.n_points, g.n_points), dtype=complex)
    if h.kinetic is not None:
        rq = np.fft.fft(r.samples, axis=0)
        out += np.fft.ifft(rq * _eval(h.kinetic, p + hb * (1 - s) * kq / 2), axis=0)
    if h.potential is not None:
        rp = np.fft.fft(r.samples, axis=1)
        out += np.fft.ifft(rp * _eval(h.potential, q - hb * (1 + s) * kp / 2), axis=1)
    return out


def _star_sep_right(r: PhaseSpaceFunction, h: SeparableSymbol, s: complex) -> np.ndarray:
    """rho * (T + V)."""
    g = r.grid
    hb = g.hbar
    kq = angular_frequencies(g.n_points, g.dq)[:, None]
    kp = angular_frequencies(g.n_points, g.dp)[None, :]
    q = g.q_values[:, None]
    p = g.p_values[None, :]
    out = np.zeros((g.n_points, g.n_points), dtype=complex)
    if h.kinetic is not None:
        rq = np.fft.fft(r.samples, axis=0)
        out += np.fft.ifft(rq * _eval(h.kinetic, p - hb * (1 + s) * kq / 2), axis=0)
    if h.potential is not None:
        rp = np.fft.fft(r.samples, axis=1)
        out += np.fft.ifft(rp * _eval(h.potential, q + hb * (1 - s) * kp / 2), axis=1)
    return out


def _cross_series(f: Optional[Fn], g_: Optional[Fn], c: complex, f_var, g_var) -> np.ndarray:
    """sum_n c^n/n! f^(n)(f_var) g^(n)(g_var) for polynomial f, g."""
    if f is None or g_ is None:
        return 0.0
    if not (isinstance(f, Polynomial) and isinstance(g_, Polynomial)):
        raise TypeError("separable-separable star products need Polynomial parts")
    total = 0.0
    for order in range(min(f.degree(), g_.degree()) + 1):
        total = total + c**order / factorial(order) * f.deriv(order)(f_var) * g_.deriv(order)(g_var)
    return total


def _star_sep_sep(a: SeparableSymbol, b: SeparableSymbol, grid: Grid, s: complex) -> np.ndarray:
    hb = grid.hbar
    q, p = np.meshgrid(grid.q_values, grid.p_values, indexing="ij")
    out = _eval(a.kinetic, p) * _eval(b.kinetic, p) + _eval(a.potential, q) * _eval(b.potential, q)
    out = out + _cross_series(a.potential, b.kinetic, 0.5j * hb * (1 + s), q, p)
    out = out + _cross_series(a.kinetic, b.potential, -0.5j * hb * (1 - s), p, q)
    return out * np.ones_like(q)


def star_product(a, b, s, grid: Optional[Grid] = None, kind: Optional[str] = None) -> PhaseSpaceFunction:
    """Symbol of the operator product AB.

    ``a`` and ``b`` are lattice symbols or :class:`SeparableSymbol`; ``grid``
    is only needed when both are separable.
    """
    s = as_s(s)
    sep_a = isinstance(a, SeparableSymbol)
    sep_b = isinstance(b, SeparableSymbol)
    if not sep_a and not sep_b:
        sv = _check_pair(a, b, s)
        out = _lattice_star(a.samples, b.samples, a.grid, sv)
        g = a.grid
        kind = kind or ("state-symbol" if "state-symbol" in (a.kind, b.kind) else "operator-symbol")
    elif sep_a and sep_b:
        if grid is None:
            raise ValueError("a grid is required to sample a product of separable symbols")
        g = grid
        out = _star_sep_sep(a, b, g, s.value)
        kind = kind or "operator-symbol"
    else:
        lattice = b if sep_a else a
        if lattice.s != s:
            raise SymbolMismatch(f"symbol tagged s={lattice.s} used with s={s}")
        g = lattice.grid
        out = _star_sep_left(a, b, s.value) if sep_a else _star_sep_right(a, b, s.value)
        kind = kind or lattice.kind
    return PhaseSpaceFunction(g, out, s, kind)


def _sine_commutator(a: np.ndarray, b: np.ndarray, grid: Grid, s: complex) -> np.ndarray:
    """Mode-pair sum with the kernel -2i exp(-i hbar s (alpha+beta)/2) sin(hbar (alpha-beta)/2).

    alpha = kappa_1 lambda_2, beta = lambda_1 kappa_2, using the centered mode
    representatives. Agrees with the star difference whenever no sum mode aliases.
    """
    n = grid.n_points
    hb = grid.hbar
    kq = angular_frequencies(n, grid.dq)
    kp = angular_frequencies(n, grid.dp)
    ah = np.fft.fft2(a)
    bh = np.fft.fft2(b)
    k = np.arange(n)
    circ = (k[:, None] - k[None, :]) % n  # [k_out, k1] -> k2
    out = np.zeros((n, n), dtype=complex)
    for l1 in range(n):
        k2 = circ  # indexes of the second factor's q-mode for each (k_out, k1)
        alpha = kq[None, :, None] * kp[None, None, :]          # kappa_1 lambda_2: [., k1, l2]
        beta = kp[l1] * kq[k2][:, :, None]                     # lambda_1 kappa_2: [k_out, k1, .]
        kern = -2j * np.exp(-0.5j * hb * s * (alpha + beta)) * np.sin(0.5 * hb * (alpha - beta))
        term = ah[None, :, l1, None] * bh[k2] * kern
        out += np.roll(term.sum(axis=1), l1, axis=1)
    return np.fft.ifft2(out / n**2)


def commutator_symbol(a, b, s, grid: Optional[Grid] = None, route: str = "star") -> PhaseSpaceFunction:
    """Symbol of [A, B]; ``route='sine'`` uses the direct sine-kernel sum (lattice symbols only)."""
    if route == "star":
        return star_product(a, b, s, grid) - star_product(b, a, s, grid)
    if route != "sine":
        raise ValueError(f"unknown route {route!r}")
    if isinstance(a, SeparableSymbol) or isinstance(b, SeparableSymbol):
        raise TypeError("the sine-kernel route needs lattice symbols")
    sv = _check_pair(a, b, s)
    kind = "state-symbol" if "state-symbol" in (a.kind, b.kind) else "operator-symbol"
    return PhaseSpaceFunction(a.grid, _sine_commutator(a.samples, b.samples, a.grid, sv), s, kind)


def moyal_bracket(h, rho: PhaseSpaceFunction, s, hbar: Optional[float] = None,
                  route: str = "star") -> PhaseSpaceFunction:
    """Rate of change of the state-symbol, (1/i hbar) [H, rho]_*.

    ``h`` is a lattice operator-symbol or a :class:`SeparableSymbol`.
    """
    s = as_s(s)
    if hbar is not None and not np.isclose(hbar, rho.grid.hbar, rtol=1e-14, atol=0):
        raise SymbolMismatch(f"hbar={hbar} differs from the grid's {rho.grid.hbar}")
    if rho.s != s:
        raise SymbolMismatch(f"state-symbol tagged s={rho.s} used with s={s}")
    if not isinstance(h, SeparableSymbol) and h.s != s:
        raise SymbolMismatch(f"Hamiltonian symbol tagged s={h.s} used with s={s}")
    if isinstance(h, SeparableSymbol):
        route = "star"
    c = commutator_symbol(h, rho, s, route=route)
    return PhaseSpaceFunction(rho.grid, c.samples / (1j * rho.grid.hbar), s, rho.kind)


@dataclass(frozen=True, eq=False)
class BracketMultipliers:
    """Precomputed action of (1/i hbar)[T(p) + V(q), .]_* on lattice symbols.

    ``kinetic`` multiplies the q-Fourier transform (axis 0) and ``potential``
    the p-Fourier transform (axis 1).
    """

    kinetic: Optional[np.ndarray]
    potential: Optional[np.ndarray]

    @property
    def spectral_scale(self) -> float:
        """Largest rate magnitude; bounds the spectrum of the linear map."""
        return float(sum(np.abs(m).max() for m in (self.kinetic, self.potential) if m is not None))

    @property
    def growth_bound(self) -> float:
        """Upper bound on the exponential growth rate; positive only for complex s."""
        return float(sum(max(m.real.max(), 0.0) for m in (self.kinetic, self.potential) if m is not None))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = np.zeros(rho.shape, dtype=complex)
        if self.kinetic is not None:
            out += np.fft.ifft(np.fft.fft(rho, axis=0) * self.kinetic, axis=0)
        if self.potential is not None:
            out += np.fft.ifft(np.fft.fft(rho, axis=1) * self.potential, axis=1)
        return out


def bracket_multipliers(h: SeparableSymbol, grid: Grid, s) -> BracketMultipliers:
    s = as_s(s).value
    hb = grid.hbar
    kq = angular_frequencies(grid.n_points, grid.dq)[:, None]
    kp = angular_frequencies(grid.n_points, grid.dp)[None, :]
    q = grid.q_values[:, None]
    p = grid.p_values[None, :]
    kin = pot = None
    if h.kinetic is not None:
        kin = (_eval(h.kinetic, p + hb * (1 - s) * kq / 2)
               - _eval(h.kinetic, p - hb * (1 + s) * kq / 2)) / (1j * hb)
    if h.potential is not None:
        pot = (_eval(h.potential, q - hb * (1 + s) * kp / 2)
               - _eval(h.potential, q + hb * (1 - s) * kp / 2)) / (1j * hb)
    return BracketMultipliers(kin, pot)
