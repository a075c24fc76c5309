"""s-parameterized Wigner functions of pure states.

Normative kernel, used by every route in the package::

    A(q, p; s) = 1/(2 pi hbar) * int dtau exp(-i tau p / hbar)
                 * conj(psi)(q - tau (1 - s)/2) * psi(q + tau (1 + s)/2)

s = 0 is Wigner's function. Complex ``s`` continues psi analytically; the
imaginary part of both arguments is the same, ``tau Im(s)/2``, so it is
applied once to the product as a common complex shift.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import (
    DEFAULT_MAX_EXPONENT,
    Grid,
    OverflowGuardError,
    WavefunctionGrid,
    angular_frequencies,
    centered_dft,
    fractional_shift,
    to_momentum,
)

# Spectral modes below this fraction of the largest one are roundoff and are
# dropped before an amplifying (complex) shift.
NOISE_FLOOR = 1e-13


class SParameterError(ValueError):
    pass


@dataclass(frozen=True)
class SParameter:
    value: complex

    def __post_init__(self):
        v = complex(self.value)
        if not np.isfinite(v):
            raise SParameterError("s must be finite")
        object.__setattr__(self, "value", v)

    @property
    def r(self) -> complex:
        """Ordering parameter r = -(1 + s)/2."""
        return -(1 + self.value) / 2

    def __str__(self) -> str:
        return format_complex(self.value)


def as_s(s) -> SParameter:
    return s if isinstance(s, SParameter) else SParameter(s)


def format_complex(z: complex) -> str:
    z = complex(z)
    return f"{z.real:.17g}{z.imag:+.17g}i"


@dataclass(frozen=True, eq=False)
class PhaseSpaceFunction:
    """Samples on the (q, p) lattice; axis 0 is q, axis 1 is p."""

    grid: Grid
    samples: np.ndarray
    s: SParameter
    kind: str = "state-symbol"

    def __post_init__(self):
        if self.kind not in ("state-symbol", "operator-symbol"):
            raise ValueError(f"unknown kind {self.kind!r}")
        a = np.asarray(self.samples, dtype=complex)
        n = self.grid.n_points
        if a.shape != (n, n):
            raise ValueError(f"expected ({n}, {n}) samples, got {a.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "samples", a)
        object.__setattr__(self, "s", as_s(self.s))

    def total(self) -> complex:
        return complex(self.samples.sum() * self.grid.dq * self.grid.dp)

    def replace(self, samples, **kw) -> "PhaseSpaceFunction":
        args = dict(grid=self.grid, s=self.s, kind=self.kind)
        args.update(kw)
        return PhaseSpaceFunction(samples=samples, **args)

    def __add__(self, other):
        return self.replace(self.samples + _samples(other))

    def __sub__(self, other):
        return self.replace(self.samples - _samples(other))

    def __mul__(self, c):
        return self.replace(self.samples * c)

    __rmul__ = __mul__


def _samples(x):
    return x.samples if isinstance(x, PhaseSpaceFunction) else x


@dataclass(frozen=True, eq=False)
class CharacteristicFunction:
    """M(tau, theta) on the centered (tau, theta) lattice; axis 0 is tau."""

    grid: Grid
    samples: np.ndarray
    s: SParameter

    @property
    def tau_values(self) -> np.ndarray:
        return self.grid.offsets

    @property
    def theta_values(self) -> np.ndarray:
        n = self.grid.n_points
        return (np.arange(n) - n // 2) * (2 * np.pi / self.grid.length)


def _guard_error(exc: OverflowGuardError, s: complex) -> OverflowGuardError:
    admissible = abs(s.imag) * exc.limit / exc.exponent
    err = OverflowGuardError(
        exc.exponent, exc.limit,
        f"complex s = {format_complex(s)} needs a ramp exponent {exc.exponent:.3g} > "
        f"{exc.limit:.3g}; max admissible |Im s| for this state and grid is {admissible:.4g}",
    )
    err.max_imag_s = admissible
    return err


def shifted_products(f: np.ndarray, spacing: float, s: complex,
                     max_exponent: float = DEFAULT_MAX_EXPONENT,
                     noise_floor: float = NOISE_FLOOR) -> np.ndarray:
    """Table ``K[t, x] = conj(f)(x - t (1-s)/2) * f(x + t (1+s)/2)``.

    ``t`` runs over the centered offsets ``(m - N/2)*spacing`` and ``x`` over
    the lattice of ``f``.
    """
    n = f.shape[-1]
    t = (np.arange(n) - n // 2) * spacing
    a = (1 - s) / 2
    b = (1 + s) / 2
    f2 = np.broadcast_to(f, (n, n))
    left = fractional_shift(f2, t * a.real, spacing)
    right = fractional_shift(f2, -t * b.real, spacing)
    prod = np.conj(left) * right
    if s.imag != 0:
        try:
            prod = fractional_shift(prod, -1j * t * (s.imag / 2), spacing,
                                    max_exponent=max_exponent, noise_floor=noise_floor)
        except OverflowGuardError as exc:
            raise _guard_error(exc, s) from None
    return prod


def s_wigner(psi: WavefunctionGrid, s, max_exponent: float = DEFAULT_MAX_EXPONENT,
             noise_floor: float = NOISE_FLOOR) -> PhaseSpaceFunction:
    """Position-kernel route: shifted products per tau, then a DFT over tau.

    For complex s, spectral modes below ``noise_floor`` times the largest are
    dropped before the imaginary shift. Lowering it keeps more signal and
    amplifies more roundoff.
    """
    if psi.representation != "position":
        raise ValueError("s_wigner expects a position-representation state")
    s = as_s(s)
    g = psi.grid
    corr = shifted_products(psi.samples, g.dq, s.value, max_exponent, noise_floor)  # [tau, q]
    # tau_m p_k / hbar = 2 pi (m - N/2)(k - N/2)/N
    w = centered_dft(corr, axis=0, sign=-1) * g.dq / (2 * np.pi * g.hbar)  # [p, q]
    return PhaseSpaceFunction(g, w.T, s)


def centered_momentum(psi: WavefunctionGrid) -> np.ndarray:
    """Momentum amplitude of the state translated so the box center is the origin.

    Unlike phi(p) itself this is periodic in p, which spectral shifts need.
    """
    g = psi.grid
    phi = psi if psi.representation == "momentum" else to_momentum(psi)
    return phi.samples * np.exp(1j * g.p_values * g.q_center / g.hbar)


def s_wigner_momentum(phi: WavefunctionGrid, s,
                      max_exponent: float = DEFAULT_MAX_EXPONENT) -> PhaseSpaceFunction:
    """Momentum-kernel route.

    A(q, p) = 1/(2 pi hbar) int deta exp(i q eta / hbar)
              conj(phi)(p - eta (1+s)/2) phi(p + eta (1-s)/2)
    """
    if phi.representation != "momentum":
        raise ValueError("s_wigner_momentum expects a momentum-representation state")
    s = as_s(s)
    g = phi.grid
    phi_c = centered_momentum(phi)
    # same kernel shape as the position route with s -> -s
    corr = shifted_products(phi_c, g.dp, -s.value, max_exponent)  # [eta, p]
    w = centered_dft(corr, axis=0, sign=+1) * g.dp / (2 * np.pi * g.hbar)  # [q, p]
    return PhaseSpaceFunction(g, w, s)


def _apply_ordering(table: np.ndarray, g: Grid, coeff: complex,
                    max_exponent: float = DEFAULT_MAX_EXPONENT) -> np.ndarray:
    """Apply exp(coeff * hbar * d^2/dq dp) to a (q, p) table spectrally."""
    n = g.n_points
    kq = angular_frequencies(n, g.dq)[:, None]
    kp = angular_frequencies(n, g.dp)[None, :]
    spec = np.fft.fft2(table)
    exponent = -coeff * g.hbar * kq * kp
    if np.any(exponent.real != 0):
        keep = np.abs(spec) > NOISE_FLOOR * np.abs(spec).max()
        spec = np.where(keep, spec, 0.0)
        worst = float(np.max(np.where(keep, exponent.real, -np.inf)))
        if worst > max_exponent:
            raise OverflowGuardError(worst, max_exponent)
    return np.fft.ifft2(spec * np.exp(exponent))


def kirkwood_product(psi: WavefunctionGrid) -> np.ndarray:
    """conj(psi)(q) phi(p) exp(i p q / hbar) / sqrt(2 pi hbar) on the lattice."""
    g = psi.grid
    phi = to_momentum(psi).samples
    phase = np.exp(1j * np.outer(g.q_values, g.p_values) / g.hbar)
    return np.conj(psi.samples)[:, None] * phi[None, :] * phase / np.sqrt(2 * np.pi * g.hbar)


def s_wigner_kirkwood(psi: WavefunctionGrid, s,
                      max_exponent: float = DEFAULT_MAX_EXPONENT) -> PhaseSpaceFunction:
    """Exponential-operator route: exp(i hbar r' d^2/dq dp) on the Kirkwood product.

    The raw product is the s = +1 function of the normative kernel, so the
    ordering exponent is r' = (s - 1)/2 (r' = -1/2 at s = 0).
    """
    if psi.representation != "position":
        raise ValueError("s_wigner_kirkwood expects a position-representation state")
    s = as_s(s)
    g = psi.grid
    raw = kirkwood_product(psi)
    try:
        w = _apply_ordering(raw, g, 1j * (s.value - 1) / 2, max_exponent)
    except OverflowGuardError as exc:
        raise _guard_error(exc, s.value) from None
    return PhaseSpaceFunction(g, w, s)


def characteristic(psi: WavefunctionGrid, s, max_exponent: float = DEFAULT_MAX_EXPONENT,
                   noise_floor: float = NOISE_FLOOR) -> CharacteristicFunction:
    """M(tau, theta) = int dq conj(psi)(q - tau(1-s)/2) exp(i theta q) psi(q + tau(1+s)/2).

    Evaluated in the momentum representation, where the q-integral collapses to

        M = exp(i theta tau (1-s)/2) int dp conj(phi)(p + hbar theta) phi(p) exp(i p tau / hbar)

    and hbar*theta is a whole number of momentum steps, so no off-lattice
    values are needed. The parameter enters only through the scalar prefactor.
    """
    if psi.representation != "position":
        raise ValueError("characteristic expects a position-representation state")
    s = as_s(s)
    g = psi.grid
    n = g.n_points
    phi_c = centered_momentum(psi)
    steps = np.arange(n) - n // 2
    # overlap[l, k] = conj(phi)(p_k + hbar theta_l) phi(p_k)
    idx = (np.arange(n)[None, :] + steps[:, None]) % n
    overlap = np.conj(phi_c[idx]) * phi_c[None, :]
    m0 = centered_dft(overlap, axis=1, sign=+1) * g.dp  # [theta, tau]
    theta = steps * (2 * np.pi / g.length)
    tau = g.offsets
    exponent = 1j * np.outer(theta, tau) * (1 - s.value) / 2
    if s.value.imag != 0:
        keep = np.abs(m0) > noise_floor * np.abs(m0).max()
        m0 = np.where(keep, m0, 0.0)
        worst = float(np.max(np.where(keep, exponent.real, -np.inf)))
        if worst > max_exponent:
            raise _guard_error(OverflowGuardError(worst, max_exponent), s.value)
    m = m0 * np.exp(exponent) * np.exp(1j * theta * g.q_center)[:, None]
    return CharacteristicFunction(g, m.T, s)


def wigner_from_characteristic(m: CharacteristicFunction) -> PhaseSpaceFunction:
    """A(q, p) = (2 pi)^-2 / hbar  sum dtheta dtau M exp(-i theta q - i tau p / hbar)."""
    g = m.grid
    n = g.n_points
    dtheta = 2 * np.pi / g.length
    theta = (np.arange(n) - n // 2) * dtheta
    x = m.samples * np.exp(-1j * theta * g.q_center)[None, :]
    c = centered_dft(x, axis=1, sign=-1) * dtheta / (2 * np.pi)  # [tau, q]
    w = centered_dft(c, axis=0, sign=-1) * g.dq / (2 * np.pi * g.hbar)  # [p, q]
    return PhaseSpaceFunction(g, w.T, m.s)


def _require_state(a: PhaseSpaceFunction):
    if a.kind != "state-symbol":
        raise ValueError("marginals are defined for state-symbols")


def marginal_position(a: PhaseSpaceFunction) -> tuple[np.ndarray, np.ndarray]:
    """(real marginal over p, imaginary residue)."""
    _require_state(a)
    m = a.samples.sum(axis=1) * a.grid.dp
    return m.real, m.imag


def marginal_momentum(a: PhaseSpaceFunction) -> tuple[np.ndarray, np.ndarray]:
    _require_state(a)
    m = a.samples.sum(axis=0) * a.grid.dq
    return m.real, m.imag
