"""Periodic position/momentum lattices and spectral utilities.

The position lattice is ``q_j = q_min + j*dq`` for ``j = 0..N-1``; the momentum
lattice is centered, ``p_k = (k - N/2)*dp`` with ``dq*dp*N = 2*pi*hbar``.
Everything is periodic, so Fourier shifts and derivatives are exact for
band-limited samples.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

MIN_POINTS = 8
EDGE_TOLERANCE = 1e-12
DEFAULT_MAX_EXPONENT = 50.0


class GridError(ValueError):
    """Invalid grid construction or mismatched grids."""


class OverflowGuardError(ArithmeticError):
    """A complex shift would amplify spectral components beyond the guard.

    ``exponent`` is the largest ramp exponent that was requested and
    ``limit`` the configured bound.
    """

    def __init__(self, exponent: float, limit: float, message: str | None = None):
        self.exponent = float(exponent)
        self.limit = float(limit)
        super().__init__(
            message
            or f"complex shift ramp exponent {exponent:.3g} exceeds guard {limit:.3g}"
        )


class BoxWarning(UserWarning):
    """A state does not decay to the edge tolerance inside the box."""


@dataclass(frozen=True)
class Grid:
    n_points: int
    q_min: float
    q_max: float
    hbar: float = 1.0

    @property
    def dq(self) -> float:
        return (self.q_max - self.q_min) / self.n_points

    @property
    def length(self) -> float:
        return self.q_max - self.q_min

    @property
    def dp(self) -> float:
        return 2.0 * np.pi * self.hbar / (self.n_points * self.dq)

    @property
    def q_values(self) -> np.ndarray:
        return self.q_min + self.dq * np.arange(self.n_points)

    @property
    def p_values(self) -> np.ndarray:
        return (np.arange(self.n_points) - self.n_points // 2) * self.dp

    @property
    def q_center(self) -> float:
        """Position of lattice index N/2; the origin of the centered frame."""
        return self.q_min + (self.n_points // 2) * self.dq

    @property
    def offsets(self) -> np.ndarray:
        """Centered lattice offsets ``(j - N/2)*dq``, also the tau lattice."""
        return (np.arange(self.n_points) - self.n_points // 2) * self.dq

    def with_hbar(self, hbar: float) -> "Grid":
        return make_grid(self.n_points, self.q_min, self.q_max, hbar)


def make_grid(n_points: int, q_min: float, q_max: float, hbar: float = 1.0) -> Grid:
    if int(n_points) != n_points or n_points < MIN_POINTS:
        raise GridError(f"n_points must be an integer >= {MIN_POINTS}, got {n_points}")
    if n_points % 2:
        raise GridError("n_points must be even")
    if not (np.isfinite(q_min) and np.isfinite(q_max)):
        raise GridError("grid bounds must be finite")
    if q_max <= q_min:
        raise GridError(f"q_max ({q_max}) must exceed q_min ({q_min})")
    if not (np.isfinite(hbar) and hbar > 0):
        raise GridError("hbar must be positive")
    return Grid(int(n_points), float(q_min), float(q_max), float(hbar))


def check_same_grid(*grids: Grid) -> Grid:
    first = grids[0]
    for g in grids[1:]:
        if g != first:
            raise GridError(f"grid mismatch: {g} vs {first}")
    return first


@dataclass(frozen=True, eq=False)
class WavefunctionGrid:
    """Samples of psi(q) (``representation='position'``) or phi(p)."""

    grid: Grid
    samples: np.ndarray
    representation: str = "position"
    _checked: bool = field(default=True, repr=False)

    def __post_init__(self):
        if self.representation not in ("position", "momentum"):
            raise ValueError(f"unknown representation {self.representation!r}")
        samples = np.asarray(self.samples, dtype=complex)
        if samples.shape != (self.grid.n_points,):
            raise GridError("sample count does not match the grid")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def spacing(self) -> float:
        return self.grid.dq if self.representation == "position" else self.grid.dp

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2) * self.spacing))

    def normalized(self) -> "WavefunctionGrid":
        return WavefunctionGrid(self.grid, self.samples / self.norm, self.representation)


def _alternating(n: int) -> np.ndarray:
    return 1.0 - 2.0 * (np.arange(n) % 2)


def centered_dft(x: np.ndarray, axis: int = -1, sign: int = -1) -> np.ndarray:
    """``y_k = sum_m x_m exp(sign*2*pi*i*(m - N/2)*(k - N/2)/N)`` along ``axis``."""
    x = np.moveaxis(np.asarray(x, dtype=complex), axis, -1)
    n = x.shape[-1]
    alt = _alternating(n)
    # (-1)^(N/2) from the cross term of the two half-shifts
    const = (-1.0) ** (n // 2)
    if sign < 0:
        y = np.fft.fft(x * alt, axis=-1) * alt * const
    else:
        y = np.fft.ifft(x * alt, axis=-1) * (alt * const * n)
    return np.moveaxis(y, -1, axis)


def to_momentum(psi: WavefunctionGrid) -> WavefunctionGrid:
    """Phi(p) = (2 pi hbar)^(-1/2) sum_j exp(-i p q_j / hbar) psi(q_j) dq."""
    if psi.representation != "position":
        raise ValueError("to_momentum expects a position-representation state")
    g = psi.grid
    phase = np.exp(-1j * g.p_values * g.q_center / g.hbar)
    phi = centered_dft(psi.samples, sign=-1) * phase * g.dq / np.sqrt(2 * np.pi * g.hbar)
    return WavefunctionGrid(g, phi, "momentum")


def to_position(phi: WavefunctionGrid) -> WavefunctionGrid:
    if phi.representation != "momentum":
        raise ValueError("to_position expects a momentum-representation state")
    g = phi.grid
    phase = np.exp(1j * g.p_values * g.q_center / g.hbar)
    psi = centered_dft(phi.samples * phase, sign=+1) * g.dp / np.sqrt(2 * np.pi * g.hbar)
    return WavefunctionGrid(g, psi, "position")


def angular_frequencies(n: int, spacing: float) -> np.ndarray:
    """Angular wavenumbers in numpy FFT order (Nyquist mode negative)."""
    return 2.0 * np.pi * np.fft.fftfreq(n, d=spacing)


def fractional_shift(
    f: np.ndarray,
    delta,
    spacing: float,
    axis: int = -1,
    max_exponent: float = DEFAULT_MAX_EXPONENT,
    noise_floor: float = 0.0,
) -> np.ndarray:
    """Samples of ``q -> f(q - delta)`` for a band-limited periodic ``f``.

    ``delta`` broadcasts against ``f`` with the shifted axis removed, so a
    whole table of shifts is one call. A complex ``delta`` continues ``f``
    analytically; its ramp grows like ``exp(k*Im(delta))``. Spectral modes
    below ``noise_floor`` times the largest mode are dropped before such a
    ramp is applied, and the remaining growth must stay below
    ``max_exponent`` or :class:`OverflowGuardError` is raised.
    """
    f = np.moveaxis(np.asarray(f, dtype=complex), axis, -1)
    n = f.shape[-1]
    k = angular_frequencies(n, spacing)
    delta = np.asarray(delta)[..., None]
    spec = np.fft.fft(f, axis=-1)
    if np.iscomplexobj(delta) and np.any(delta.imag != 0):
        if noise_floor > 0:
            keep = np.abs(spec) > noise_floor * np.abs(spec).max()
            spec = np.where(keep, spec, 0.0)
        else:
            keep = np.ones(spec.shape, dtype=bool)
        growth = np.where(keep, k * delta.imag, -np.inf)
        worst = float(np.max(growth)) if growth.size else 0.0
        if worst > max_exponent:
            raise OverflowGuardError(worst, max_exponent)
    shifted = np.fft.ifft(spec * np.exp(-1j * k * delta), axis=-1)
    return np.moveaxis(shifted, -1, axis)


def spectral_derivative(f: np.ndarray, spacing: float, order: int = 1, axis: int = -1) -> np.ndarray:
    f = np.moveaxis(np.asarray(f, dtype=complex), axis, -1)
    k = angular_frequencies(f.shape[-1], spacing)
    mult = (1j * k) ** order
    if order % 2 == 1:
        # odd derivatives of the unpaired Nyquist mode are not representable
        mult[f.shape[-1] // 2] = 0.0
    d = np.fft.ifft(np.fft.fft(f, axis=-1) * mult, axis=-1)
    return np.moveaxis(d, -1, axis)


def edge_magnitude(samples: np.ndarray) -> float:
    return float(max(np.abs(samples[0]), np.abs(samples[-1])))


def check_box(samples: np.ndarray, strict: bool = False, what: str = "state") -> None:
    """Warn (or raise under ``strict``) when a state does not decay at the edges."""
    edge = edge_magnitude(samples) / max(np.abs(samples).max(), 1e-300)
    if edge > EDGE_TOLERANCE:
        msg = f"{what} does not decay inside the box (edge/peak = {edge:.2e}); box too small"
        if strict:
            raise GridError(msg)
        warnings.warn(msg, BoxWarning, stacklevel=3)
