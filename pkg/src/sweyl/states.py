"""Analytic test states: Gaussian packets, oscillator eigenstates, WKB states."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .grid import Grid, WavefunctionGrid, check_box

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class WkbFields:
    """Density, action and its time derivative at one instant.

    ``drho_dt_fn`` defaults to zero; it only enters imaginary parts.
    """

    rho_fn: ArrayFn
    s_action_fn: ArrayFn
    dS_dt_fn: ArrayFn
    mass: float = 1.0
    potential_fn: Optional[ArrayFn] = None
    drho_dt_fn: Optional[ArrayFn] = None

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("mass must be positive")

    def rho(self, q):
        return np.asarray(self.rho_fn(q), dtype=float) * np.ones_like(q)

    def action(self, q):
        return np.asarray(self.s_action_fn(q), dtype=float) * np.ones_like(q)

    def dS_dt(self, q):
        return np.asarray(self.dS_dt_fn(q), dtype=float) * np.ones_like(q)

    def potential(self, q):
        if self.potential_fn is None:
            return np.zeros_like(q)
        return np.asarray(self.potential_fn(q), dtype=float) * np.ones_like(q)

    def drho_dt(self, q):
        if self.drho_dt_fn is None:
            return np.zeros_like(q)
        return np.asarray(self.drho_dt_fn(q), dtype=float) * np.ones_like(q)


def gaussian_state(grid: Grid, q0: float = 0.0, p0: float = 0.0, width: float = 1.0,
                   strict: bool = False) -> WavefunctionGrid:
    """(pi w^2)^(-1/4) exp(-(q-q0)^2 / 2w^2) exp(i p0 q / hbar)."""
    if not width > 0:
        raise ValueError("width must be positive")
    q = grid.q_values
    psi = (np.pi * width**2) ** -0.25 * np.exp(-((q - q0) ** 2) / (2 * width**2))
    psi = psi * np.exp(1j * p0 * q / grid.hbar)
    check_box(psi, strict, "gaussian state")
    return WavefunctionGrid(grid, psi).normalized()


def hermite_functions(x: np.ndarray, n_max: int) -> np.ndarray:
    """Normalized Hermite functions h_0..h_n_max at ``x`` (rows), by recurrence."""
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1, x.size))
    out[0] = np.pi**-0.25 * np.exp(-x**2 / 2)
    if n_max >= 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(2, n_max + 1):
        out[n] = np.sqrt(2.0 / n) * x * out[n - 1] - np.sqrt((n - 1) / n) * out[n - 2]
    return out


def ho_eigenstate(grid: Grid, n: int, strict: bool = False) -> WavefunctionGrid:
    """n-th eigenstate of H = (p^2 + q^2)/2 with m = omega = 1 and the grid's hbar."""
    if n < 0 or int(n) != n:
        raise ValueError("n must be a nonnegative integer")
    scale = np.sqrt(grid.hbar)
    psi = hermite_functions(grid.q_values / scale, int(n))[-1] / np.sqrt(scale)
    check_box(psi, strict, f"oscillator eigenstate n={n}")
    return WavefunctionGrid(grid, psi.astype(complex)).normalized()


def wkb_state(grid: Grid, fields: WkbFields, hbar: Optional[float] = None,
              strict: bool = False) -> WavefunctionGrid:
    """sqrt(rho) exp(i S / hbar) on ``grid`` rebuilt with the requested hbar."""
    if hbar is not None and hbar != grid.hbar:
        grid = grid.with_hbar(hbar)
    q = grid.q_values
    rho = fields.rho(q)
    if np.any(rho < 0):
        raise ValueError("density has negative samples")
    psi = np.sqrt(rho) * np.exp(1j * fields.action(q) / grid.hbar)
    check_box(psi, strict, "WKB state")
    return WavefunctionGrid(grid, psi).normalized()


def gaussian_density(q0: float = 0.0, width: float = 1.0) -> ArrayFn:
    """Normalized density of a Gaussian packet of amplitude width ``width``."""
    return lambda q: np.exp(-((q - q0) ** 2) / width**2) / (np.sqrt(np.pi) * width)


def free_particle_fields(p0: float, t: float = 0.0, mass: float = 1.0,
                         width: float = 1.0) -> WkbFields:
    """Plane-wave action S = p0 q - p0^2 t / 2m, an exact Hamilton-Jacobi solution."""
    return WkbFields(
        rho_fn=gaussian_density(0.0, width),
        s_action_fn=lambda q: p0 * q - p0**2 * t / (2 * mass),
        dS_dt_fn=lambda q: np.full_like(q, -p0**2 / (2 * mass)),
        mass=mass,
    )
