"""Canonical-shift parameter algebra and the operator <-> symbol transform pair.

Operators are N x N matrices in the orthonormal lattice position basis, so a
pure state psi enters as the vector psi(q_j) sqrt(dq). Symbols are built from
the mixed representation ``<q|A|p><p|q>`` (the s = -1, standard-ordered symbol)
by the exponential ordering operator ``exp(i hbar (1+s)/2 d^2/dq dp)``, which
is diagonal on the 2-D Fourier modes of the lattice.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import DEFAULT_MAX_EXPONENT, Grid, OverflowGuardError, check_same_grid
from .transform import PhaseSpaceFunction, _apply_ordering, _guard_error, as_s

CANONICAL_TOL = 1e-12
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class CanonicalShift:
    """Coefficients of Q'' = Q + alpha v, Q' = Q + beta v, K'' = K + gamma u, K' = K + delta u."""

    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    delta: np.ndarray

    def __post_init__(self):
        arrs = [np.atleast_1d(np.asarray(x, dtype=float)) for x in
                (self.alpha, self.beta, self.gamma, self.delta)]
        if len({a.shape for a in arrs}) != 1:
            raise ValueError("coefficient vectors must have one common length")
        for name, a in zip(("alpha", "beta", "gamma", "delta"), arrs):
            object.__setattr__(self, name, a)

    @property
    def dimension(self) -> int:
        return self.alpha.size


def canonicity_jacobian(shift: CanonicalShift) -> float:
    return float(np.prod((shift.alpha - shift.beta) * (shift.gamma - shift.delta)))


def is_canonical(shift: CanonicalShift) -> bool:
    return abs(canonicity_jacobian(shift) - 1.0) < CANONICAL_TOL


def r_parameter(shift: CanonicalShift) -> np.ndarray:
    """r_i = gamma_i (beta_i - alpha_i) / (gamma_i - delta_i)."""
    denom = shift.gamma - shift.delta
    if np.any(denom == 0):
        raise ZeroDivisionError("gamma_i - delta_i vanishes for some component")
    return shift.gamma * (shift.beta - shift.alpha) / denom


def s_from_r(r) -> np.ndarray:
    return -(1 + 2 * np.asarray(r))


def r_from_s(s) -> np.ndarray:
    return -(1 + np.asarray(s)) / 2


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    grid: Grid
    entries: np.ndarray
    hermitian_hint: bool = False

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=complex)
        n = self.grid.n_points
        if a.shape != (n, n):
            raise ValueError(f"expected ({n}, {n}) entries, got {a.shape}")
        if self.hermitian_hint and np.abs(a - a.conj().T).max() >= HERMITIAN_TOL:
            raise ValueError("hermitian_hint set on a non-Hermitian matrix")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        check_same_grid(self.grid, other.grid)
        return OperatorMatrix(self.grid, self.entries @ other.entries)

    def adjoint(self) -> "OperatorMatrix":
        return OperatorMatrix(self.grid, self.entries.conj().T, self.hermitian_hint)

    def trace(self) -> complex:
        return complex(np.trace(self.entries))


def fourier_matrix(grid: Grid) -> np.ndarray:
    """Columns are the lattice momentum eigenvectors: U[j, k] = exp(i p_k q_j / hbar)/sqrt(N)."""
    return np.exp(1j * np.outer(grid.q_values, grid.p_values) / grid.hbar) / np.sqrt(grid.n_points)


def identity_operator(grid: Grid) -> OperatorMatrix:
    return OperatorMatrix(grid, np.eye(grid.n_points), True)


def position_operator(grid: Grid) -> OperatorMatrix:
    return OperatorMatrix(grid, np.diag(grid.q_values), True)


def momentum_operator(grid: Grid) -> OperatorMatrix:
    u = fourier_matrix(grid)
    return OperatorMatrix(grid, (u * grid.p_values) @ u.conj().T)


def multiplication_operator(grid: Grid, values) -> OperatorMatrix:
    return OperatorMatrix(grid, np.diag(np.asarray(values, dtype=complex)))


def projector(psi) -> OperatorMatrix:
    """|psi><psi| for a position-representation :class:`WavefunctionGrid`."""
    v = psi.samples * np.sqrt(psi.grid.dq)
    return OperatorMatrix(psi.grid, np.outer(v, v.conj()), True)


def operator_to_symbol(a: OperatorMatrix, s, kind: str = "operator-symbol",
                       max_exponent: float = DEFAULT_MAX_EXPONENT) -> PhaseSpaceFunction:
    """Symbol A_w(q, p; s); the identity maps to 1 and tr A = (2 pi hbar)^-1 int A_w."""
    s = as_s(s)
    g = a.grid
    u = fourier_matrix(g)
    mixed = g.n_points * (a.entries @ u) * u.conj()
    try:
        w = _apply_ordering(mixed, g, 1j * (1 + s.value) / 2, max_exponent)
    except OverflowGuardError as exc:
        raise _guard_error(exc, s.value) from None
    return PhaseSpaceFunction(g, w, s, kind)


def symbol_to_operator(w: PhaseSpaceFunction, s=None) -> OperatorMatrix:
    """Exact inverse of :func:`operator_to_symbol`; ``s`` defaults to the symbol's own tag."""
    s = w.s if s is None else as_s(s)
    g = w.grid
    mixed = _apply_ordering(w.samples, g, -1j * (1 + s.value) / 2, np.inf)
    u = fourier_matrix(g)
    au = mixed / (g.n_points * u.conj())
    return OperatorMatrix(g, au @ u.conj().T)


def state_symbol(a: OperatorMatrix, s) -> PhaseSpaceFunction:
    """Density-operator symbol scaled to unit phase-space mass: (2 pi hbar)^-1 A_w."""
    w = operator_to_symbol(a, s, kind="state-symbol")
    return w.replace(w.samples / (2 * np.pi * a.grid.hbar))
