"""Space-conditional momentum moments and the classical-limit diagnostics.

With Psi = sqrt(rho) exp(iS/hbar) the first two conditional moments are

    <p>   = (hbar/2i) [(1+s) Psi'/Psi - (1-s) Psi*'/Psi*]
    <p^2> = -(hbar^2/4) [(1+s)^2 Psi''/Psi - 2(1-s^2) (Psi'/Psi)(Psi*'/Psi*) + (1-s)^2 Psi*''/Psi*]

Substituting the Schrödinger equation for Psi''/Psi makes the s^2 coefficient
of <p^2> equal to -m R - hbar^2 ((ln rho)')^2 / 8, where R is the
Hamilton-Jacobi residual.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .grid import Grid, WavefunctionGrid, spectral_derivative
from .states import WkbFields, wkb_state
from .transform import PhaseSpaceFunction, SParameter, as_s

DENSITY_FLOOR = 1e-12
BOUNDARY_TOLERANCE = 1e-10
MAX_PHASE_STEP = np.pi / 4
CORE_FRACTION = 1e-3


class MomentBoundaryError(ValueError):
    """The moment integrand does not decay at the momentum edges."""


class UnderResolvedPhase(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class MomentProfile:
    """<p^n>(q); NaN marks points where the density is below the floor."""

    q_values: np.ndarray
    values: np.ndarray
    order: int
    s: SParameter

    @property
    def defined(self) -> np.ndarray:
        return ~np.isnan(self.values)


def conditional_moment(a: PhaseSpaceFunction, n: int, floor: float = DENSITY_FLOOR,
                       boundary_tolerance: float = BOUNDARY_TOLERANCE) -> MomentProfile:
    """<p^n>(q) = int A p^n dp / int A dp on the full periodic momentum lattice.

    Raises :class:`MomentBoundaryError` when the integrand at the momentum
    edges exceeds ``boundary_tolerance`` of the largest row integral.
    """
    if a.kind != "state-symbol":
        raise ValueError("conditional moments need a state-symbol")
    if n < 0 or int(n) != n:
        raise ValueError("n must be a nonnegative integer")
    g = a.grid
    pn = g.p_values ** int(n)
    integrand = a.samples * pn
    scale = float(np.abs(integrand).sum(axis=1).max()) * g.dp
    edge = float(np.abs(integrand[:, [0, -1]]).max()) * g.dp
    if scale > 0 and edge > boundary_tolerance * scale:
        raise MomentBoundaryError(
            f"order-{n} integrand at the momentum edge is {edge / scale:.2e} of the total")
    num = integrand.sum(axis=1) * g.dp
    den = a.samples.sum(axis=1) * g.dp
    ok = np.abs(den) > floor
    vals = np.full(g.n_points, np.nan, dtype=complex)
    vals[ok] = num[ok] / den[ok]
    return MomentProfile(g.q_values, vals, int(n), a.s)


def _log_derivatives(psi: WavefunctionGrid, floor: float):
    if psi.representation != "position":
        raise ValueError("expected a position-representation state")
    g = psi.grid
    f = psi.samples
    ok = np.abs(f) ** 2 > floor
    safe = np.where(ok, f, 1.0)
    d1 = spectral_derivative(f, g.dq, 1) / safe
    d2 = spectral_derivative(f, g.dq, 2) / safe
    return ok, d1, d2


def _first(hbar, s, d1):
    return hbar / 2j * ((1 + s) * d1 - (1 - s) * np.conj(d1))


def _second(hbar, s, d1, d2, d2c):
    return -hbar**2 / 4 * ((1 + s) ** 2 * d2 - 2 * (1 - s**2) * d1 * np.conj(d1) + (1 - s) ** 2 * d2c)


def analytic_first_moment(psi: WavefunctionGrid, s, floor: float = DENSITY_FLOOR) -> MomentProfile:
    s = as_s(s)
    ok, d1, _ = _log_derivatives(psi, floor)
    vals = np.where(ok, _first(psi.grid.hbar, s.value, d1), np.nan)
    return MomentProfile(psi.grid.q_values, vals, 1, s)


def analytic_second_moment(psi: WavefunctionGrid, s, floor: float = DENSITY_FLOOR) -> MomentProfile:
    s = as_s(s)
    ok, d1, d2 = _log_derivatives(psi, floor)
    vals = np.where(ok, _second(psi.grid.hbar, s.value, d1, d2, np.conj(d2)), np.nan)
    return MomentProfile(psi.grid.q_values, vals, 2, s)


def action_gradient(fields: WkbFields, grid: Grid,
                    gradient_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> np.ndarray:
    """dS/dq on the grid; second-order finite differences unless ``gradient_fn`` is given.

    S is not periodic, so a spectral derivative would see the wrap-around jump.
    """
    q = grid.q_values
    if gradient_fn is not None:
        return np.asarray(gradient_fn(q), dtype=float) * np.ones_like(q)
    return np.gradient(fields.action(q), grid.dq, edge_order=2)


def hj_residual(fields: WkbFields, grid: Grid,
                gradient_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> np.ndarray:
    """R = dS/dt + (dS/dq)^2 / 2m + V on the grid."""
    q = grid.q_values
    ds = action_gradient(fields, grid, gradient_fn)
    return fields.dS_dt(q) + ds**2 / (2 * fields.mass) + fields.potential(q)


def _fit(s_values: np.ndarray, table: np.ndarray, degree: int = 2) -> np.ndarray:
    """Least-squares polynomial coefficients in s, lowest first; table is [s, q]."""
    vander = np.vander(s_values, degree + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(vander, table, rcond=None)
    return coef


def _rel(err: np.ndarray, ref: np.ndarray) -> float:
    scale = float(np.abs(ref).max())
    return float(np.abs(err).max()) / scale if scale > 0 else float(np.abs(err).max())


@dataclass
class ClassicalLimitReport:
    hbar_values: list
    s_values: list
    per_hbar: list
    rates: dict

    def to_dict(self) -> dict:
        return {"hbar_values": self.hbar_values, "s_values": self.s_values,
                "per_hbar": self.per_hbar, "rates": self.rates}


def _pairs(z: np.ndarray) -> list:
    return [[float(v.real), float(v.imag)] for v in np.asarray(z)]


def classical_limit_scan(fields: WkbFields, s_samples: Sequence, hbar_samples: Sequence[float],
                         grid: Grid, core_fraction: float = CORE_FRACTION,
                         gradient_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                         include_profiles: bool = False) -> ClassicalLimitReport:
    """Fit <p> and <p^2> as quadratics in s for each hbar.

    Psi''/Psi is replaced by its Schrödinger value
    (2m/hbar^2)(V + dS/dt - i hbar (drho/dt)/(2 rho)), so the fitted
    coefficients carry the Hamilton-Jacobi residual of the supplied fields.
    Summaries are taken over the core where rho exceeds ``core_fraction`` of
    its peak.
    """
    s_vals = np.array([as_s(x).value for x in s_samples])
    if len(set(s_vals.tolist())) < 3:
        raise ValueError("at least 3 distinct s samples are needed for the quadratic fit")
    if not hbar_samples:
        raise ValueError("no hbar samples")
    q = grid.q_values
    m = fields.mass
    ds = action_gradient(fields, grid, gradient_fn)
    resid = hj_residual(fields, grid, gradient_fn)
    rho = fields.rho(q)
    core = rho > core_fraction * rho.max()
    per, summary = [], []
    for hbar in hbar_samples:
        hbar = float(hbar)
        step = float(np.abs(ds).max()) * grid.dq / hbar
        if step > MAX_PHASE_STEP:
            raise UnderResolvedPhase(
                f"phase advances {step:.3g} rad per cell at hbar={hbar}; limit is pi/4")
        psi = wkb_state(grid, fields, hbar)
        d1 = spectral_derivative(psi.samples, grid.dq, 1) / psi.samples
        rate = fields.drho_dt(q) / (2 * rho)
        d2 = 2 * m / hbar**2 * (fields.potential(q) + fields.dS_dt(q) - 1j * hbar * rate)
        d2c = 2 * m / hbar**2 * (fields.potential(q) + fields.dS_dt(q) + 1j * hbar * rate)
        p1 = np.array([_first(hbar, s, d1[core]) for s in s_vals])
        p2 = np.array([_second(hbar, s, d1[core], d2[core], d2c[core]) for s in s_vals])
        c1 = _fit(s_vals, p1)
        c2 = _fit(s_vals, p2)
        stats = {
            "hbar": hbar,
            "max_phase_step": step,
            "p1_s0_vs_gradS": _rel(c1[0] - ds[core], ds[core]),
            "p1_s1_max": float(np.abs(c1[1]).max()),
            "p2_s0_vs_gradS2": _rel(c2[0] - ds[core] ** 2, ds[core] ** 2),
            "p2_s2_max": float(np.abs(c2[2]).max()),
            "p2_s2_vs_minus_mR": _rel(c2[2] + m * resid[core], m * resid[core]),
        }
        if include_profiles:
            stats["q"] = q[core].tolist()
            stats["p1_coefficients"] = [_pairs(c) for c in c1]
            stats["p2_coefficients"] = [_pairs(c) for c in c2]
        per.append(stats)
        summary.append(stats)
    rates = {}
    for key in ("p1_s1_max", "p2_s2_max"):
        rates[key] = [summary[i][key] / summary[i + 1][key] if summary[i + 1][key] > 0 else float("inf")
                      for i in range(len(summary) - 1)]
    return ClassicalLimitReport([float(h) for h in hbar_samples],
                                _pairs(s_vals), per, rates)
