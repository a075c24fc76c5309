"""Phase-space time evolution and a split-step Schrödinger oracle."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Union

import numpy as np
from numpy.polynomial import Polynomial

from .grid import Grid, WavefunctionGrid, angular_frequencies
from .star import SeparableSymbol, bracket_multipliers
from .transform import PhaseSpaceFunction, as_s, s_wigner

# RK4 is stable on the imaginary axis up to |lambda dt| = 2 sqrt(2) and on the
# negative real axis up to about 2.785; the bound is the smaller of the two.
RK4_STABILITY = 2.78
DEFAULT_DT = 1e-3
CROSS_TOLERANCE = 1e-5


class StabilityError(ArithmeticError):
    """dt times the spectral scale of the bracket exceeds the RK4 bound."""


class NonFiniteError(ArithmeticError):
    def __init__(self, step: int):
        self.step = step
        super().__init__(f"non-finite values after step {step}")


@dataclass(frozen=True)
class HamiltonianSpec:
    """H = p^2/2m + V(q).

    ``kind='harmonic'`` sets V = m omega^2 q^2 / 2; ``kind='custom'`` needs
    ``potential`` (a callable or :class:`numpy.polynomial.Polynomial`).
    """

    kind: str = "free"
    mass: float = 1.0
    omega: float = 1.0
    potential: Optional[Union[Polynomial, Callable[[np.ndarray], np.ndarray]]] = None

    def __post_init__(self):
        if self.kind not in ("free", "harmonic", "custom"):
            raise ValueError(f"unknown Hamiltonian kind {self.kind!r}")
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        if self.kind == "custom" and self.potential is None:
            raise ValueError("custom Hamiltonians need a potential")

    def potential_fn(self):
        if self.kind == "free":
            return None
        if self.kind == "harmonic":
            return Polynomial([0.0, 0.0, 0.5 * self.mass * self.omega**2])
        return self.potential

    def potential_values(self, q: np.ndarray) -> np.ndarray:
        v = self.potential_fn()
        if v is None:
            return np.zeros_like(q, dtype=float)
        vals = np.asarray(v(q)) * np.ones_like(q)
        if np.iscomplexobj(vals) and np.abs(vals.imag).max() > 0:
            raise ValueError("potential must be real on the grid")
        return vals.real.astype(float)

    def symbol(self) -> SeparableSymbol:
        return SeparableSymbol(kinetic=Polynomial([0.0, 0.0, 0.5 / self.mass]),
                               potential=self.potential_fn())


@dataclass
class EvolutionResult:
    times: List[float]
    snapshots: list
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.times) != len(self.snapshots):
            raise ValueError("snapshot count must equal time count")

    @property
    def final(self):
        return self.snapshots[-1]


def _snapshot_steps(n_steps: int, save_every: Optional[int]) -> set:
    if save_every is None:
        return {0, n_steps}
    if save_every < 1:
        raise ValueError("save_every must be a positive integer")
    return set(range(0, n_steps + 1, save_every)) | {n_steps}


def _check_steps(dt: float, n_steps: int):
    if not np.isfinite(dt) or dt == 0:
        raise ValueError("dt must be finite and nonzero")
    if int(n_steps) != n_steps or n_steps < 0:
        raise ValueError("n_steps must be a nonnegative integer")


def evolve_moyal(rho0: PhaseSpaceFunction, H: HamiltonianSpec, s, dt: float = DEFAULT_DT,
                 n_steps: int = 1, save_every: Optional[int] = None) -> EvolutionResult:
    """Integrate d rho/dt = (1/i hbar)[H, rho]_* with classical RK4.

    A negative ``dt`` integrates backward in time. Total mass is recorded at
    every step and never renormalized.
    """
    _check_steps(dt, n_steps)
    s = as_s(s)
    if rho0.s != s:
        raise ValueError(f"initial symbol tagged s={rho0.s} evolved with s={s}")
    g = rho0.grid
    mult = bracket_multipliers(H.symbol(), g, s)
    scale = mult.spectral_scale
    if abs(dt) * scale > RK4_STABILITY:
        raise StabilityError(
            f"|dt| * spectral scale = {abs(dt) * scale:.3g} exceeds the RK4 bound {RK4_STABILITY};"
            f" use |dt| <= {RK4_STABILITY / scale:.3g}")
    keep = _snapshot_steps(int(n_steps), save_every)
    rho = np.array(rho0.samples)
    cell = g.dq * g.dp
    times, snaps = [0.0], [rho0]
    mass = [complex(rho.sum() * cell)]
    f = mult.apply
    for step in range(1, int(n_steps) + 1):
        k1 = f(rho)
        k2 = f(rho + 0.5 * dt * k1)
        k3 = f(rho + 0.5 * dt * k2)
        k4 = f(rho + dt * k3)
        rho = rho + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(rho)):
            raise NonFiniteError(step)
        mass.append(complex(rho.sum() * cell))
        if step in keep:
            times.append(step * dt)
            snaps.append(rho0.replace(rho.copy()))
    drift = max(abs(m - mass[0]) for m in mass)
    return EvolutionResult(times, snaps, {
        "total_mass": mass,
        "max_mass_drift": drift,
        "spectral_scale": scale,
        "growth_bound": mult.growth_bound,
        "dt": dt,
        "n_steps": int(n_steps),
    })


def evolve_schrodinger(psi0: WavefunctionGrid, H: HamiltonianSpec, dt: float = DEFAULT_DT,
                       n_steps: int = 1, save_every: Optional[int] = None) -> EvolutionResult:
    """Strang splitting: half potential kick, exact kinetic drift, half kick."""
    _check_steps(dt, n_steps)
    if psi0.representation != "position":
        raise ValueError("evolve_schrodinger expects a position-representation state")
    g = psi0.grid
    hb = g.hbar
    p = hb * angular_frequencies(g.n_points, g.dq)
    kinetic = np.exp(-1j * p**2 * dt / (2 * H.mass * hb))
    half_kick = np.exp(-0.5j * H.potential_values(g.q_values) * dt / hb)
    keep = _snapshot_steps(int(n_steps), save_every)
    psi = np.array(psi0.samples)
    times, snaps = [0.0], [psi0]
    norms = [psi0.norm]
    for step in range(1, int(n_steps) + 1):
        psi = half_kick * np.fft.ifft(kinetic * np.fft.fft(half_kick * psi))
        if not np.all(np.isfinite(psi)):
            raise NonFiniteError(step)
        norms.append(float(np.sqrt(np.sum(np.abs(psi) ** 2) * g.dq)))
        if step in keep:
            times.append(step * dt)
            snaps.append(WavefunctionGrid(g, psi.copy()))
    return EvolutionResult(times, snaps, {
        "norm": norms,
        "max_norm_drift": max(abs(n - norms[0]) for n in norms),
        "dt": dt,
        "n_steps": int(n_steps),
    })


@dataclass(frozen=True)
class CrossValidationReport:
    s: complex
    t: float
    dt: float
    n_steps: int
    max_deviation: float
    marginal_deviation: float
    mass_drift: float
    tolerance: float = CROSS_TOLERANCE

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.tolerance

    def to_dict(self) -> dict:
        return {
            "s": [self.s.real, self.s.imag], "t": self.t, "dt": self.dt, "n_steps": self.n_steps,
            "max_deviation": self.max_deviation, "marginal_deviation": self.marginal_deviation,
            "mass_drift": self.mass_drift, "tolerance": self.tolerance,
            "status": "PASS" if self.passed else "FAIL",
        }


def cross_validate(psi0: WavefunctionGrid, H: HamiltonianSpec, s, t: float,
                   dt: float = DEFAULT_DT, tolerance: float = CROSS_TOLERANCE) -> CrossValidationReport:
    """Compare s_wigner(Schrödinger(psi0)) with Moyal(s_wigner(psi0)) at time t.

    The step count is ceil(t/dt) with dt shrunk to land exactly on t.
    """
    s = as_s(s)
    if t < 0:
        raise ValueError("t must be nonnegative")
    n_steps = math.ceil(t / dt - 1e-12) if t > 0 else 0
    dt_eff = t / n_steps if n_steps else dt
    rho0 = s_wigner(psi0, s)
    moyal = evolve_moyal(rho0, H, s, dt_eff, n_steps)
    schro = evolve_schrodinger(psi0, H, dt_eff, n_steps)
    ref = s_wigner(schro.final, s)
    dev = float(np.abs(moyal.final.samples - ref.samples).max())
    marg = moyal.final.samples.sum(axis=1) * psi0.grid.dp
    mdev = float(np.abs(marg - np.abs(schro.final.samples) ** 2).max())
    return CrossValidationReport(s.value, float(t), dt_eff, n_steps, dev, mdev,
                                 float(moyal.diagnostics["max_mass_drift"]), tolerance)
