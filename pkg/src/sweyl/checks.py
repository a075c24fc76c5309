"""Invariant suites shared by ``sweyl check`` and the acceptance tests.

Each suite returns a :class:`CheckResult` with the measured worst-case
deviations, the threshold each is held to, and the wall time.
"""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np

from . import dynamics, moments, star, states, symbol, transform
from .grid import BoxWarning, make_grid, to_momentum


@dataclass
class CheckResult:
    name: str
    title: str
    metrics: Dict[str, float]
    thresholds: Dict[str, float]
    budget_s: float
    elapsed_s: float = 0.0
    notes: List[str] = field(default_factory=list)

    @property
    def failures(self) -> List[str]:
        bad = [k for k, v in self.metrics.items() if not (v < self.thresholds[k])]
        if self.elapsed_s > self.budget_s:
            bad.append("runtime")
        return bad

    @property
    def passed(self) -> bool:
        return not self.failures

    def line(self) -> str:
        worst = ", ".join(f"{k}={v:.2e}<{self.thresholds[k]:.0e}" for k, v in self.metrics.items())
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.title} [{worst}] ({self.elapsed_s:.1f}s/{self.budget_s:.0f}s)"

    def to_dict(self) -> dict:
        return {"name": self.name, "title": self.title, "passed": self.passed,
                "metrics": self.metrics, "thresholds": self.thresholds,
                "elapsed_s": self.elapsed_s, "budget_s": self.budget_s,
                "failures": self.failures, "notes": self.notes}


def _maxabs(x) -> float:
    return float(np.nanmax(np.abs(x)))


# ---- 1 ---------------------------------------------------------------------

def marginals() -> dict:
    g = make_grid(256, -12, 12)
    psis = [states.gaussian_state(g), states.gaussian_state(g, 0.0, 2.0), states.ho_eigenstate(g, 3)]
    pos = mom = 0.0
    for psi in psis:
        dens_q = np.abs(psi.samples) ** 2
        dens_p = np.abs(to_momentum(psi).samples) ** 2
        for s in (0, 0.3, -0.3, 0.5, 0.4j):
            a = transform.s_wigner(psi, s)
            mq, iq = transform.marginal_position(a)
            mp, ip = transform.marginal_momentum(a)
            pos = max(pos, _maxabs(mq + 1j * iq - dens_q))
            mom = max(mom, _maxabs(mp + 1j * ip - dens_p))
    return {"position_marginal": pos, "momentum_marginal": mom}


# ---- 2 ---------------------------------------------------------------------

def wigner_reduction() -> dict:
    g = make_grid(128, -10, 10)
    a = transform.s_wigner(states.gaussian_state(g), 0)
    q, p = np.meshgrid(g.q_values, g.p_values, indexing="ij")
    return {"gaussian_s0": _maxabs(a.samples - np.exp(-q**2 - p**2) / np.pi)}


# ---- 3 ---------------------------------------------------------------------

def reality() -> dict:
    g = make_grid(256, -12, 12)
    psi = states.gaussian_state(g)
    imag = max(_maxabs(transform.s_wigner(psi, s).samples.imag) for s in (0.4j, 0.8j))
    conj = 0.0
    for s in (0.3, 0.3 + 0.2j):
        a = transform.s_wigner(psi, s).samples
        b = transform.s_wigner(psi, -np.conj(s)).samples
        conj = max(conj, _maxabs(np.conj(a) - b))
    boosted = states.gaussian_state(g, 0.5, 1.0)
    for s in (0.3, 0.3 + 0.2j):
        a = transform.s_wigner(boosted, s).samples
        b = transform.s_wigner(boosted, -np.conj(s)).samples
        conj = max(conj, _maxabs(np.conj(a) - b))
    return {"imag_part_imaginary_s": imag, "conjugation": conj}


# ---- 4 ---------------------------------------------------------------------

def routes() -> dict:
    # the box must hold the kernel's half-offset tails, so L/4 lies outside the support
    g = make_grid(128, -12, 12)
    worst = 0.0
    for psi in (states.gaussian_state(g, 0.5, -0.7), states.ho_eigenstate(g, 3)):
        phi = to_momentum(psi)
        for s in (0, 0.3, -0.3, 0.5):
            rs = [transform.s_wigner(psi, s).samples,
                  transform.s_wigner_momentum(phi, s).samples,
                  transform.s_wigner_kirkwood(psi, s).samples,
                  transform.wigner_from_characteristic(transform.characteristic(psi, s)).samples]
            for i in range(len(rs)):
                for j in range(i):
                    worst = max(worst, _maxabs(rs[i] - rs[j]))
    return {"pairwise_route_deviation": worst}


# ---- 5 ---------------------------------------------------------------------

def random_band_limited_hermitian(grid, n_modes: int, rng) -> symbol.OperatorMatrix:
    """Random Hermitian operator on the span of the lowest oscillator eigenstates."""
    basis = np.array([states.ho_eigenstate(grid, k).samples for k in range(n_modes)]).T
    basis = basis * np.sqrt(grid.dq)
    c = rng.normal(size=(n_modes, n_modes)) + 1j * rng.normal(size=(n_modes, n_modes))
    c = (c + c.conj().T) / 2
    return symbol.OperatorMatrix(grid, basis @ c @ basis.conj().T, hermitian_hint=False)


def symbol_calculus() -> dict:
    g = make_grid(64, -8, 8)
    rng = np.random.default_rng(20240501)
    trip = trace = proj = 0.0
    for _ in range(3):
        a = random_band_limited_hermitian(g, 8, rng)
        for s in (0, 0.3):
            w = symbol.operator_to_symbol(a, s)
            back = symbol.symbol_to_operator(w)
            trip = max(trip, _maxabs(back.entries - a.entries))
            tr = w.samples.sum() * g.dq * g.dp / (2 * np.pi * g.hbar)
            trace = max(trace, abs(tr - a.trace()))
    g = make_grid(128, -12, 12)
    for psi in (states.gaussian_state(g, 0.3, 0.5), states.ho_eigenstate(g, 2)):
        for s in (0, 0.3):
            ws = symbol.state_symbol(symbol.projector(psi), s).samples
            proj = max(proj, _maxabs(ws - transform.s_wigner(psi, s).samples))
    return {"round_trip": trip, "trace_identity": trace, "projector_vs_s_wigner": proj}


# ---- 6 ---------------------------------------------------------------------

def star_commutator() -> dict:
    g = make_grid(64, -8, 8)
    rng = np.random.default_rng(7)
    mats = [symbol.OperatorMatrix(g, rng.normal(size=(64, 64)) + 1j * rng.normal(size=(64, 64)))
            for _ in range(3)]
    op = assoc = comm = 0.0
    for s in (0, 0.3, -0.5, 0.2 + 0.1j):
        a, b, c = (symbol.operator_to_symbol(m, s) for m in mats)
        ab = star.star_product(a, b, s)
        ref = symbol.operator_to_symbol(mats[0] @ mats[1], s).samples
        op = max(op, _maxabs(ab.samples - ref) / _maxabs(ref))
        left = star.star_product(ab, c, s).samples
        right = star.star_product(a, star.star_product(b, c, s), s).samples
        assoc = max(assoc, _maxabs(left - right) / _maxabs(left))
        qp = star.commutator_symbol(star.position_symbol(), star.momentum_symbol(), s, grid=g)
        comm = max(comm, _maxabs(qp.samples - 1j * g.hbar))
        anchor = symbol.operator_to_symbol(symbol.OperatorMatrix(g, 1j * g.hbar * np.eye(64)), s)
        comm = max(comm, _maxabs(anchor.samples - 1j * g.hbar))
    return {"operator_route": op, "qp_commutator": comm, "associativity": assoc}


# ---- 7 ---------------------------------------------------------------------

def dynamics_consistency() -> dict:
    g = make_grid(128, -10, 10)
    harm = dynamics.cross_validate(states.gaussian_state(g, 1.0, 0.0), dynamics.HamiltonianSpec("harmonic"),
                                   0.0, np.pi / 4, 1e-3)
    free = dynamics.cross_validate(states.gaussian_state(g, 0.0, 0.5), dynamics.HamiltonianSpec("free"),
                                   0.3, 0.5, 1e-3)
    return {"harmonic_s0": harm.max_deviation, "free_s0.3": free.max_deviation}


# ---- 8 ---------------------------------------------------------------------

REAL_MOMENT_MASK = 1e-6
IMAG_MOMENT_MASK = 1e-3
IMAG_NOISE_FLOOR = 1e-15
IMAG_BOUNDARY_TOLERANCE = 1e-8


def moment_routes() -> dict:
    g = make_grid(256, -12, 12)
    worst = 0.0
    cases = [(psi, s) for psi in (states.gaussian_state(g), states.gaussian_state(g, 0.0, 2.0),
                                  states.ho_eigenstate(g, 3)) for s in (0, 0.3, -0.3, 0.5)]
    cases += [(psi, 0.4j) for psi in (states.gaussian_state(g), states.gaussian_state(g, 0.0, 2.0))]
    for psi, s in cases:
        imag = isinstance(s, complex)
        a = transform.s_wigner(psi, s, noise_floor=IMAG_NOISE_FLOOR) if imag else transform.s_wigner(psi, s)
        tol = IMAG_BOUNDARY_TOLERANCE if imag else moments.BOUNDARY_TOLERANCE
        dens = np.abs(psi.samples) ** 2
        mask = dens > (IMAG_MOMENT_MASK if imag else REAL_MOMENT_MASK) * dens.max()
        for n, analytic in ((1, moments.analytic_first_moment), (2, moments.analytic_second_moment)):
            grid_m = moments.conditional_moment(a, n, boundary_tolerance=tol).values
            worst = max(worst, _maxabs((grid_m - analytic(psi, s).values)[mask]))
    q = g.q_values
    psi = states.gaussian_state(g)
    closed = 0.0
    for s in (0, 0.3, 0.5, -0.3):
        closed = max(closed, _maxabs(moments.analytic_first_moment(psi, s).values - 1j * s * q))
        closed = max(closed, _maxabs(moments.analytic_second_moment(psi, s).values
                                     - ((1 + s**2) / 2 - s**2 * q**2)))
    coeff = 0.0
    for hbar in (1.0, 0.5):
        gh = g.with_hbar(hbar)
        psi_h = states.gaussian_state(gh, width=np.sqrt(hbar))
        vals = [moments.analytic_second_moment(psi_h, s).values for s in (-0.5, 0.0, 0.5)]
        c2 = (vals[0] + vals[2] - 2 * vals[1]) / (2 * 0.25)
        coeff = max(coeff, _maxabs(c2 - (hbar / 2 - q**2)))
    return {"analytic_vs_grid": worst, "gaussian_closed_forms": closed, "s2_coefficient": coeff}


# ---- 9 ---------------------------------------------------------------------

def classical_limit() -> dict:
    hbars = [0.4, 0.2, 0.1]
    free = moments.classical_limit_scan(states.free_particle_fields(1.0, width=2.0), [-0.5, 0.0, 0.5],
                                        hbars, make_grid(1024, -16, 16))
    ratios = free.rates["p2_s2_max"]
    q2 = states.WkbFields(states.gaussian_density(), lambda q: q**2, lambda q: 0.0 * q)
    non = moments.classical_limit_scan(q2, [-0.5, 0.0, 0.5], hbars, make_grid(4096, -8, 8))
    return {
        "hbar2_ratio_deviation": max(abs(r / 4 - 1) for r in ratios),
        "s0_vs_gradS2_at_0.1": free.per_hbar[-1]["p2_s0_vs_gradS2"],
        "s2_vs_minus_mR_at_0.1": non.per_hbar[-1]["p2_s2_vs_minus_mR"],
    }


# ---- 10 --------------------------------------------------------------------

def parameter_algebra() -> dict:
    half = symbol.CanonicalShift(0.5, -0.5, 0.5, -0.5)
    err = abs(symbol.canonicity_jacobian(half) - 1)
    err = max(err, _maxabs(symbol.r_parameter(half) + 0.5), _maxabs(symbol.s_from_r(symbol.r_parameter(half))))
    rng = np.random.default_rng(3)
    for _ in range(200):
        n = int(rng.integers(1, 5))
        alpha, beta, gamma = rng.uniform(-2, 2, (3, n))
        beta = np.where(np.abs(alpha - beta) < 0.1, beta + 0.5, beta)
        # split a unit product across components
        logs = rng.normal(size=n)
        logs -= logs.mean()
        delta = gamma - np.exp(logs) / (alpha - beta)
        shift = symbol.CanonicalShift(alpha, beta, gamma, delta)
        err = max(err, abs(symbol.canonicity_jacobian(shift) - 1))
        r = symbol.r_parameter(shift)
        err = max(err, _maxabs(symbol.r_from_s(symbol.s_from_r(r)) - r))
        expected = gamma * (beta - alpha) / (gamma - delta)
        err = max(err, _maxabs(r - expected))
    return {"parameter_algebra": err}


@dataclass(frozen=True)
class Suite:
    name: str
    title: str
    fn: Callable[[], dict]
    thresholds: Dict[str, float]
    budget_s: float


SUITES: List[Suite] = [
    Suite("marginals", "marginal invariance", marginals,
          {"position_marginal": 1e-8, "momentum_marginal": 1e-8}, 10),
    Suite("wigner", "Wigner reduction at s=0", wigner_reduction, {"gaussian_s0": 1e-9}, 1),
    Suite("reality", "reality and conjugation", reality,
          {"imag_part_imaginary_s": 1e-10, "conjugation": 1e-10}, 5),
    Suite("routes", "three-route equivalence", routes, {"pairwise_route_deviation": 1e-9}, 30),
    Suite("symbol", "symbol calculus", symbol_calculus,
          {"round_trip": 1e-9, "trace_identity": 1e-8, "projector_vs_s_wigner": 1e-9}, 30),
    Suite("star", "star product and commutator", star_commutator,
          {"operator_route": 1e-8, "qp_commutator": 1e-9, "associativity": 1e-8}, 60),
    Suite("dynamics", "dynamics consistency", dynamics_consistency,
          {"harmonic_s0": 1e-5, "free_s0.3": 1e-5}, 120),
    Suite("moments", "conditional moments", moment_routes,
          {"analytic_vs_grid": 1e-7, "gaussian_closed_forms": 1e-8, "s2_coefficient": 1e-8}, 20),
    Suite("classical", "classical limit", classical_limit,
          {"hbar2_ratio_deviation": 0.10, "s0_vs_gradS2_at_0.1": 0.02, "s2_vs_minus_mR_at_0.1": 0.05}, 120),
    Suite("parameters", "parameter algebra", parameter_algebra, {"parameter_algebra": 1e-12}, 1),
]
SUITE_NAMES = [s.name for s in SUITES]


def run_suite(name: str) -> CheckResult:
    suite = next((s for s in SUITES if s.name == name), None)
    if suite is None:
        raise KeyError(f"unknown suite {name!r}; choose from {SUITE_NAMES + ['all']}")
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoxWarning)
        metrics = suite.fn()
    elapsed = time.perf_counter() - t0
    idx = SUITE_NAMES.index(name) + 1
    return CheckResult(f"{idx}:{suite.name}", suite.title, metrics, suite.thresholds, suite.budget_s, elapsed)


def run_all(names=None) -> List[CheckResult]:
    return [run_suite(n) for n in (names or SUITE_NAMES)]
