"""Moyal RK4 against split-step Schrödinger over a range of s and times.

For complex s the generator has growing modes; the growth bound column is
their largest rate. Once bound * t is large, roundoff in those modes swamps
the result (the quartic case at imaginary s shows this).
"""
import argparse

import numpy as np
from numpy.polynomial import Polynomial

from sweyl.dynamics import HamiltonianSpec, cross_validate
from sweyl.grid import make_grid
from sweyl.star import bracket_multipliers
from sweyl.states import gaussian_state

HAMILTONIANS = {
    "free": HamiltonianSpec("free"),
    "harmonic": HamiltonianSpec("harmonic"),
    "anharmonic": HamiltonianSpec("custom", potential=Polynomial([0, 0, 0.5, 0, 0.05])),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", default="128,-10,10")
    ap.add_argument("--s", default="0,0.3,-0.3,0.2j")
    ap.add_argument("--times", default="0.1,0.5")
    ap.add_argument("--dt", type=float, default=5e-4)
    args = ap.parse_args()
    n, lo, hi = args.grid.split(",")
    g = make_grid(int(n), float(lo), float(hi))
    psi = gaussian_state(g, 0.5, 0.5)
    s_values = [complex(x) for x in args.s.split(",")]
    print(f"{'H':>10} {'s':>10} {'t':>5} {'steps':>6} {'max dev':>10} {'marginal':>10} {'mass drift':>10} {'growth':>8}")
    for name, h in HAMILTONIANS.items():
        for s in s_values:
            growth = bracket_multipliers(h.symbol(), g, s).growth_bound
            for t in (float(x) for x in args.times.split(",")):
                r = cross_validate(psi, h, s, t, args.dt)
                print(f"{name:>10} {str(np.round(s, 3)):>10} {t:5.2f} {r.n_steps:6d} {r.max_deviation:10.2e}"
                      f" {r.marginal_deviation:10.2e} {r.mass_drift:10.2e} {growth:8.1f}")


if __name__ == "__main__":
    main()
