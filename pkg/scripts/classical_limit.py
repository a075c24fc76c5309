"""Scan <p> and <p^2> coefficients in s across hbar for two action fields.

The free plane wave solves Hamilton-Jacobi exactly; S = q^2 with V = 0 does
not, and its s^2 coefficient of <p^2> tracks -m R.
"""
import argparse
import json

from sweyl.grid import make_grid
from sweyl.moments import classical_limit_scan
from sweyl.states import WkbFields, free_particle_fields, gaussian_density


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--hbar", default="0.4,0.2,0.1,0.05")
    ap.add_argument("--out", help="write the full report as JSON")
    args = ap.parse_args()
    hbars = [float(x) for x in args.hbar.split(",")]
    cases = {
        "free": (free_particle_fields(1.0, width=2.0), make_grid(2048, -16, 16)),
        "quadratic_action": (WkbFields(gaussian_density(), lambda q: q**2, lambda q: 0 * q),
                             make_grid(8192, -8, 8)),
    }
    doc = {}
    for name, (fields, grid) in cases.items():
        rep = classical_limit_scan(fields, [-0.5, 0.0, 0.5], hbars, grid)
        doc[name] = rep.to_dict()
        print(f"{name}")
        print(f"  {'hbar':>6} {'|s1 of <p>|':>12} {'|s2 of <p2>|':>13} {'s0 vs dS^2':>11} {'s2 vs -mR':>10}")
        for row in rep.per_hbar:
            print(f"  {row['hbar']:6.3f} {row['p1_s1_max']:12.4e} {row['p2_s2_max']:13.4e}"
                  f" {row['p2_s0_vs_gradS2']:11.3e} {row['p2_s2_vs_minus_mR']:10.3e}")
        print(f"  successive ratios of |s2 of <p2>|: {[round(r, 4) for r in rep.rates['p2_s2_max']]}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(doc, fh, indent=2)


if __name__ == "__main__":
    main()
