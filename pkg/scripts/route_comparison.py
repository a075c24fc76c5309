"""Pairwise deviation of the four s-Wigner routes versus box size, and the
admissible imaginary part of s per grid."""
import numpy as np

from sweyl.grid import OverflowGuardError, make_grid, to_momentum
from sweyl.states import gaussian_state, ho_eigenstate
from sweyl.transform import (characteristic, s_wigner, s_wigner_kirkwood, s_wigner_momentum,
                             wigner_from_characteristic)


def routes(psi, s):
    return {
        "position": s_wigner(psi, s).samples,
        "momentum": s_wigner_momentum(to_momentum(psi), s).samples,
        "kirkwood": s_wigner_kirkwood(psi, s).samples,
        "characteristic": wigner_from_characteristic(characteristic(psi, s)).samples,
    }


def main():
    print("max pairwise route deviation, ho n=3")
    for n, half in ((64, 8), (128, 10), (128, 12), (256, 16)):
        g = make_grid(n, -half, half)
        psi = ho_eigenstate(g, 3)
        row = []
        for s in (0.0, 0.5, -1.0):
            r = list(routes(psi, s).values())
            row.append(max(np.abs(a - b).max() for a in r for b in r))
        print(f"  N={n:4d} [-{half},{half}]  " + "  ".join(f"s={s:+.1f}: {d:.2e}" for s, d in zip((0, .5, -1), row)))
    print("largest admissible |Im s|, ground Gaussian")
    for n, half in ((64, 6), (128, 12), (256, 12)):
        g = make_grid(n, -half, half)
        try:
            s_wigner(gaussian_state(g), 10j)
            print(f"  N={n:4d} [-{half},{half}]  > 10")
        except OverflowGuardError as exc:
            print(f"  N={n:4d} [-{half},{half}]  {exc.max_imag_s:.3f}")


if __name__ == "__main__":
    import warnings
    warnings.simplefilter("ignore")
    main()
