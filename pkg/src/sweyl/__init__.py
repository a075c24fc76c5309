"""s-parameterized Weyl-Wigner-Moyal phase-space calculus on periodic grids."""

__version__ = "0.1.0"
