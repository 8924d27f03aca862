"""Relative Gromov-Witten bookkeeping: keys, degeneration equations, rubber calculus and solving."""

__version__ = "0.1.0"
