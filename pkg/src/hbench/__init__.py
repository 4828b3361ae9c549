"""Numerical toolkit for quantum parameter-estimation bounds and simulations."""

__version__ = "0.1.0"
