"""Numerical laboratory for Hankel operators on the Gaussian Fock space."""
__version__ = "0.1.0"
