"""Homotopy transfer of a Hamiltonian plus supersymmetry onto the on-shell space."""

__version__ = "0.1.0"
