"""Exact difference-operator workbench for the extended Kepler-Coulomb symmetry algebras."""

__version__ = "0.1.0"
