"""Genus-one n-point functions for free boson and lattice vertex operator algebras."""

__version__ = "0.1.0"
