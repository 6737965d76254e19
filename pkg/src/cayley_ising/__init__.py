"""Ising model with competing interactions and an external field on the Cayley tree."""

__version__ = "0.1.0"
