"""Jet calculus for Riemannian and Kaehler normal coordinates."""

__version__ = "0.1.0"
