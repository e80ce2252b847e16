"""Exact Lie point symmetry analysis for polynomial PDEs."""

__version__ = "0.1.0"
