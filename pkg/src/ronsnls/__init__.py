"""Reduced-order models for NLS and MNLS wave envelopes.

Parameter dynamics of ansatz families by RONS (orthogonal projection onto the
ansatz tangent space) and by the reduced Lagrangian, both read off the complex
master equation, plus a pseudospectral ETDRK4 solver for reference runs.
"""

__version__ = "0.1.0"
