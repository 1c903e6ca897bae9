"""Right-hand sides of the NLS (stationary and co-moving frame) and MNLS equations."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .ansatz import AnsatzFamily
from .grid import PeriodicGrid, hilbert_like_operator, spectral_derivative


class Equation(str, Enum):
    NLS_STATIONARY = "NlsStationary"
    NLS_COMOVING = "NlsComoving"
    MNLS = "Mnls"


@dataclass(frozen=True)
class PdeKind:
    """Which envelope equation to evaluate.

    ``include_velocity_potential`` switches the ``-i u dphi/dx`` term of MNLS
    and is ignored for the NLS equations.
    """

    equation: Equation
    include_velocity_potential: bool = False

    def __post_init__(self):
        object.__setattr__(self, "equation", Equation(self.equation))

    @property
    def velocity_potential(self) -> bool:
        return self.equation is Equation.MNLS and self.include_velocity_potential


NLS_STATIONARY = PdeKind(Equation.NLS_STATIONARY)
NLS_COMOVING = PdeKind(Equation.NLS_COMOVING)
MNLS = PdeKind(Equation.MNLS)
MNLS_WITH_POTENTIAL = PdeKind(Equation.MNLS, include_velocity_potential=True)


def _combine(kind: PdeKind, grid, u, ux, uxx, uxxx):
    eq = kind.equation
    out = -0.125j * uxx - 0.5j * np.abs(u) ** 2 * u
    if eq is Equation.NLS_COMOVING:
        return out
    out = out - 0.5 * ux
    if eq is Equation.NLS_STATIONARY:
        return out
    rho = np.abs(u) ** 2
    out = out + uxxx / 16.0 - 1.5 * rho * ux + 0.25 * u * u * np.conj(ux)
    if kind.velocity_potential:
        out = out - 1j * u * hilbert_like_operator(grid, u).real
    return out


def rhs(kind: PdeKind, grid: PeriodicGrid, u: np.ndarray) -> np.ndarray:
    """Evaluate ``F(u)`` with spectral derivatives."""
    u = np.asarray(u, dtype=complex)
    ux = spectral_derivative(grid, u, 1)
    uxx = spectral_derivative(grid, u, 2)
    uxxx = spectral_derivative(grid, u, 3) if kind.equation is Equation.MNLS else None
    return _combine(kind, grid, u, ux, uxx, uxxx)


def rhs_from_jet(kind: PdeKind, grid: PeriodicGrid, jet) -> np.ndarray:
    return _combine(kind, grid, jet.u, jet.ux, jet.uxx, jet.uxxx)


def rhs_on_ansatz(kind: PdeKind, family: AnsatzFamily, q, grid: PeriodicGrid) -> np.ndarray:
    """``F(u_hat)`` using the ansatz's analytic spatial derivatives."""
    return rhs_from_jet(kind, grid, family.jet(q, grid))


def linear_symbol(kind: PdeKind, grid: PeriodicGrid) -> np.ndarray:
    """Fourier symbol of the linear (diagonal) part of ``F``."""
    sym = -0.125j * grid.derivative_symbol(2)
    if kind.equation is Equation.NLS_COMOVING:
        return sym
    sym = sym - 0.5 * grid.derivative_symbol(1)
    if kind.equation is Equation.MNLS:
        sym = sym + grid.derivative_symbol(3) / 16.0
    return sym


def nonlinear_term(kind: PdeKind, grid: PeriodicGrid, u: np.ndarray) -> np.ndarray:
    """Physical-space nonlinear part ``F(u) - L u``."""
    rho = np.abs(u) ** 2
    out = -0.5j * rho * u
    if kind.equation is not Equation.MNLS:
        return out
    ux = spectral_derivative(grid, u, 1)
    out = out - 1.5 * rho * ux + 0.25 * u * u * np.conj(ux)
    if kind.velocity_potential:
        out = out - 1j * u * hilbert_like_operator(grid, u).real
    return out
