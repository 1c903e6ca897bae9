"""Closed-form parameter ODEs for Gaussian wave packets.

These are fast ROM right-hand sides and double as oracles for the numeric
RONS assembly in :mod:`ronsnls.rons`.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from . import ansatz as az
from .ansatz import AdmissibilityError, _values
from .grid import PeriodicGrid
from .pde import MNLS, NLS_COMOVING, NLS_STATIONARY, PdeKind
from .rons import assemble, rons_rhs

SQRT2 = np.sqrt(2.0)


class ClosedFormSystem(str, Enum):
    NLS_COMOVING_GAUSSIAN = "NlsComovingGaussian"
    NLS_STATIONARY_GAUSSIAN = "NlsStationaryGaussian"
    MNLS_FULL_GAUSSIAN = "MnlsFullGaussian"


_PAIRING = {
    ClosedFormSystem.NLS_COMOVING_GAUSSIAN: (NLS_COMOVING.equation, az.FamilyId.GAUSSIAN_COMOVING),
    ClosedFormSystem.NLS_STATIONARY_GAUSSIAN: (NLS_STATIONARY.equation, az.FamilyId.GAUSSIAN_TRANSLATING),
    ClosedFormSystem.MNLS_FULL_GAUSSIAN: (MNLS.equation, az.FamilyId.GAUSSIAN_FULL),
}


def family_for(system: ClosedFormSystem) -> az.AnsatzFamily:
    return az.get_family(_PAIRING[ClosedFormSystem(system)][1])


def nls_gaussian_rhs(q) -> np.ndarray:
    A, L, U, phi = _values(q)
    _check(A, L)
    return np.array([
        A * U / (4 * L),
        -U / 2,
        (SQRT2 * A**2 * L**2 - 2) / (4 * L**3),
        1 / (4 * L**2) - 5 * A**2 / (8 * SQRT2),
    ])


def nls_translating_gaussian_rhs(q) -> np.ndarray:
    q = _values(q)
    return np.append(nls_gaussian_rhs(q[:4]), 0.5)


def mnls_full_gaussian_rhs(q) -> np.ndarray:
    A, L, U, V, phi, xc = _values(q)
    _check(A, L)
    A2 = A * A
    return np.array([
        A * U * (2 - 3 * V) / (8 * L),
        U * (3 * V - 2) / 4,
        (SQRT2 * A2 * L**2 * (7 * V + 2) + 6 * V - 4) / (8 * L**3),
        -A2 * U / (2 * SQRT2 * L),
        (L**2 * (-5 * SQRT2 * A2 * (5 * V + 2) + 6 * U**2 * V + 4 * (V - 1) * V**2) - 6 * V + 8)
        / (32 * L**2),
        (5 * SQRT2 * A2 + 3 / L**2 + 3 * U**2 + V * (3 * V - 4) + 8) / 16,
    ])


def _check(A, L):
    if not L > 0:
        raise AdmissibilityError(f"L must be positive, got {L}")
    if not A > 0:
        raise AdmissibilityError(f"A must be positive, got {A}")


_RHS = {
    ClosedFormSystem.NLS_COMOVING_GAUSSIAN: nls_gaussian_rhs,
    ClosedFormSystem.NLS_STATIONARY_GAUSSIAN: nls_translating_gaussian_rhs,
    ClosedFormSystem.MNLS_FULL_GAUSSIAN: mnls_full_gaussian_rhs,
}


def closed_form_rhs(system: ClosedFormSystem, q) -> np.ndarray:
    return _RHS[ClosedFormSystem(system)](q)


def oracle_compare(
    system: ClosedFormSystem, kind: PdeKind, family: az.AnsatzFamily, q, grid: PeriodicGrid
) -> float:
    """``max|closed - numeric| / (1 + max|closed|)`` between closed form and numeric RONS."""
    system = ClosedFormSystem(system)
    equation, family_id = _PAIRING[system]
    if kind.equation is not equation or family.family_id is not family_id:
        raise ValueError(f"{system.value} does not pair with ({kind.equation.value}, {family})")
    closed = closed_form_rhs(system, q)
    numeric = rons_rhs(assemble(kind, family, q, grid))
    return float(np.max(np.abs(closed - numeric)) / (1.0 + np.max(np.abs(closed))))
