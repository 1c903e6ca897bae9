"""Metric tensor assembly, the RONS projection and its conservation-constrained variant."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .ansatz import AnsatzFamily, GaussianFamily, _values
from .grid import PeriodicGrid
from .pde import PdeKind, rhs_from_jet

CONDITION_WARN = 1e10


class SingularMetricError(np.linalg.LinAlgError):
    """Real part of the metric tensor is not symmetric positive definite."""

    def __init__(self, message: str, condition: float):
        super().__init__(f"{message} (cond(Re M) = {condition:.3e})")
        self.condition = condition


class DependentConstraintsError(np.linalg.LinAlgError):
    """Constraint gradients are linearly dependent, so ``C`` is singular."""

    def __init__(self, quantity: str):
        super().__init__(f"constraint gradient of {quantity!r} depends on the preceding ones")
        self.quantity = quantity


class IllConditionedMetricWarning(UserWarning):
    pass


def gram(a: np.ndarray, b: np.ndarray, dx: float) -> np.ndarray:
    """``G_ij = dx * sum_x a_i(x) conj(b_j(x))``."""
    return dx * (a @ np.conj(b).T)


@dataclass
class TangentSystem:
    """Metric tensor ``M`` and vector field ``f`` at ``q``."""

    M: np.ndarray
    f: np.ndarray
    q: np.ndarray
    names: tuple[str, ...]
    condition: float

    def to_text(self) -> str:
        """Full-precision dump for debugging."""
        lines = ["# tangent system", "q = " + " ".join(repr(float(v)) for v in self.q)]
        lines.append("names = " + " ".join(self.names))
        lines.append(f"condition = {self.condition!r}")
        for i, row in enumerate(self.M):
            lines.append(f"M[{i}] = " + " ".join(f"{z.real!r}{z.imag:+.17g}j" for z in row))
        lines.append("f = " + " ".join(f"{z.real!r}{z.imag:+.17g}j" for z in self.f))
        return "\n".join(lines) + "\n"


def assemble(
    kind: PdeKind,
    family: AnsatzFamily,
    q,
    grid: PeriodicGrid,
    check_tail: bool = True,
) -> TangentSystem:
    """Assemble ``M_ij = <du/dq_i, du/dq_j>`` and ``f_i = <du/dq_i, F(u)>`` by quadrature.

    The inner product is ``<a, b> = int a conj(b) dx``.
    """
    q = _values(q)
    jet = family.jet(q, grid, check_tail=check_tail)
    F = rhs_from_jet(kind, grid, jet)
    M = gram(jet.du, jet.du, grid.dx)
    f = gram(jet.du, F[None, :], grid.dx)[:, 0]
    cond = float(np.linalg.cond(M.real))
    if cond > CONDITION_WARN:
        warnings.warn(f"cond(Re M) = {cond:.3e}", IllConditionedMetricWarning, stacklevel=2)
    return TangentSystem(M=M, f=f, q=q.copy(), names=family.names, condition=cond)


def _factor(matrix: np.ndarray, shift: float, condition: float):
    a = matrix + shift * np.eye(matrix.shape[0]) if shift else matrix
    try:
        return scipy.linalg.cho_factor(a, lower=True)
    except np.linalg.LinAlgError:
        raise SingularMetricError("Re M is not positive definite", condition) from None


def rons_rhs(sys: TangentSystem, shift: float = 0.0) -> np.ndarray:
    """Solve ``Re(M) qdot = Re(f)``; ``shift`` adds an optional Tikhonov term."""
    factor = _factor(sys.M.real, shift, sys.condition)
    return scipy.linalg.cho_solve(factor, sys.f.real)


@dataclass(frozen=True)
class ConservedQuantity:
    name: str
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]


def _gaussian_moments(family: GaussianFamily, q):
    A, L, U, V, _, _ = family.unpack(q)
    return A, L, U, V


def gaussian_conserved_quantities(family: GaussianFamily) -> list[ConservedQuantity]:
    """Closed-form mass and energy of the NLS for Gaussian families.

    With ``V = 0`` these reduce to ``sqrt(pi/2) A^2 L`` and
    ``sqrt(pi) A^2 (sqrt(2)(L^2 U^2 + 1) - 2 A^2 L^2) / (16 L)``.
    """
    names = family.names
    c = np.sqrt(np.pi / 2.0)

    def mass(q):
        A, L, _, _ = _gaussian_moments(family, q)
        return c * A**2 * L

    def mass_grad(q):
        A, L, _, _ = _gaussian_moments(family, q)
        g = dict(A=2 * c * A * L, L=c * A**2)
        return np.array([g.get(n, 0.0) for n in names])

    def energy(q):
        A, L, U, V = _gaussian_moments(family, q)
        kinetic = c * A**2 * (V**2 * L + (1.0 + U**2 * L**2) / L) / 8.0
        return kinetic - np.sqrt(np.pi) * A**4 * L / 8.0

    def energy_grad(q):
        A, L, U, V = _gaussian_moments(family, q)
        g = dict(
            A=c * A * (V**2 * L + (1.0 + U**2 * L**2) / L) / 4.0 - np.sqrt(np.pi) * A**3 * L / 2.0,
            L=c * A**2 * (V**2 - 1.0 / L**2 + U**2) / 8.0 - np.sqrt(np.pi) * A**4 / 8.0,
            U=c * A**2 * U * L / 4.0,
            V=c * A**2 * V * L / 4.0,
        )
        return np.array([g.get(n, 0.0) for n in names])

    return [ConservedQuantity("mass", mass, mass_grad), ConservedQuantity("energy", energy, energy_grad)]


def quadrature_conserved_quantities(
    family: AnsatzFamily, grid: PeriodicGrid, energy: bool = True
) -> list[ConservedQuantity]:
    """Mass and NLS energy of an arbitrary family by quadrature.

    Gradients use the analytic parameter derivatives of the ansatz, so they are
    exact up to quadrature error.
    """
    dx = grid.dx

    def mass(q):
        u = family.evaluate(q, grid, check_tail=False)
        return float(dx * np.sum(np.abs(u) ** 2))

    def mass_grad(q):
        jet = family.jet(q, grid, check_tail=False)
        return 2.0 * dx * np.real(jet.du @ np.conj(jet.u))

    def nls_energy(q):
        jet = family.jet(q, grid, check_tail=False)
        return float(dx * np.sum(np.abs(jet.ux) ** 2 / 8.0 - np.abs(jet.u) ** 4 / 4.0))

    def nls_energy_grad(q):
        jet = family.jet(q, grid, check_tail=False)
        rho = np.abs(jet.u) ** 2
        kinetic = np.real(jet.dux @ np.conj(jet.ux)) / 4.0
        potential = np.real(jet.du @ (rho * np.conj(jet.u)))
        return dx * (kinetic - potential)

    out = [ConservedQuantity("mass", mass, mass_grad)]
    if energy:
        out.append(ConservedQuantity("energy", nls_energy, nls_energy_grad))
    return out


def nls_conserved_quantities(family: AnsatzFamily, grid: PeriodicGrid | None = None):
    """Mass and energy for NLS: closed forms for Gaussians, quadrature otherwise."""
    if isinstance(family, GaussianFamily):
        return gaussian_conserved_quantities(family)
    if grid is None:
        raise ValueError("a grid is required for non-Gaussian families")
    return quadrature_conserved_quantities(family, grid)


def finite_difference_gradient(func, q, rel_step: float = 1e-6) -> np.ndarray:
    """Central differences with step ``rel_step * (1 + |q_i|)``."""
    q = np.asarray(q, dtype=float)
    g = np.empty_like(q)
    for i in range(q.size):
        h = rel_step * (1.0 + abs(q[i]))
        qp, qm = q.copy(), q.copy()
        qp[i] += h
        qm[i] -= h
        g[i] = (func(qp) - func(qm)) / (2 * h)
    return g


@dataclass
class ConstrainedSolution:
    qdot: np.ndarray
    multipliers: np.ndarray
    C: np.ndarray
    b: np.ndarray


def constrained_rons_rhs(
    sys: TangentSystem, cons: Sequence[ConservedQuantity], shift: float = 0.0
) -> ConstrainedSolution:
    """RONS with conserved quantities enforced through Lagrange multipliers."""
    factor = _factor(sys.M.real, shift, sys.condition)
    grads = np.array([c.gradient(sys.q) for c in cons], dtype=float)  # (m, n)
    Minv_grads = scipy.linalg.cho_solve(factor, grads.T)  # (n, m)
    Minv_f = scipy.linalg.cho_solve(factor, sys.f.real)
    C = grads @ Minv_grads
    C = 0.5 * (C + C.T)
    b = grads @ Minv_f
    try:
        lam = scipy.linalg.cho_solve(scipy.linalg.cho_factor(C, lower=True), b)
    except np.linalg.LinAlgError:
        raise DependentConstraintsError(_first_dependent(grads, cons)) from None
    if np.linalg.cond(C) > 1e14:
        raise DependentConstraintsError(_first_dependent(grads, cons))
    qdot = Minv_f - Minv_grads @ lam
    return ConstrainedSolution(qdot=qdot, multipliers=lam, C=C, b=b)


def _first_dependent(grads, cons) -> str:
    for k in range(1, len(cons) + 1):
        s = np.linalg.svd(grads[:k], compute_uv=False)
        if s[-1] <= 1e-12 * max(s[0], 1e-300):
            return cons[k - 1].name
    return cons[-1].name


def residual_cost(kind: PdeKind, family: AnsatzFamily, q, qdot, grid: PeriodicGrid) -> float:
    """Instantaneous error ``(1/2) || sum_i qdot_i du/dq_i - F(u) ||^2``."""
    jet = family.jet(_values(q), grid, check_tail=False)
    r = np.asarray(qdot) @ jet.du - rhs_from_jet(kind, grid, jet)
    return 0.5 * grid.dx * float(np.sum(np.abs(r) ** 2))


def projection_residual(kind: PdeKind, family: AnsatzFamily, q, qdot, grid: PeriodicGrid) -> np.ndarray:
    """``Re <du/dq_j, u_t - F(u)>`` for each ``j``; zero for the RONS solution."""
    jet = family.jet(_values(q), grid, check_tail=False)
    r = np.asarray(qdot) @ jet.du - rhs_from_jet(kind, grid, jet)
    return np.real(gram(jet.du, r[None, :], grid.dx)[:, 0])


def rons_vector_field(kind: PdeKind, family: AnsatzFamily, grid: PeriodicGrid, shift: float = 0.0):
    """Return ``q -> qdot`` for numeric RONS, suitable for an ODE integrator."""

    def field(q):
        return rons_rhs(assemble(kind, family, q, grid, check_tail=False), shift)

    return field

