"""Complex master equation ``M qdot = xi + eta`` for Lagrangian-form PDEs.

The real part of the master equation is the RONS system, the imaginary part is
the Euler-Lagrange system of the reduced Lagrangian.  The imaginary part uses
the skew-symmetric ``Im M`` and can be rank deficient, so its solver returns a
structured rank report instead of raising.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .ansatz import AnsatzFamily, MassConstrainedGaussian, _values
from .grid import PeriodicGrid, spectral_derivative
from .pde import NLS_COMOVING, NLS_STATIONARY, PdeKind
from .rons import SingularMetricError, gram

RANK_RTOL = 1e-10


class LagrangianDensity:
    """Density ``h(u, u_x, u*, u_x*)`` with ``(dh/du)* = dh/du*``.

    Subclasses provide the four partial derivatives; the induced PDE is
    ``u_t = -i d/dx (dh/du_x*) + i dh/du*``.
    """

    name = "density"
    pde_kind: PdeKind | None = None

    def h(self, u, ux):
        raise NotImplementedError

    def dh_du(self, u, ux):
        raise NotImplementedError

    def dh_duc(self, u, ux):
        raise NotImplementedError

    def dh_dux(self, u, ux):
        raise NotImplementedError

    def dh_duxc(self, u, ux):
        raise NotImplementedError

    def induced_rhs(self, grid: PeriodicGrid, u: np.ndarray) -> np.ndarray:
        ux = spectral_derivative(grid, u, 1)
        flux = self.dh_duxc(u, ux)
        return -1j * spectral_derivative(grid, flux, 1) + 1j * self.dh_duc(u, ux)


class NlsDensity(LagrangianDensity):
    """``gamma/4 (i u_x u* - i u u_x*) + |u_x|^2/8 - |u|^4/4``.

    ``gamma = 1`` gives the stationary-frame NLS, ``gamma = 0`` the co-moving one.
    """

    def __init__(self, gamma: int):
        if gamma not in (0, 1):
            raise ValueError("gamma must be 0 or 1")
        self.gamma = gamma
        self.name = "NlsStationaryH" if gamma else "NlsComovingH"
        self.pde_kind = NLS_STATIONARY if gamma else NLS_COMOVING

    def h(self, u, ux):
        g = self.gamma / 4.0
        adv = g * (1j * ux * np.conj(u) - 1j * u * np.conj(ux))
        return (adv + np.abs(ux) ** 2 / 8.0 - np.abs(u) ** 4 / 4.0).real

    def dh_du(self, u, ux):
        return -0.25j * self.gamma * np.conj(ux) - 0.5 * np.abs(u) ** 2 * np.conj(u)

    def dh_duc(self, u, ux):
        return 0.25j * self.gamma * ux - 0.5 * np.abs(u) ** 2 * u

    def dh_dux(self, u, ux):
        return 0.25j * self.gamma * np.conj(u) + np.conj(ux) / 8.0

    def dh_duxc(self, u, ux):
        return -0.25j * self.gamma * u + ux / 8.0

    def __repr__(self):
        return f"NlsDensity(gamma={self.gamma})"


NLS_STATIONARY_H = NlsDensity(1)
NLS_COMOVING_H = NlsDensity(0)


@dataclass
class MasterSystem:
    M: np.ndarray
    xi: np.ndarray
    eta: np.ndarray
    q: np.ndarray
    names: tuple[str, ...]

    @property
    def rhs(self) -> np.ndarray:
        return self.xi + self.eta


def assemble_master(
    density: LagrangianDensity, family: AnsatzFamily, q, grid: PeriodicGrid, check_tail: bool = True
) -> MasterSystem:
    """Assemble ``M``, ``xi_k = -i int du/dq_k dh/du`` and ``eta_k = -i int du_x/dq_k dh/du_x``."""
    q = _values(q)
    jet = family.jet(q, grid, check_tail=check_tail)
    M = gram(jet.du, jet.du, grid.dx)
    xi = -1j * grid.dx * (jet.du @ density.dh_du(jet.u, jet.ux))
    eta = -1j * grid.dx * (jet.dux @ density.dh_dux(jet.u, jet.ux))
    return MasterSystem(M=M, xi=xi, eta=eta, q=q.copy(), names=family.names)


def solve_real_part(sys: MasterSystem) -> np.ndarray:
    """``Re(M) qdot = Re(xi + eta)``, the RONS equations."""
    try:
        factor = scipy.linalg.cho_factor(sys.M.real, lower=True)
    except np.linalg.LinAlgError:
        raise SingularMetricError("Re M is not positive definite", float(np.linalg.cond(sys.M.real))) from None
    return scipy.linalg.cho_solve(factor, sys.rhs.real)


@dataclass
class RankReport:
    """Outcome of solving ``Im(M) qdot = Im(xi + eta)``.

    ``qdot`` is the unique solution when ``full_rank``; otherwise it is the
    minimum-norm least-squares solution, whose null-space components vanish.
    """

    qdot: np.ndarray
    rank: int
    singular_values: np.ndarray
    null_space: np.ndarray  # (n, n - rank)
    names: tuple[str, ...]
    residual: float

    @property
    def full_rank(self) -> bool:
        return self.rank == len(self.names)

    def undetermined(self, tol: float = 1e-6) -> tuple[str, ...]:
        """Parameters with a non-negligible component in the null space."""
        if self.null_space.size == 0:
            return ()
        weight = np.linalg.norm(self.null_space, axis=1)
        return tuple(n for n, w in zip(self.names, weight) if w > tol)

    def to_text(self) -> str:
        lines = [
            f"rank = {self.rank}",
            f"size = {len(self.names)}",
            "singular_values = " + " ".join(f"{s:.17g}" for s in self.singular_values),
            f"residual = {self.residual:.17g}",
            "undetermined = " + (" ".join(self.undetermined()) or "none"),
        ]
        for j in range(self.null_space.shape[1]):
            coords = " ".join(f"{n}:{v:.17g}" for n, v in zip(self.names, self.null_space[:, j]))
            lines.append(f"null[{j}] = {coords}")
        lines.append("qdot = " + " ".join(f"{n}:{v:.17g}" for n, v in zip(self.names, self.qdot)))
        return "\n".join(lines) + "\n"


def rank_report(matrix: np.ndarray, rhs: np.ndarray, names, rtol: float = RANK_RTOL) -> RankReport:
    U, s, Vh = np.linalg.svd(matrix)
    cutoff = rtol * s[0] if s.size and s[0] > 0 else 0.0
    rank = int(np.sum(s > cutoff)) if s[0] > 0 else 0
    inv = np.zeros_like(s)
    inv[:rank] = 1.0 / s[:rank]
    qdot = Vh.T @ (inv * (U.T @ rhs))
    residual = float(np.linalg.norm(matrix @ qdot - rhs))
    return RankReport(
        qdot=qdot,
        rank=rank,
        singular_values=s,
        null_space=Vh[rank:].T.copy(),
        names=tuple(names),
        residual=residual,
    )


def solve_imag_part(sys: MasterSystem, rtol: float = RANK_RTOL) -> RankReport:
    """The reduced-Lagrangian (Euler-Lagrange) equations ``Im(M) qdot = Im(xi + eta)``."""
    return rank_report(sys.M.imag, sys.rhs.imag, sys.names, rtol)


def poly_exponent_blocks(M: np.ndarray):
    """Split ``M = [[B, C^H], [C, D]]`` into its ``alpha``/``beta`` blocks."""
    m1 = M.shape[0] // 2
    return M[:m1, :m1], M[m1:, :m1], M[m1:, m1:]


@dataclass
class MassConstrainedReport:
    imag: RankReport
    real_spd: bool
    phi_column_norm: float

    @property
    def phi_in_null_space(self) -> bool:
        return "phi" in self.imag.undetermined()

    def to_text(self) -> str:
        return (
            f"real_part_spd = {self.real_spd}\n"
            f"phi_column_norm = {self.phi_column_norm:.17g}\n" + self.imag.to_text()
        )


def mass_constrained_gaussian_check(
    q, mass_constant: float, grid: PeriodicGrid, density: LagrangianDensity = NLS_COMOVING_H
) -> MassConstrainedReport:
    """Rank structure for the Gaussian with ``A`` slaved to ``L`` by mass conservation.

    ``q = (L, U, phi)`` and ``A = sqrt(mass_constant / L)``.
    """
    family = MassConstrainedGaussian(mass_constant)
    sys = assemble_master(density, family, q, grid)
    try:
        np.linalg.cholesky(sys.M.real)
        spd = True
    except np.linalg.LinAlgError:
        spd = False
    report = solve_imag_part(sys)
    phi_col = np.linalg.norm(sys.M.imag[:, family.names.index("phi")])
    scale = np.abs(sys.M.imag).max()
    return MassConstrainedReport(imag=report, real_spd=spd, phi_column_norm=float(phi_col / scale))


def reduced_lagrangian(density: LagrangianDensity, family: AnsatzFamily, q, qdot, grid: PeriodicGrid) -> float:
    """``int (1/2)(i u_t u* - i u u_t*) + h dx`` with ``u_t = sum_j qdot_j du/dq_j``."""
    jet = family.jet(_values(q), grid, check_tail=False)
    ut = np.asarray(qdot) @ jet.du
    kinetic = 0.5 * (1j * ut * np.conj(jet.u) - 1j * jet.u * np.conj(ut))
    return float(grid.dx * np.sum(kinetic.real + density.h(jet.u, jet.ux)))


def euler_lagrange_system(
    density: LagrangianDensity, family: AnsatzFamily, q, grid: PeriodicGrid, rel_step: float = 1e-6
):
    """Euler-Lagrange equations of the reduced Lagrangian by central differences.

    The reduced Lagrangian is linear in ``qdot``, ``a(q) . qdot + H(q)``, so the
    equations read ``Omega qdot = -grad H`` with ``Omega_kj = d_k a_j - d_j a_k``.
    Returns ``(Omega, -grad H)``.  Independent of :func:`assemble_master`.
    """
    q = np.asarray(_values(q), dtype=float)
    n = q.size

    def parts(p):
        jet = family.jet(p, grid, check_tail=False)
        a = grid.dx * np.sum(np.imag(np.conj(jet.du) * jet.u), axis=1)
        H = grid.dx * np.sum(density.h(jet.u, jet.ux))
        return a, H

    da = np.empty((n, n))
    dH = np.empty(n)
    for k in range(n):
        h = rel_step * (1.0 + abs(q[k]))
        e = np.zeros(n)
        e[k] = h
        ap, Hp = parts(q + e)
        am, Hm = parts(q - e)
        da[k] = (ap - am) / (2 * h)
        dH[k] = (Hp - Hm) / (2 * h)
    return da - da.T, -dH
