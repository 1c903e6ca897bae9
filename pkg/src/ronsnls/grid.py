"""Uniform periodic grid, Fourier pair, spectral derivatives and quadrature."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform grid on the periodic box ``[-domain_length/2, domain_length/2)``.

    Parameters
    ----------
    domain_length : float
        Length of the periodic box.
    num_points : int
        Number of grid points. Must be a power of two and at least 8.
    """

    domain_length: float
    num_points: int
    points: np.ndarray = field(init=False, repr=False, compare=False)
    wavenumbers: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        n = int(self.num_points)
        if n < 8 or n & (n - 1):
            raise ValueError(f"num_points must be a power of two >= 8, got {self.num_points}")
        if not self.domain_length > 0:
            raise ValueError(f"domain_length must be positive, got {self.domain_length}")
        object.__setattr__(self, "num_points", n)
        object.__setattr__(self, "domain_length", float(self.domain_length))
        dx = self.domain_length / n
        points = -0.5 * self.domain_length + dx * np.arange(n)
        # fftfreq puts the Nyquist mode on the negative side
        k = 2.0 * np.pi * np.fft.fftfreq(n, d=dx)
        points.setflags(write=False)
        k.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "wavenumbers", k)

    @property
    def dx(self) -> float:
        return self.domain_length / self.num_points

    @property
    def odd_wavenumbers(self) -> np.ndarray:
        """Wavenumbers with the Nyquist mode zeroed, for odd-order derivatives."""
        k = self.wavenumbers.copy()
        k[self.num_points // 2] = 0.0
        return k

    def derivative_symbol(self, order: int) -> np.ndarray:
        """Return ``(ik)**order`` with the Nyquist mode zeroed for odd orders."""
        k = self.odd_wavenumbers if order % 2 else self.wavenumbers
        return (1j * k) ** order

    def dealias_mask(self) -> np.ndarray:
        """Boolean mask keeping modes with ``|m| <= N/3`` (2/3 rule)."""
        m = np.abs(np.fft.fftfreq(self.num_points, d=1.0 / self.num_points))
        return m <= self.num_points / 3.0


def check_field(grid: PeriodicGrid, values) -> np.ndarray:
    """Validate a sampled complex field and return it as a complex array."""
    u = np.asarray(values, dtype=complex)
    if u.shape != (grid.num_points,):
        raise ValueError(f"field has shape {u.shape}, grid expects ({grid.num_points},)")
    if not np.all(np.isfinite(u)):
        raise ValueError("field contains non-finite samples")
    return u


def forward_transform(u: np.ndarray) -> np.ndarray:
    """Fourier-series coefficients ``c_k = (1/N) sum_j u_j exp(-i k x_j')``.

    With this normalization ``sum_j |u_j|^2 dx = domain_length * sum_k |c_k|^2``
    and a constant field ``u = 1`` maps to ``c_0 = 1``.
    """
    u = np.asarray(u)
    return np.fft.fft(u) / u.shape[-1]


def inverse_transform(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c)
    return np.fft.ifft(c) * c.shape[-1]


def spectral_derivative(grid: PeriodicGrid, u: np.ndarray, order: int = 1) -> np.ndarray:
    """Spatial derivative of order 1, 2 or 3 by multiplication with ``(ik)**order``."""
    if order not in (1, 2, 3):
        raise ValueError(f"derivative order must be 1, 2 or 3, got {order}")
    return np.fft.ifft(grid.derivative_symbol(order) * np.fft.fft(u))


def hilbert_like_operator(grid: PeriodicGrid, u: np.ndarray) -> np.ndarray:
    """Surface velocity-potential gradient ``-(1/2) F^-1[|k| F[|u|^2]]``.

    The result is real up to round-off; the complex array is returned so that
    callers can inspect the imaginary residue.
    """
    rho = np.abs(u) ** 2
    return -0.5 * np.fft.ifft(np.abs(grid.wavenumbers) * np.fft.fft(rho))


def quadrature(values, grid: PeriodicGrid):
    """Rectangle rule ``dx * sum(values)`` over the periodic box."""
    values = np.asarray(values)
    if values.shape[-1] != grid.num_points:
        raise ValueError("values length does not match grid")
    return grid.dx * values.sum(axis=-1)


def tail_ratio(u: np.ndarray) -> float:
    """``max(|u_0|, |u_{N-1}|) / max|u|``; 0 for the zero field."""
    a = np.abs(u)
    peak = a.max()
    if peak == 0.0:
        return 0.0
    return float(max(a[0], a[-1]) / peak)


def tail_is_negligible(u: np.ndarray, rtol: float = 1e-12) -> bool:
    """True when the field is negligible at the box edges."""
    return tail_ratio(u) < rtol
