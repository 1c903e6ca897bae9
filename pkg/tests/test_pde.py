import numpy as np
import pytest
from numpy.testing import assert_allclose

from ronsnls import ansatz as az
from ronsnls import pde
from ronsnls.grid import PeriodicGrid, quadrature

ALL_KINDS = [pde.NLS_STATIONARY, pde.NLS_COMOVING, pde.MNLS, pde.MNLS_WITH_POTENTIAL]


def smooth_field(grid, rng):
    x = grid.points
    u = (0.1 + 0.05j) * np.exp(-((x - 3) ** 2) / 12**2 + 0.2j * x)
    return u + 0.03 * rng.normal() * np.exp(-((x + 10) ** 2) / 8**2)


class TestPdeKind:
    def test_potential_flag_only_for_mnls(self):
        assert pde.MNLS_WITH_POTENTIAL.velocity_potential
        assert not pde.PdeKind("NlsComoving", include_velocity_potential=True).velocity_potential

    def test_from_string(self):
        assert pde.PdeKind("Mnls").equation is pde.Equation.MNLS
        with pytest.raises(ValueError):
            pde.PdeKind("Kdv")


class TestRhs:
    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_zero_field(self, kind, dns_grid):
        assert_allclose(pde.rhs(kind, dns_grid, np.zeros(dns_grid.num_points)), 0.0)

    def test_constant_comoving(self, dns_grid):
        F = pde.rhs(pde.NLS_COMOVING, dns_grid, np.ones(dns_grid.num_points))
        assert_allclose(F, -0.5j, atol=1e-15)

    def test_plane_wave_stationary(self, dns_grid):
        k = dns_grid.wavenumbers[7]
        u = np.exp(1j * k * dns_grid.points)
        F = pde.rhs(pde.NLS_STATIONARY, dns_grid, u)
        assert_allclose(F, (-0.5j * k + 0.125j * k**2 - 0.5j) * u, atol=1e-10)

    def test_stationary_minus_comoving(self, dns_grid, rng):
        from ronsnls.grid import spectral_derivative

        u = smooth_field(dns_grid, rng)
        diff = pde.rhs(pde.NLS_STATIONARY, dns_grid, u) - pde.rhs(pde.NLS_COMOVING, dns_grid, u)
        assert_allclose(diff, -0.5 * spectral_derivative(dns_grid, u, 1), atol=1e-15)

    @pytest.mark.parametrize("kind", [pde.NLS_STATIONARY, pde.NLS_COMOVING])
    def test_gauge_covariance(self, kind, dns_grid, rng):
        u = smooth_field(dns_grid, rng)
        rot = np.exp(0.7j)
        assert_allclose(pde.rhs(kind, dns_grid, rot * u), rot * pde.rhs(kind, dns_grid, u), atol=1e-12)

    def test_mass_flux_vanishes(self, dns_grid, rng):
        u = smooth_field(dns_grid, rng)
        F = pde.rhs(pde.NLS_COMOVING, dns_grid, u)
        assert abs(quadrature(np.real(u * np.conj(F)), dns_grid)) < 1e-14


class TestRhsOnAnsatz:
    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_matches_spectral(self, kind, rom_grid):
        q = [0.1, 15, 0.02, 0.03, 0.4, 2.0]
        analytic = pde.rhs_on_ansatz(kind, az.GAUSSIAN_FULL, q, rom_grid)
        spectral = pde.rhs(kind, rom_grid, az.GAUSSIAN_FULL.evaluate(q, rom_grid))
        assert np.linalg.norm(analytic - spectral) / np.linalg.norm(spectral) < 1e-8

    def test_rejects_zero_amplitude(self, rom_grid):
        with pytest.raises(az.AdmissibilityError):
            pde.rhs_on_ansatz(pde.NLS_COMOVING, az.GAUSSIAN_COMOVING, [0.0, 15, 0, 0], rom_grid)

    def test_mnls_smoke(self, rom_grid):
        F = pde.rhs_on_ansatz(pde.MNLS, az.GAUSSIAN_FULL, [0.1, 20, 0, 0, 0, 0], rom_grid)
        assert np.all(np.isfinite(F))
        assert np.max(np.abs(np.diff(F))) < 1e-3


class TestSplitting:
    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_linear_plus_nonlinear(self, kind, dns_grid, rng):
        u = smooth_field(dns_grid, rng)
        lin = np.fft.ifft(pde.linear_symbol(kind, dns_grid) * np.fft.fft(u))
        assert_allclose(lin + pde.nonlinear_term(kind, dns_grid, u), pde.rhs(kind, dns_grid, u), atol=1e-15)

    def test_comoving_symbol_is_dispersive(self, dns_grid):
        sym = pde.linear_symbol(pde.NLS_COMOVING, dns_grid)
        assert_allclose(sym.real, 0.0)
        assert_allclose(sym.imag, dns_grid.wavenumbers**2 / 8)
