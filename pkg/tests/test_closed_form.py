import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from ronsnls import ansatz as az
from ronsnls import closed_form as cf
from ronsnls import pde, rons
from ronsnls.ansatz import AdmissibilityError
from ronsnls.integrate import OdeSolverConfig, integrate_ode

from conftest import random_gaussian


class TestNlsGaussian:
    def test_reference_state(self):
        qdot = cf.nls_gaussian_rhs([0.1, 15.0, 0.0, 0.0])
        assert_allclose(qdot[:2], 0.0, atol=1e-15)
        assert_allclose(qdot[2], (np.sqrt(2) * 0.01 * 225 - 2) / (4 * 15.0**3), rtol=1e-14)
        assert_allclose(qdot[2:], [8.7554e-5, -3.3083e-3], rtol=1e-4)

    def test_translating_center_speed(self, rng):
        for _ in range(5):
            q = random_gaussian(rng, translating=True)
            qdot = cf.nls_translating_gaussian_rhs(q)
            assert qdot[4] == 0.5
            assert_allclose(qdot[:4], cf.nls_gaussian_rhs(q[:4]), rtol=0, atol=0)

    @given(
        A=st.floats(0.01, 1.0),
        L=st.floats(0.5, 40.0),
        U=st.floats(-0.2, 0.2),
        phi=st.floats(-3, 3),
    )
    def test_mass_is_invariant(self, A, L, U, phi):
        q = np.array([A, L, U, phi])
        mass, energy = rons.gaussian_conserved_quantities(az.GAUSSIAN_COMOVING)
        qdot = cf.nls_gaussian_rhs(q)
        assert abs(mass.gradient(q) @ qdot) < 1e-12 * (1 + mass.value(q))
        assert abs(energy.gradient(q) @ qdot) < 1e-10 * np.abs(energy.gradient(q)).max()

    @pytest.mark.parametrize("q", [[0.0, 15.0, 0.0, 0.0], [0.1, 0.0, 0.0, 0.0], [0.1, -3.0, 0.0, 0.0]])
    def test_inadmissible(self, q):
        with pytest.raises(AdmissibilityError):
            cf.nls_gaussian_rhs(q)

    @pytest.mark.parametrize("A, focusing", [(0.2, True), (0.05, False)])
    def test_focusing_threshold(self, A, focusing):
        """Above sqrt(2) / (A^2 L^2) = 1 the width contracts, below it spreads."""
        L = 15.0
        fam = az.GAUSSIAN_COMOVING
        traj = integrate_ode(cf.nls_gaussian_rhs, [A, L, 0.0, 0.0], OdeSolverConfig(t_final=20.0), fam)
        width = traj.channel("L")
        amp = traj.channel("A")
        assert (width[-1] < L) == focusing
        assert (amp[-1] > A) == focusing


class TestMnls:
    def test_reference_state(self):
        qdot = cf.mnls_full_gaussian_rhs([0.1, 20.0, 0.0, 0.0, 0.0, 0.0])
        assert_allclose(qdot[5], 0.504888, atol=5e-7)
        assert_allclose(qdot[[0, 1, 3]], 0.0, atol=1e-15)

    def test_static_rates_at_zero_chirp(self):
        """At V = 0 and U = 0 the amplitude, width and V rates vanish."""
        q = [0.15, 12.0, 0.0, 0.0, 0.3, -4.0]
        qdot = cf.mnls_full_gaussian_rhs(q)
        assert_allclose(qdot[[0, 1, 3]], 0.0, atol=1e-15)

    def test_mass_is_invariant(self, rng):
        mass = rons.gaussian_conserved_quantities(az.GAUSSIAN_FULL)[0]
        for _ in range(50):
            q = random_gaussian(rng, full=True)
            assert abs(mass.gradient(q) @ cf.mnls_full_gaussian_rhs(q)) < 1e-12


class TestOracle:
    def test_nls_comoving(self, rom_grid, rng):
        for _ in range(10):
            q = random_gaussian(rng)
            err = cf.oracle_compare(cf.ClosedFormSystem.NLS_COMOVING_GAUSSIAN, pde.NLS_COMOVING, az.GAUSSIAN_COMOVING, q, rom_grid)
            assert err < 1e-8

    def test_nls_stationary(self, rom_grid, rng):
        for _ in range(10):
            q = random_gaussian(rng, translating=True)
            err = cf.oracle_compare(
                cf.ClosedFormSystem.NLS_STATIONARY_GAUSSIAN, pde.NLS_STATIONARY, az.GAUSSIAN_TRANSLATING, q, rom_grid
            )
            assert err < 1e-8

    def test_mnls(self, rom_grid, rng):
        for _ in range(10):
            q = random_gaussian(rng, full=True)
            err = cf.oracle_compare(cf.ClosedFormSystem.MNLS_FULL_GAUSSIAN, pde.MNLS, az.GAUSSIAN_FULL, q, rom_grid)
            assert err < 1e-5

    def test_mismatched_pairing(self, rom_grid):
        with pytest.raises(ValueError):
            cf.oracle_compare(cf.ClosedFormSystem.MNLS_FULL_GAUSSIAN, pde.NLS_COMOVING, az.GAUSSIAN_FULL, [0.1, 15, 0, 0, 0, 0], rom_grid)
        with pytest.raises(ValueError):
            cf.oracle_compare(cf.ClosedFormSystem.NLS_COMOVING_GAUSSIAN, pde.NLS_COMOVING, az.GAUSSIAN_FULL, [0.1, 15, 0, 0, 0, 0], rom_grid)

    def test_family_for(self):
        assert cf.family_for("MnlsFullGaussian") is az.GAUSSIAN_FULL
        assert cf.family_for(cf.ClosedFormSystem.NLS_STATIONARY_GAUSSIAN) is az.GAUSSIAN_TRANSLATING
