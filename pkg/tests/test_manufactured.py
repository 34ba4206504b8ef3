import numpy as np
import pytest

from axisiga.manufactured import (
    ACTIVE_MODES,
    ManufacturedSolution,
    validate_derivation,
)


class TestDerivation:
    @pytest.mark.parametrize("gamma", [2.0, 0.5])
    def test_curl_matches_finite_differences(self, gamma):
        assert validate_derivation(gamma, npts=100, seed=0) <= 1e-6

    @pytest.mark.parametrize("gamma", [2.0, 0.5])
    def test_current_matches_finite_differences(self, gamma):
        # independent check of j = mu^{-1} curl B via FD of the 3D induction
        ms = ManufacturedSolution(gamma)
        rng = np.random.default_rng(1)
        h = 1e-6
        for r0, z0, t0 in zip(rng.uniform(0.2, 0.9, 40),
                              rng.uniform(4.1, 4.9, 40),
                              rng.uniform(0, 2 * np.pi, 40)):
            B = lambda r, z, t: ms.field_3d("b", r, z, t)
            dBr = (B(r0 + h, z0, t0) - B(r0 - h, z0, t0)) / (2 * h)
            dBz = (B(r0, z0 + h, t0) - B(r0, z0 - h, t0)) / (2 * h)
            dBt = (B(r0, z0, t0 + h) - B(r0, z0, t0 - h)) / (2 * h)
            Br, Bz, Bt = B(r0, z0, t0)
            curl = np.array([
                dBt[1] / r0 - dBz[2],
                (Bt + r0 * dBr[2] - dBt[0]) / r0,
                dBz[0] - dBr[1]]) / ms.materials.mu
            ref = ms.field_3d("j", r0, z0, t0)
            scale = max(np.linalg.norm(ref), 1e-6)
            assert np.linalg.norm(curl - ref) <= 1e-6 * scale


class TestModeContent:
    def test_active_modes(self):
        assert set(ACTIVE_MODES) == {3, 2, -1, -3}

    def test_inactive_modes_are_zero(self):
        ms = ManufacturedSolution(2.0)
        rho = np.array([0.3, 0.7])
        z = np.array([4.2, 4.8])
        for m in (1, -2, 4, -4):
            assert np.abs(ms.a(m, rho, z)).max() == 0.0
            assert np.abs(ms.b(m, rho, z)).max() == 0.0
            assert np.abs(ms.current(m, rho, z)).max() == 0.0

    def test_sin_cubed_splitting(self):
        # rho^2 (sin t - 2 sin^3 t)(5-z)^gamma splits into m = -1 and m = -3
        # with amplitudes -1/2 and +1/2
        ms = ManufacturedSolution(1.0)
        rho, z = np.array([0.5]), np.array([4.5])
        base = rho[0] ** 2 * (5 - z[0])
        assert ms.a(-1, rho, z)[0, 1] == pytest.approx(-base / 2)
        assert ms.a(-3, rho, z)[0, 1] == pytest.approx(base / 2)
        theta = 0.77
        full = ms.field_3d("a", rho[0], z[0], theta)
        assert full[1] == pytest.approx(
            base * (np.sin(theta) - 2 * np.sin(theta) ** 3))

    def test_dirichlet_edge_values_vanish(self):
        ms = ManufacturedSolution(0.5)
        rho = np.linspace(0.05, 1.0, 7)
        z = np.full_like(rho, 5.0)
        for m in ACTIVE_MODES:
            assert np.abs(ms.a(m, rho, z)).max() <= 1e-14


class TestNeumannDatum:
    def test_cross_product_formula(self):
        ms = ManufacturedSolution(2.0)
        rho = np.array([0.6])
        z = np.array([4.3])
        n = np.array([0.8, -0.6])
        g = ms.neumann(3, rho, z, n)[0]
        w = ms.b(3, rho, z)[0] / ms.materials.mu
        # w x n in the orthonormal (e_rho, e_z, e_theta) frame with
        # e_rho x e_z = -e_theta
        expect = np.array([w[2] * n[1], -w[2] * n[0],
                           w[1] * n[0] - w[0] * n[1]])
        assert g == pytest.approx(expect)

    def test_linear_in_b(self):
        m1 = ManufacturedSolution(2.0)
        rho = np.array([0.4, 0.9])
        z = np.array([4.1, 4.6])
        n = np.array([1.0, 0.0])
        g = m1.neumann(2, rho, z, n)
        w = m1.b(2, rho, z) / m1.materials.mu
        assert np.allclose(g[:, 0], 0.0)          # n_z = 0
        assert np.allclose(g[:, 1], -w[:, 2])
        assert np.allclose(g[:, 2], w[:, 1])
