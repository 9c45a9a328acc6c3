import math

import numpy as np
import pytest

from spectral_corner import (MetricSpec, ScalarField, analytic_spectrum,
                             assemble_fdm, bessel_zero, richardson_spectrum,
                             solve_eigs, spectrum_upto, weyl_ratio)

from .conftest import make_sector


def fdm_square_eigenvalue(m, n, h):
    """Exact eigenvalue of the 5-point Dirichlet Laplacian on the unit square."""
    return (4 / h ** 2) * (math.sin(m * math.pi * h / 2) ** 2
                           + math.sin(n * math.pi * h / 2) ** 2)


class TestAnalyticSpectra:
    def test_square_modes(self, square):
        spec = analytic_spectrum(square, 12)
        pi2 = math.pi ** 2
        expected = pi2 * np.array([2, 5, 5, 8, 10, 10, 13, 13, 17, 17, 18, 20])
        assert spec.count >= 12
        np.testing.assert_allclose(spec.eigenvalues[:12], expected, rtol=1e-12)
        assert spec.provenance["source"] == "analytic"

    def test_disk_ground_state(self, disk):
        spec = analytic_spectrum(disk, 10)
        assert spec.eigenvalues[0] == pytest.approx(
            bessel_zero(0.0, 1) ** 2, rel=1e-12)

    def test_cone_sector_ground_state(self):
        spec = analytic_spectrum(make_sector(3.0), 10)
        assert spec.eigenvalues[0] == pytest.approx(
            bessel_zero(1.0 / 3.0, 1) ** 2, rel=1e-12)

    def test_spectrum_upto_is_complete(self, square):
        spec = spectrum_upto(square, 500.0)
        pi2 = math.pi ** 2
        brute = sorted(pi2 * (m * m + n * n)
                       for m in range(1, 30) for n in range(1, 30)
                       if pi2 * (m * m + n * n) <= 500.0)
        np.testing.assert_allclose(spec.eigenvalues, brute, rtol=1e-12)

    def test_weyl_ratio_tends_to_one(self, square, disk):
        for dom in (square, disk):
            spec = analytic_spectrum(dom, 20000)
            assert weyl_ratio(spec, 20000) == pytest.approx(1.0, abs=0.02)

    def test_dilation_scaling_exact(self, disk):
        base = analytic_spectrum(disk, 50).eigenvalues
        scaled = analytic_spectrum(disk.scaled(2.0), 50).eigenvalues
        np.testing.assert_allclose(scaled, base / 4.0, rtol=1e-12)


class TestDiscreteOperator:
    def test_five_point_eigenvalues_exact(self, square):
        h = 1 / 32
        ds = solve_eigs(assemble_fdm(square, None, h=h), 6, seed=0)
        expected = sorted(fdm_square_eigenvalue(m, n, h)
                          for m in range(1, 6) for n in range(1, 6))[:6]
        np.testing.assert_allclose(ds.eigenvalues, expected, rtol=1e-9)

    def test_completeness_convention(self, square):
        ds = solve_eigs(assemble_fdm(square, None, h=1 / 16), 20, seed=0)
        assert ds.completeness() == pytest.approx(0.8 * ds.eigenvalues[-1])

    def test_richardson_beats_single_grid(self, square):
        exact = math.pi ** 2 * 2
        h = 1 / 16
        coarse = solve_eigs(assemble_fdm(square, None, h=h), 3, seed=0)
        rich = richardson_spectrum(square, None, h, 3, seed=0)
        assert abs(rich.eigenvalues[0] - exact) \
            < 0.05 * abs(coarse.eigenvalues[0] - exact)

    def test_ground_state_drops_when_domain_grows(self, square):
        lam_small = solve_eigs(assemble_fdm(square, None, h=1 / 24), 1,
                               seed=0).eigenvalues[0]
        lam_big = solve_eigs(assemble_fdm(square.scaled(1.25), None, h=1 / 24),
                             1, seed=0).eigenvalues[0]
        assert lam_big < lam_small

    def test_constant_conformal_equivariance(self, square):
        c = 0.3
        flat = solve_eigs(assemble_fdm(square, None, h=1 / 16), 8, seed=0)
        shifted = solve_eigs(
            assemble_fdm(square, MetricSpec(ScalarField.constant(c), 1.0),
                         h=1 / 16), 8, seed=0)
        np.testing.assert_allclose(shifted.eigenvalues,
                                   math.exp(-2 * c) * flat.eigenvalues,
                                   rtol=1e-9)

    def test_fdm_dilation_scaling(self, square):
        lam = solve_eigs(assemble_fdm(square, None, h=1 / 24), 4,
                         seed=0).eigenvalues
        lam_r = solve_eigs(assemble_fdm(square.scaled(2.0), None, h=1 / 12), 4,
                           seed=0).eigenvalues
        np.testing.assert_allclose(lam_r, lam / 4.0, rtol=1e-9)

    def test_slit_splits_modes(self, square, slit_square):
        # the slit raises the ground state (Dirichlet on extra boundary)
        lam_sq = solve_eigs(assemble_fdm(square, None, h=1 / 32), 1,
                            seed=0).eigenvalues[0]
        lam_slit = solve_eigs(assemble_fdm(slit_square, None, h=1 / 32), 1,
                              seed=0).eigenvalues[0]
        assert lam_slit > lam_sq + 1.0
