"""End-to-end acceptance gate: one test per headline guarantee.

Each test exercises a full pipeline at its stated tolerance and time budget
and prints a single pass/fail line under pytest -v.
"""

import math
import time

import numpy as np
import pytest

from spectral_corner import (ExpansionCoefficients, FunctionTraceProvider,
                             PipelineConfig, WedgeBallQuery, a_remainder,
                             a_remainder_bound, analytic_spectrum, bessel_j,
                             boundary_integral, bridge_trace_estimate,
                             compare_expansion, corner_term, default_window,
                             derivative_identity_residual, fit_expansion,
                             geometric_coefficients, interior_integral,
                             pa_verify, provider_for, rect_theta_factor,
                             solve_eigs, assemble_fdm, trace_at, trace_curve,
                             wedge_ball_trace, weyl_ratio, zeta_continued,
                             zeta_prime_at_zero, zeta_series)
from spectral_corner import ScalarField

from .conftest import make_sector
from .oracles import (SQUARE_ZETA_PRIME0, halfplane_ball_trace,
                      quarterplane_ball_trace)


def test_criterion_1_corner_coefficient_exact_spectra(square, disk):
    for dom, expected, n in ((square, 0.25, 200), (disk, 1.0 / 6.0, 20000)):
        start = time.monotonic()
        spec = analytic_spectrum(dom, n)
        curve = trace_curve(spec, default_window(spec))
        fit = fit_expansion(curve, "peel-known",
                            known=geometric_coefficients(dom))
        elapsed = time.monotonic() - start
        assert fit.a_0 == pytest.approx(expected, abs=1e-3)
        assert elapsed < 10.0


def test_criterion_2_arbitrary_angle_corner_term(sector_a0_fits):
    for alpha in (0.5, 1.5, 3.0):
        entry = sector_a0_fits[alpha]
        expected = alpha / 12 + 1.0 / 8 + (1 - alpha ** 2) / (24 * alpha)
        assert entry["count"] >= 20000
        assert entry["a_0"] == pytest.approx(expected, abs=1e-2)
        assert entry["seconds"] < 120.0


def test_criterion_3_slit_tip_term(slit_richardson):
    domain, spec, seconds = slit_richardson
    curve = trace_curve(spec, default_window(spec))
    report = compare_expansion(domain, None, None, curve,
                               tolerances={"a_m1": 5e-2, "a_mhalf": 5e-2,
                                           "a_0": 5e-2})
    row = report["rows"]["a_0"]
    assert row["predicted"] == pytest.approx(5.0 / 16.0, abs=1e-12)
    assert row["abs_gap"] < 5e-2
    assert seconds < 600.0


def test_criterion_4_wedge_module():
    for alpha in (0.3, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0):
        for eps in (0.5, 1.0):
            for t in (0.01, 0.05, 0.1):
                q = WedgeBallQuery(alpha, eps, t)
                assert abs(a_remainder(q)) \
                    <= a_remainder_bound(q) * (1 + 1e-12)
    # image-method quadrature oracles at alpha = 1/2 and 1
    for eps in (0.5, 1.0):
        for t in (0.01, 0.05, 0.1):
            assert wedge_ball_trace(WedgeBallQuery(1.0, eps, t)) \
                == pytest.approx(halfplane_ball_trace(eps, t), abs=1e-8)
            assert wedge_ball_trace(WedgeBallQuery(0.5, eps, t)) \
                == pytest.approx(quarterplane_ball_trace(eps, t), abs=1e-8)
    # branch continuity of the remainder at alpha = 2
    for eps, t in ((0.5, 0.05), (1.0, 0.1)):
        a_lo = a_remainder(WedgeBallQuery(2.0 - 1e-6, eps, t))
        a_mid = a_remainder(WedgeBallQuery(2.0, eps, t))
        a_hi = a_remainder(WedgeBallQuery(2.0 + 1e-6, eps, t))
        assert abs(a_mid - a_lo) < 1e-8
        assert abs(a_hi - a_mid) < 1e-8


def test_criterion_5_zeta_machinery(square):
    spec = analytic_spectrum(square, 40000)
    provider = provider_for(spec)
    coeffs = geometric_coefficients(square)
    # continuation vs direct series
    for s in (1.5, 2.0, 3.0):
        assert zeta_continued(provider, coeffs, s) \
            == pytest.approx(zeta_series(spec, s, tol=1e-6), abs=1e-6)
    # residues at the poles s = 1 and s = 1/2
    delta = 1e-3
    for s0, expected in ((1.0, coeffs.a_m1),
                         (0.5, coeffs.a_mhalf / math.sqrt(math.pi))):
        r = delta * (zeta_continued(provider, coeffs, s0 + delta)
                     - zeta_continued(provider, coeffs, s0 - delta)) / 2
        assert r == pytest.approx(expected, abs=1e-4)
    # zeta(0) = a_0
    assert zeta_continued(provider, coeffs, 0.0) \
        == pytest.approx(coeffs.a_0, abs=1e-6)
    # zeta'(0) vs the independent rectangle-determinant oracle
    ev = zeta_prime_at_zero(provider, coeffs)
    assert ev.zeta_prime0 == pytest.approx(SQUARE_ZETA_PRIME0, abs=1e-6)
    # toy spectrum lambda_n = n^2: zeta(s) = zeta_R(2s), so
    # zeta'(0) = 2 zeta_R'(0) = -log(2 pi)
    toy = FunctionTraceProvider(
        lambda t: rect_theta_factor(t / math.pi ** 2), lam_1=1.0)
    toy_coeffs = ExpansionCoefficients(0.0, math.sqrt(math.pi) / 2, -0.5, {})
    toy_ev = zeta_prime_at_zero(toy, toy_coeffs)
    assert toy_ev.zeta_prime0 == pytest.approx(-math.log(2 * math.pi),
                                               abs=1e-6)


def test_criterion_6_polyakov_alvarez(square):
    # constant sigma: lhs = 2 c zeta(0), rhs = c/2 on the unit square
    const = pa_verify(square, 0.3)
    assert const.rhs == pytest.approx(0.15, abs=1e-12)
    assert const.lhs == pytest.approx(2 * 0.3 * 0.25, abs=1e-4)
    assert abs(const.gap) < 1e-4

    # trace-derivative identity residual en route
    res = derivative_identity_residual(square, "0.2*x*y", 0.0, eps=0.5,
                                       h=1 / 16, seed=0)
    assert res < 1e-4

    # nonconstant sigma = 0.2 x y: full spectral pipeline
    report = pa_verify(square, "0.2*x*y", PipelineConfig())
    assert report.rel_gap < 2e-2
    diff = report.details["differentiated"]
    assert abs(diff["gap"]) < 1e-2


def test_criterion_7_monte_carlo_cross_check(slit_richardson):
    domain, spec, _ = slit_richardson
    t = 0.05
    reference = trace_at(spec, t)
    start = time.monotonic()
    est = bridge_trace_estimate(domain, t, 1000000, steps=64, seed=0)
    elapsed = time.monotonic() - start
    assert abs(est.estimate - reference) < 3 * est.stderr
    assert elapsed < 300.0


def test_criterion_8_property_suites(square, disk):
    # dilation scaling of eigenvalues
    lam = analytic_spectrum(disk, 20).eigenvalues
    lam_r = analytic_spectrum(disk.scaled(2.0), 20).eigenvalues
    np.testing.assert_allclose(lam_r, lam / 4.0, rtol=1e-12)
    # domain monotonicity of the ground state
    lam_small = solve_eigs(assemble_fdm(square, None, h=1 / 24), 1,
                           seed=0).eigenvalues[0]
    lam_big = solve_eigs(assemble_fdm(square.scaled(1.25), None, h=1 / 24),
                         1, seed=0).eigenvalues[0]
    assert lam_big < lam_small
    # theta modular identity across the branch switch
    import mpmath as mp
    for t in (0.05, 0.2, 0.5):
        small = -0.5 + float(mp.jtheta(3, 0, mp.exp(-1 / mp.mpf(t)))) \
            / (2 * math.sqrt(math.pi * t))
        assert rect_theta_factor(t) == pytest.approx(small, abs=1e-12)
    # Weyl ratio tends to 1
    assert weyl_ratio(analytic_spectrum(square, 20000), 20000) \
        == pytest.approx(1.0, abs=0.02)
    # Stokes consistency of the quadrature rules
    sigma = ScalarField("0.2*x*y + 0.1*x**2")
    interior = interior_integral(
        square, lambda x, y: sigma(x, y) * sigma.pos_laplacian(x, y))
    boundary = boundary_integral(
        square, lambda x, y, nx, ny, k:
        sigma(x, y) * sigma.normal_derivative(x, y, nx, ny))
    energy = interior_integral(square, lambda x, y: sigma.grad_sq(x, y))
    assert interior + boundary == pytest.approx(energy, abs=1e-8)
    # Bessel three-term recurrence
    for nu, x in ((1.0, 3.0), (2.5, 10.0), (4 / 3, 7.0)):
        lhs = bessel_j(nu - 1, x) + bessel_j(nu + 1, x)
        assert lhs == pytest.approx(2 * nu / x * bessel_j(nu, x), abs=1e-10)
    # corner term monotonicity
    assert np.all(np.diff(corner_term(np.geomspace(0.1, 10, 50))) < 0)
