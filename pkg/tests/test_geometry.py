import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectral_corner import (MetricSpec, ScalarField, SpecError,
                             boundary_integral, build_domain,
                             conformal_transform, corner_term,
                             geometric_coefficients, interior_integral,
                             load_domain)

from .conftest import SLIT_SQUARE_DOC, make_sector, riemann_interior


class TestCornerTerm:
    def test_reference_values(self):
        assert corner_term(1.0) == 0.0
        assert corner_term(0.5) == pytest.approx(1.0 / 16)
        assert corner_term(2.0) == pytest.approx(-1.0 / 16)

    def test_strictly_decreasing_on_grid(self):
        alphas = np.geomspace(0.05, 50.0, 200)
        vals = corner_term(alphas)
        assert np.all(np.diff(vals) < 0)

    @settings(max_examples=40, deadline=None)
    @given(a=st.floats(0.05, 20.0), b=st.floats(0.05, 20.0))
    def test_strictly_decreasing_pairwise(self, a, b):
        if a == b:
            return
        lo, hi = min(a, b), max(a, b)
        assert corner_term(lo) > corner_term(hi)


class TestBuildDomain:
    def test_rectangle_and_disk_measures(self, square, disk):
        assert square.area == pytest.approx(1.0)
        assert square.perimeter == pytest.approx(4.0)
        assert len(square.corners) == 4
        assert all(c.alpha == pytest.approx(0.5) for c in square.corners)
        assert disk.area == pytest.approx(math.pi)
        assert disk.perimeter == pytest.approx(2 * math.pi)
        assert disk.corners == []

    def test_sector_measures(self):
        s = make_sector(3.0)
        assert s.area == pytest.approx(3 * math.pi / 2)
        assert s.perimeter == pytest.approx(2 + 3 * math.pi)
        assert sorted(c.alpha for c in s.corners) == pytest.approx([0.5, 0.5, 3.0])

    def test_l_shape_angles(self):
        verts = [[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]]
        dom = build_domain({"kind": "polygon", "params": {"vertices": verts}})
        assert dom.area == pytest.approx(3.0)
        alphas = sorted(c.alpha for c in dom.corners)
        assert alphas == pytest.approx([0.5] * 5 + [1.5])

    def test_slit_square_bookkeeping(self, slit_square):
        assert slit_square.area == pytest.approx(1.0)
        # both prime-end sides of the slit count toward the perimeter
        assert slit_square.perimeter == pytest.approx(5.0)
        alphas = sorted(c.alpha for c in slit_square.corners)
        assert alphas == pytest.approx([0.5] * 6 + [2.0])

    def test_slanted_slit_mouth_angles_sum_to_one(self):
        doc = {
            "kind": "slit-polygon",
            "params": {
                "vertices": [[0, 0], [1, 0], [1, 1], [0, 1]],
                "slits": [[[0.4, 0.0], [0.6, 0.4]]],
            },
        }
        dom = build_domain(doc)
        mouths = [c.alpha for c in dom.corners
                  if np.allclose(c.location, (0.4, 0.0))]
        assert len(mouths) == 2
        assert sum(mouths) == pytest.approx(1.0, abs=1e-12)

    def test_invalid_specs_rejected(self):
        with pytest.raises(SpecError):
            build_domain({"kind": "pentagon", "params": {}})
        with pytest.raises(SpecError):
            build_domain({"kind": "rectangle", "params": {"a": -1.0, "b": 1.0}})
        with pytest.raises(SpecError):  # self-intersecting
            build_domain({"kind": "polygon", "params": {
                "vertices": [[0, 0], [1, 1], [1, 0], [0, 1]]}})
        with pytest.raises(SpecError):  # slit mouth floats in the interior
            build_domain({"kind": "slit-polygon", "params": {
                "vertices": [[0, 0], [1, 0], [1, 1], [0, 1]],
                "slits": [[[0.5, 0.2], [0.5, 0.6]]]}})

    def test_containment(self, square, slit_square):
        pts = np.array([[0.5, 0.5], [1.5, 0.5], [0.0, 0.0]])
        np.testing.assert_array_equal(square.contains(pts),
                                      [True, False, False])
        assert slit_square.contains(np.array([[0.25, 0.25]]))[0]

    def test_load_domain_with_field(self):
        doc = dict(SLIT_SQUARE_DOC)
        doc = {**doc, "sigma": "0.1*x"}
        dom, sigma = load_domain(doc)
        assert dom.kind == "slit-polygon"
        assert sigma(1.0, 0.0) == pytest.approx(0.1)


class TestIntegrals:
    def test_boundary_measures(self, square, disk):
        assert boundary_integral(square, lambda x, y, nx, ny, k: 1.0 + 0 * x) \
            == pytest.approx(4.0)
        assert boundary_integral(disk, lambda x, y, nx, ny, k: 1.0 + 0 * x) \
            == pytest.approx(2 * math.pi)
        # total geodesic curvature of the circle
        assert boundary_integral(disk, lambda x, y, nx, ny, k: k) \
            == pytest.approx(2 * math.pi)

    def test_divergence_theorem_normals(self, square, disk):
        for dom in (square, disk):
            flux = boundary_integral(dom, lambda x, y, nx, ny, k: x * nx + y * ny)
            assert flux == pytest.approx(2 * dom.area, abs=1e-9)

    def test_interior_closed_forms(self, square, disk):
        assert interior_integral(square, lambda x, y: x * y) == pytest.approx(0.25)
        assert interior_integral(disk, lambda x, y: 1.0 + 0 * x) \
            == pytest.approx(math.pi)
        assert interior_integral(disk, lambda x, y: x * x) \
            == pytest.approx(math.pi / 4)

    def test_polygon_interior_vs_riemann(self):
        verts = [[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]]
        dom = build_domain({"kind": "polygon", "params": {"vertices": verts}})
        got = interior_integral(dom, lambda x, y: np.exp(x - y))
        ref = riemann_interior(dom, lambda x, y: np.exp(x - y), n=1200)
        assert got == pytest.approx(ref, rel=1e-3)


class TestGeometricCoefficients:
    def test_square_flat(self, square):
        c = geometric_coefficients(square)
        assert c.a_m1 == pytest.approx(1 / (4 * math.pi))
        assert c.a_mhalf == pytest.approx(-4 / (8 * math.sqrt(math.pi)))
        assert c.a_0 == pytest.approx(0.25)

    def test_disk_flat(self, disk):
        c = geometric_coefficients(disk)
        assert c.a_0 == pytest.approx(1.0 / 6, abs=1e-10)

    def test_sector_constant_term(self):
        for alpha in (0.5, 1.5, 3.0):
            c = geometric_coefficients(make_sector(alpha))
            expected = alpha / 12 + 1.0 / 8 + float(corner_term(alpha))
            assert c.a_0 == pytest.approx(expected, abs=1e-10)

    def test_slit_square_constant_term(self, slit_square):
        c = geometric_coefficients(slit_square)
        assert c.a_0 == pytest.approx(5.0 / 16, abs=1e-10)
        assert c.a_mhalf == pytest.approx(-5 / (8 * math.sqrt(math.pi)))

    def test_unit_weight_reproduces_measures(self, slit_square):
        c = geometric_coefficients(slit_square)
        assert c.a_m1 == pytest.approx(slit_square.area / (4 * math.pi))
        assert c.a_mhalf == pytest.approx(
            -slit_square.perimeter / (8 * math.sqrt(math.pi)))

    @settings(max_examples=15, deadline=None)
    @given(r=st.floats(0.3, 3.0))
    def test_dilation_scaling(self, square, r):
        base = geometric_coefficients(square)
        scaled = geometric_coefficients(square.scaled(r))
        assert scaled.a_m1 == pytest.approx(r ** 2 * base.a_m1, rel=1e-12)
        assert scaled.a_mhalf == pytest.approx(r * base.a_mhalf, rel=1e-12)
        assert scaled.a_0 == pytest.approx(base.a_0, rel=1e-12)

    def test_weighted_volume_vs_riemann(self, square):
        sigma = ScalarField("0.2*x*y")
        metric = MetricSpec(sigma, 1.0)
        c = geometric_coefficients(square, metric)
        vol = riemann_interior(square, lambda x, y: np.exp(0.4 * x * y), n=1000)
        assert c.a_m1 == pytest.approx(vol / (4 * math.pi), rel=1e-6)

    def test_weighted_a0_vs_riemann(self, square):
        sigma = ScalarField("0.1*(x**2 - y) + 0.05*x*y")
        u = 1.0
        c = geometric_coefficients(square, MetricSpec(sigma, u))
        # interior curvature density is u * (-(sigma_xx + sigma_yy)) = -0.2 u
        interior = -0.2 * u * square.area
        # boundary curvature shift: int u d_n sigma over the four edges,
        # with sigma_x = 0.2x + 0.05y and sigma_y = -0.1 + 0.05x
        xs = np.linspace(0, 1, 20001)
        dn = np.trapezoid(0.1 - 0.05 * xs, xs)       # bottom, n = (0,-1)
        dn += np.trapezoid(0.2 + 0.05 * xs, xs)      # right,  n = (1,0)
        dn += np.trapezoid(-0.1 + 0.05 * xs, xs)     # top,    n = (0,1)
        dn += np.trapezoid(-0.05 * xs, xs)           # left,   n = (-1,0)
        corners = sum(float(corner_term(c2.alpha)) for c2 in square.corners)
        expected = (interior + u * dn) / (12 * math.pi) + corners
        assert c.a_0 == pytest.approx(expected, abs=1e-8)
        # Gauss consistency: the two curvature pieces cancel exactly here
        assert interior + dn == pytest.approx(0.0, abs=1e-8)


class TestConformalTransform:
    def test_volume_and_length_vs_riemann(self, square):
        sigma = ScalarField("0.2*x*y")
        data = conformal_transform(square, MetricSpec(sigma, 1.0))
        vol = riemann_interior(square, lambda x, y: np.exp(0.4 * x * y), n=1000)
        assert data.volume == pytest.approx(vol, rel=1e-6)
        xs = np.linspace(0, 1, 200001)
        per = 2.0 + 2 * np.trapezoid(np.exp(0.2 * xs), xs)
        assert data.boundary_length == pytest.approx(per, rel=1e-8)

    def test_flat_limit(self, square):
        data = conformal_transform(square, MetricSpec(ScalarField("x*y"), 0.0))
        assert data.volume == pytest.approx(square.area)
        assert data.boundary_length == pytest.approx(square.perimeter)
        assert data.curvature_density(0.3, 0.7) == pytest.approx(0.0)
