import numpy as np
import pytest

from axisiga.geometry import quarter_annulus, rectangle
from axisiga.quadrature import (
    ElementRule2D,
    QuadratureError,
    build_element_rule,
    gauss_legendre,
)


class TestGaussLegendre:
    def test_single_point(self):
        r = gauss_legendre(1)
        assert r.nodes == pytest.approx([0.0])
        assert r.weights == pytest.approx([2.0])

    def test_two_points_closed_form(self):
        r = gauss_legendre(2)
        assert r.nodes == pytest.approx([-1 / np.sqrt(3), 1 / np.sqrt(3)],
                                        abs=1e-15)
        assert r.weights == pytest.approx([1.0, 1.0], abs=1e-15)

    @pytest.mark.parametrize("n", range(1, 31))
    def test_weight_sum_and_symmetry(self, n):
        r = gauss_legendre(n)
        assert r.weights.sum() == pytest.approx(2.0, abs=1e-14)
        assert np.all(r.weights > 0)
        assert r.nodes == pytest.approx(-r.nodes[::-1], abs=1e-15)

    @pytest.mark.parametrize("n", range(1, 31))
    def test_matches_reference_implementation(self, n):
        x_ref, w_ref = np.polynomial.legendre.leggauss(n)
        r = gauss_legendre(n)
        assert r.nodes == pytest.approx(x_ref, abs=1e-13)
        assert r.weights == pytest.approx(w_ref, abs=1e-13)

    @pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 13, 21, 30])
    def test_monomial_exactness_boundary(self, n):
        r = gauss_legendre(n)
        # exact for degree 2n-1 (odd: zero) and 2n-2
        for deg in (2 * n - 1, 2 * n - 2):
            exact = 0.0 if deg % 2 else 2.0 / (deg + 1)
            assert np.sum(r.weights * r.nodes**deg) == pytest.approx(
                exact, abs=1e-13)
        # NOT exact for degree 2n (the analytic Gauss error shrinks
        # factorially with n, so only small orders show it above roundoff)
        if n <= 13:
            deg = 2 * n
            err = abs(np.sum(r.weights * r.nodes**deg) - 2.0 / (deg + 1))
            assert err > 1e-10

    def test_order_out_of_range(self):
        with pytest.raises(QuadratureError):
            gauss_legendre(0)
        with pytest.raises(QuadratureError):
            gauss_legendre(31)

    def test_mapped_interval(self):
        x, w = gauss_legendre(4).mapped(0.25, 0.75)
        assert np.all((x > 0.25) & (x < 0.75))
        assert w.sum() == pytest.approx(0.5)
        assert np.sum(w * x**3) == pytest.approx(
            (0.75**4 - 0.25**4) / 4, abs=1e-15)


class TestElementRule:
    def test_unit_square_rho_weight(self):
        geo = rectangle(0, 1, 0, 1)
        r = build_element_rule(geo, ((0, 1), (0, 1)), 3)
        assert isinstance(r, ElementRule2D)
        # integral of rho over the unit square
        assert r.weights.sum() == pytest.approx(0.5, abs=1e-14)

    def test_polynomial_integral(self):
        geo = rectangle(0, 1, 0, 1)
        r = build_element_rule(geo, ((0, 1), (0, 1)), 3)
        rho, z = r.phys_points.T
        # integral rho^3 z^2 drho dz = 1/12 (weights already include one rho)
        val = np.sum(r.weights * rho**2 * z**2)
        assert val == pytest.approx(1.0 / 12.0, abs=1e-14)

    def test_axis_element_weights_finite(self):
        geo = rectangle(0, 1, 0, 1)
        r = build_element_rule(geo, ((0, 0.25), (0, 1)), 4)
        assert np.all(np.isfinite(r.weights))
        assert np.all(r.weights >= 0)

    @pytest.mark.parametrize("a,b", [(0, 1), (1, 2), (3, 4)])
    def test_affine_tensor_exactness(self, a, b):
        # with n points: rho^i z^j exact for i+1, j <= 2n-1
        n = 3
        geo = rectangle(1, 2, float(a), float(b))
        r = build_element_rule(geo, ((0, 1), (0, 1)), n)
        rho, z = r.phys_points.T
        for i in range(2 * n - 2):
            for j in range(2 * n):
                val = np.sum(r.weights * rho**i * z**j)
                exact = ((2.0 ** (i + 2) - 1.0) / (i + 2)
                         * (float(b) ** (j + 1) - float(a) ** (j + 1)) / (j + 1))
                assert val == pytest.approx(exact, rel=1e-13)

    def test_curved_geometry_area(self):
        # area integral of rho over the quarter annulus, rho = x-coordinate:
        # int rho dA = int_1^2 int_0^{pi/2} (r cos t) r dt dr = 7/3
        # rational integrand, so high-order Gauss converges but is not exact
        geo = quarter_annulus(1.0, 2.0)
        total = 0.0
        for elem in geo.elements():
            total += build_element_rule(geo, elem, 16).weights.sum()
        assert total == pytest.approx(7.0 / 3.0, rel=1e-9)
