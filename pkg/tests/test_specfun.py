"""
Tests for the Hermite, Jacobi and sphere-harmonic special functions
"""
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import special

from eigenrand import specfun
from eigenrand.constants import get_constants
from eigenrand.errors import DomainError
from eigenrand.measure import line_rule


class TestHermite:
    def test_low_degrees_match_hand_values(self):
        x = np.array([-1.5, 0.0, 0.7, 2.0])
        gauss = np.exp(-0.5 * x * x) * math.pi ** -0.25
        assert_allclose(specfun.hermite_h(0, x), gauss, rtol=1e-14)
        assert_allclose(specfun.hermite_h(1, x), math.sqrt(2.0) * x * gauss, rtol=1e-14)
        assert_allclose(specfun.hermite_h(2, x), (2 * x * x - 1) / math.sqrt(2.0) * gauss, atol=1e-15)

    def test_scalar_in_scalar_out(self):
        value = specfun.hermite_h(4, 0.3)
        assert isinstance(value, float)

    @pytest.mark.parametrize("k", [0, 1, 5, 50, 250, 500])
    def test_origin_closed_form(self, k):
        assert_allclose(specfun.hermite_h(2 * k, 0.0), specfun.hermite_zero(k), rtol=1e-10)
        assert specfun.hermite_h(2 * k + 1, 0.0) == 0.0

    def test_table_matches_scipy_where_scipy_is_stable(self):
        x = np.linspace(-4.0, 4.0, 41)
        table = specfun.hermite_table(20, x)
        for n in (0, 3, 12, 20):
            norm = math.sqrt(2.0 ** n * math.factorial(n) * math.sqrt(math.pi))
            expected = special.eval_hermite(n, x) * np.exp(-0.5 * x * x) / norm
            assert_allclose(table[n], expected, rtol=1e-9, atol=1e-14)

    def test_high_degree_against_mpmath(self):
        mpmath = pytest.importorskip("mpmath")
        mpmath.mp.dps = 40
        n, x = 300, 11.25
        exact = mpmath.hermite(n, x) * mpmath.exp(-x * x / 2) / mpmath.sqrt(
            2 ** n * mpmath.factorial(n) * mpmath.sqrt(mpmath.pi)
        )
        assert_allclose(specfun.hermite_h(n, x), float(exact), rtol=1e-8, atol=1e-11)

    def test_far_tail_underflows_to_zero_not_nan(self):
        values = specfun.hermite_table(10, np.array([60.0, -80.0]))
        assert np.all(np.isfinite(values))

    def test_gram_matrix_is_identity(self):
        rule = line_rule(-14.0, 14.0, 56)
        table = specfun.hermite_table(30, rule.coords["x"])
        gram = (table * rule.weights) @ table.T
        assert_allclose(gram, np.eye(31), atol=1e-10)

    @pytest.mark.parametrize("n", [0, 1, 10, 100, 400])
    def test_envelope_holds(self, n):
        x = np.linspace(0.0, 3.0 * math.sqrt(2 * n + 1) + 5.0, 600)
        assert specfun.hermite_envelope_ok(n, x).all()

    def test_negative_degree_rejected(self):
        with pytest.raises(DomainError):
            specfun.hermite_table(-1, 0.0)
        with pytest.raises(DomainError):
            specfun.hermite_zero(-2)


class TestOscillatoryMainTerm:
    def test_phi_endpoints(self):
        assert specfun.phi_fn(0.0) == 0.0
        assert_allclose(specfun.phi_fn(1.0), math.pi / 4.0)
        values = specfun.phi_fn(np.linspace(0.0, 1.0, 50))
        assert np.all(np.diff(values) > 0)

    def test_phi_outside_unit_interval(self):
        with pytest.raises(DomainError):
            specfun.phi_fn(1.5)

    @pytest.mark.parametrize("n", [20, 100, 300])
    def test_main_term_tracks_hermite(self, n):
        big_n = 2 * n + 1
        x = np.linspace(0.0, 0.5 * math.sqrt(big_n), 200)
        error = np.abs(specfun.hermite_h(n, x) - specfun.muckenhoupt_main(n, x))
        bound = get_constants().specfun.muckenhoupt_C * math.sqrt(big_n) * (big_n - x * x) ** -1.75
        assert np.all(error <= bound)

    def test_main_term_refuses_turning_region(self):
        n = 50
        with pytest.raises(DomainError):
            specfun.muckenhoupt_main(n, math.sqrt(2 * n + 1))


class TestJacobi:
    @pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0, 2.5])
    def test_matches_scipy(self, alpha):
        x = np.linspace(-1.0, 1.0, 31)
        for n in (0, 1, 7, 25):
            assert_allclose(specfun.jacobi_p(n, alpha, x), special.eval_jacobi(n, alpha, alpha, x), rtol=1e-10,
                            atol=1e-12)

    def test_value_at_one(self):
        for n in (1, 4, 30):
            assert_allclose(specfun.jacobi_p(n, 0.5, 1.0), specfun.jacobi_at_one(n, 0.5), rtol=1e-12)

    def test_invalid_parameter(self):
        with pytest.raises(DomainError):
            specfun.jacobi_table(3, -1.0, 0.0)

    def test_band_constant_keeps_half_the_peak(self):
        alpha, n_max = 0.5, 40
        c = specfun.jacobi_band_constant(alpha, n_max)
        assert 0.1 < c <= math.pi / 2.0
        for n in (1, 10, 40):
            theta = np.linspace(0.0, c / n, 50)
            values = specfun.jacobi_p(n, alpha, np.cos(theta))
            assert np.all(values >= 0.5 * specfun.jacobi_at_one(n, alpha) * (1 - 1e-9))

    def test_legendre_band_constant_bounded_by_first_degree(self):
        # P_1(cos θ) = cos θ drops below 1/2 at θ = π/3
        assert specfun.jacobi_band_constant(0.0, 10) <= math.pi / 3.0 + 1e-9


class TestSphereHarmonics:
    def test_y_constant_for_circle_case(self):
        # d = 2, n = 0: Y_0 is the constant 1/√(4π)
        assert_allclose(specfun.y_norm_const(2, 0), 1.0 / math.sqrt(4.0 * math.pi), rtol=1e-12)

    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_y_l2_closed_form_is_one(self, d):
        for n in (0, 1, 9, 64):
            assert_allclose(specfun.y_lp_closed_form(d, n, 2.0), 1.0, rtol=1e-12)

    def test_y_modulus_and_phase(self):
        rho, theta = np.array([0.3, 0.9]), np.array([0.1, 2.0])
        y = specfun.highest_weight_y(3, 4, rho, theta)
        assert_allclose(np.abs(y), specfun.y_abs(3, 4, rho), rtol=1e-14)
        assert_allclose(np.angle(y), np.angle(np.exp(4j * theta)), atol=1e-12)

    def test_zonal_norm_for_legendre(self):
        # d = 2: ‖√n P_n‖² = n · 2π · 2/(2n + 1)
        for n in (1, 5, 40):
            assert_allclose(specfun.zonal_norm_sq(2, n), 4.0 * math.pi * n / (2 * n + 1), rtol=1e-12)

    def test_zonal_peak(self):
        assert_allclose(specfun.zonal_z(3, 6, 0.0), math.sqrt(6) * specfun.jacobi_at_one(6, 0.5), rtol=1e-12)

    def test_zonal_needs_positive_degree(self):
        with pytest.raises(DomainError):
            specfun.zonal_z(2, 0, 0.0)
        with pytest.raises(DomainError):
            specfun.y_norm_const(1, 3)
