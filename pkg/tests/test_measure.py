"""
Tests for quadrature rules, adaptive integrals and L^p norms
"""
import math

import numpy as np
import pytest

from eigenrand import measure
from eigenrand.errors import DomainError, QuadratureWarning, TailTruncationWarning
from eigenrand.measure import SampledFunction


class TestAreas:
    def test_known_areas(self):
        assert measure.sphere_area(0) == pytest.approx(2.0)
        assert measure.sphere_area(1) == pytest.approx(2.0 * math.pi)
        assert measure.sphere_area(2) == pytest.approx(4.0 * math.pi)
        assert measure.ball_volume(3) == pytest.approx(4.0 * math.pi / 3.0)

    def test_log_area_matches(self):
        for d in (1, 4, 40):
            assert math.exp(measure.log_sphere_area(d)) == pytest.approx(measure.sphere_area(d), rel=1e-12)


class TestRules:
    @pytest.mark.parametrize("d", [2, 3, 6])
    def test_zonal_and_band_rules_carry_the_sphere_area(self, d):
        assert measure.zonal_rule(d, 8).total() == pytest.approx(measure.sphere_area(d), rel=1e-12)
        assert measure.band_rule(d, 24, theta_points=4).total() == pytest.approx(measure.sphere_area(d), rel=1e-12)

    def test_band_rule_handles_the_circle_endpoint(self):
        # d = 2 has the (1 − t)^{−1/2} endpoint singularity
        rule = measure.band_rule(2, 16, theta_points=1, breakpoints=(0.5,))
        assert rule.total() == pytest.approx(4.0 * math.pi, rel=1e-12)
        assert rule.integrate(rule.coords["rho"] ** 2) == pytest.approx(8.0 * math.pi / 3.0, rel=1e-12)

    def test_repeated_breakpoints_collapse_to_one_edge(self):
        rule = measure.band_rule(2, 16, theta_points=1, breakpoints=(0.5, 0.5))
        assert rule.size == measure.band_rule(2, 16, theta_points=1, breakpoints=(0.5,)).size
        assert rule.total() == pytest.approx(4.0 * math.pi, rel=1e-12)
        assert measure.zonal_rule(2, 8, breakpoints=(1.0, 1.0)).total() == pytest.approx(4.0 * math.pi, rel=1e-12)
        line = measure.line_rule(0.0, 2.0, 4, breakpoints=(0.3, 0.3))
        assert line.integrate((line.coords["x"] > 0.3).astype(float)) == pytest.approx(1.7, rel=1e-14)

    def test_torus_rule_is_a_probability(self):
        rule = measure.torus_rule(64)
        assert rule.total() == pytest.approx(1.0)
        assert abs(rule.integrate(np.cos(3.0 * rule.coords["x"]))) < 1e-14

    def test_breakpoints_are_panel_edges(self):
        rule = measure.line_rule(0.0, 2.0, 4, breakpoints=(0.3,))
        step = (rule.coords["x"] > 0.3).astype(float)
        assert rule.integrate(step) == pytest.approx(1.7, rel=1e-14)

    def test_box_rule_area(self):
        assert measure.box_rule(1.5).total() == pytest.approx(9.0)

    def test_bad_rules(self):
        with pytest.raises(DomainError):
            measure.band_rule(1, 8)
        with pytest.raises(DomainError):
            measure.composite_gauss_legendre([1.0, 0.0], 2)
        rule = measure.torus_rule(8)
        with pytest.raises(DomainError):
            SampledFunction(rule, np.ones(7))
        with pytest.raises(DomainError):
            SampledFunction(rule, np.full(8, np.nan))


class TestAdaptive:
    def test_zonal_integral(self):
        # ∫_{S²} cos²Θ = 4π/3
        value = measure.integrate_zonal(2, lambda theta: np.cos(theta) ** 2)
        assert value == pytest.approx(4.0 * math.pi / 3.0, rel=1e-10)

    def test_band_integral(self):
        # ∫_{S³} ρ² = ∫ (x₁² + x₂²) = 2 μ(S³)/4
        value = measure.integrate_band(3, lambda rho, theta: rho ** 2)
        assert value == pytest.approx(measure.sphere_area(3) / 2.0, rel=1e-10)

    def test_radial_gaussian(self):
        value = measure.integrate_radial(2, lambda r: np.exp(-r * r))
        assert value == pytest.approx(math.pi, rel=1e-10)

    def test_radial_truncation_warns(self):
        with pytest.warns(TailTruncationWarning):
            measure.integrate_radial(2, lambda r: np.exp(-r * r / 100.0), r_max=3.0)

    def test_node_cap_warns(self):
        with pytest.warns(QuadratureWarning):
            measure.integrate_zonal(2, lambda theta: (theta < 1.0).astype(float), rel_tol=1e-14, max_nodes=400)


class TestNorms:
    @pytest.fixture
    def ramp(self):
        rule = measure.line_rule(0.0, 1.0, 8)
        return SampledFunction.from_callable(rule, lambda x: x)

    def test_lp_norm(self, ramp):
        assert measure.lp_norm(ramp, 2.0) == pytest.approx(1.0 / math.sqrt(3.0), rel=1e-12)
        assert measure.lp_norm(ramp, 3.0) == pytest.approx(0.25 ** (1.0 / 3.0), rel=1e-12)
        assert measure.lp_norm(ramp, math.inf) == pytest.approx(ramp.values.max())

    def test_lp_norm_rejects_quasinorms(self, ramp):
        with pytest.raises(DomainError):
            measure.lp_norm(ramp, 0.5)

    def test_rearrangement_is_decreasing(self, ramp):
        cumulative, fstar = measure.decreasing_rearrangement(ramp)
        assert np.all(np.diff(fstar) <= 0)
        assert cumulative[-1] == pytest.approx(1.0)

    def test_weak_norm_below_strong(self, ramp):
        for p in (1.5, 2.0, 4.0):
            assert measure.weak_lp_quasinorm(ramp, p) <= measure.lp_norm(ramp, p) * (1 + 1e-12)

    def test_weak_norm_of_a_step(self):
        # 2·1_{[0, 1/4]} has ‖·‖_{L^{2,∞}} = 2·(1/4)^{1/2} = 1
        rule = measure.line_rule(0.0, 1.0, 8, breakpoints=(0.25,))
        u = SampledFunction.from_callable(rule, lambda x: np.where(x < 0.25, 2.0, 0.0))
        assert measure.weak_lp_quasinorm(u, 2.0) == pytest.approx(1.0, rel=1e-12)

    def test_weak_norm_needs_p_above_one(self, ramp):
        with pytest.raises(DomainError):
            measure.weak_lp_quasinorm(ramp, 1.0)


class TestSphereMonteCarlo:
    def test_integral_of_a_coordinate_square(self):
        estimate = measure.sphere_mc_integral(2, lambda x: x[:, 0] ** 2, samples=20000, seed=5)
        assert estimate.within(4.0 * math.pi / 3.0, zscore=4.0)

    def test_thread_count_does_not_change_the_estimate(self):
        one = measure.sphere_mc_integral(3, lambda x: x[:, 1] ** 4, samples=9000, seed=11, threads=1)
        many = measure.sphere_mc_integral(3, lambda x: x[:, 1] ** 4, samples=9000, seed=11, threads=3)
        assert one.mean == many.mean
        assert one.stderr == many.stderr
