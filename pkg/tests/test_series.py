"""
Tests for randomized eigenfunction series
"""
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from eigenrand import randmat, series, spectral
from eigenrand.errors import DomainError
from eigenrand.measure import lp_norm


def torus_spec(N=8, ensemble="haar-o"):
    family = spectral.TorusFourier()
    return series.RandomSeriesSpec.from_level_norms(
        family, series.default_level_norms(family, N), randmat.parse_ensemble(ensemble)
    )


class TestRandomSeriesSpec:
    def test_level_norms_round_trip(self):
        family = spectral.HermiteOscillator(2)
        spec = series.RandomSeriesSpec.from_level_norms(family, [1.0, 0.5, 2.0], randmat.Identity())
        assert spec.N == 2
        assert_allclose(spec.level_norms(), [1.0, 0.5, 2.0])
        assert spec.l2_norm() == pytest.approx(math.sqrt(1.0 + 0.25 + 4.0))
        assert [v.size for v in spec.coefficients] == [1, 2, 3]

    def test_wrong_level_size(self):
        with pytest.raises(DomainError):
            series.RandomSeriesSpec(spectral.HermiteOscillator(2), [np.ones(1), np.ones(3)], randmat.Identity())

    def test_non_finite_coefficients(self):
        with pytest.raises(DomainError):
            series.RandomSeriesSpec(spectral.TorusFourier(), [np.array([np.inf])], randmat.Identity())

    def test_empty_series(self):
        with pytest.raises(DomainError):
            series.RandomSeriesSpec(spectral.TorusFourier(), [], randmat.Identity())

    def test_oscillator_level_cap(self):
        family = spectral.HermiteOscillator(1)
        with pytest.raises(DomainError):
            series.RandomSeriesSpec.from_level_norms(family, np.ones(series.MAX_HERMITE_LEVEL + 2), randmat.Identity())

    def test_default_profile(self):
        family = spectral.SphereZonal(2)
        assert_allclose(series.default_level_norms(family, 3), [2 ** -0.5, 3 ** -0.5, 4 ** -0.5])


class TestSampling:
    def test_identity_reproduces_the_deterministic_function(self, rng):
        family = spectral.SphereHighest(3)
        spec = series.RandomSeriesSpec.from_level_norms(family, [1.0, 0.3, 0.2], randmat.Identity())
        rule = spec.grid()
        sampled = series.sample_series(spec, rng)
        assert_allclose(sampled.values, family.synthesize(spec.coefficients, rule))

    @pytest.mark.parametrize("ensemble", ["haar-o", "haar-u", "iid-rademacher"])
    def test_unimodular_multipliers_keep_the_torus_l2_norm(self, ensemble, rng):
        spec = torus_spec(ensemble=ensemble)
        sampled = series.sample_series(spec, rng)
        assert lp_norm(sampled, 2.0) == pytest.approx(spec.l2_norm(), rel=1e-12)

    def test_orthogonal_levels_keep_the_oscillator_l2_norm(self, rng):
        family = spectral.HermiteOscillator(2)
        spec = series.RandomSeriesSpec.from_level_norms(family, [0.5, 1.0, 0.7, 0.2], randmat.HaarOrthogonal())
        sampled = series.sample_series(spec, rng)
        assert lp_norm(sampled, 2.0) == pytest.approx(spec.l2_norm(), rel=1e-8)

    def test_second_moment_of_an_orthogonal_torus_series_is_exact(self):
        spec = torus_spec()
        estimate = series.mc_lp_moment(spec, 2.0, samples=64, seed=1)
        assert estimate.mean == pytest.approx(spec.l2_norm(), rel=1e-12)

    def test_moment_sample_floor(self):
        with pytest.raises(DomainError):
            series.mc_lp_moment(torus_spec(), 4.0, samples=10)
        with pytest.raises(DomainError):
            series.kkmp_ratio(torus_spec(), 4.0, samples=50)

    def test_moment_is_thread_independent(self):
        spec = torus_spec(ensemble="iid-gaussian")
        one = series.mc_lp_moment(spec, 4.0, samples=96, seed=3, threads=1)
        many = series.mc_lp_moment(spec, 4.0, samples=96, seed=3, threads=4)
        assert one.mean == many.mean and one.stderr == many.stderr

    def test_kkmp_ratio(self):
        ratio = series.kkmp_ratio(torus_spec(N=16, ensemble="iid-rademacher"), 4.0, samples=200, seed=4)
        assert 1.0 <= ratio.value <= 2.0


class TestUniversality:
    def test_torus_ratios_inside_the_band(self):
        spec = torus_spec(N=8)
        ensembles = series.ensembles_from_names(["haar-o", "iid-gaussian"])
        table = series.universality_ratio(spec, 4.0, ensembles, samples=100, seed=5)
        assert [row.ensemble for row in table.rows] == ["haar-o", "iid-gaussian"]
        assert table.spread >= 1.0
        assert table.passed
        assert all(row.note == series.ALMOST_SURE_NOTE for row in table.rows)
        assert all(row.deterministic == pytest.approx(spec.l2_norm(), rel=1e-6) for row in table.rows)

    def test_heavy_tails_fail_the_moment_hypothesis(self):
        with pytest.raises(DomainError):
            series.universality_ratio(torus_spec(), 4.0, [randmat.parse_ensemble("iid-heavytail3")], samples=100)

    def test_rows_serialise_with_the_pass_alias(self):
        table = series.universality_ratio(torus_spec(N=4), 2.0, [randmat.HaarOrthogonal()], samples=60, seed=6)
        dumped = table.rows[0].model_dump(by_alias=True)
        assert "pass" in dumped and "passed" not in dumped


class TestContractionAndTraceForms:
    def test_scaled_haar_is_tight(self):
        result = series.contraction_check(torus_spec(N=6), 3.0, ensemble=randmat.parse_ensemble("2xhaar-o"),
                                          samples=100, seed=7)
        assert result.c == pytest.approx(2.0, rel=1e-10)
        assert result.lhs == pytest.approx(result.rhs, rel=1e-12)
        assert result.passed

    def test_trace_form_is_the_rotated_synthesis(self, rng):
        d = 4
        m = randmat.sample(randmat.HaarOrthogonal(), d, rng)
        c = rng.standard_normal(d)
        phi = rng.standard_normal((d, 9))
        assert_allclose(series.trace_form(m, c, phi), (m @ c) @ phi, atol=1e-12)

    def test_trace_form_shapes(self, rng):
        with pytest.raises(DomainError):
            series.trace_form(np.eye(3), np.ones(2), np.ones((2, 5)))

    def test_hilbert_schmidt_identity(self, rng):
        matrices = [rng.standard_normal((2, 2)), rng.standard_normal((3, 3))]
        result = series.hs_identity_check(matrices, samples=6000, seed=8)
        assert result.target == pytest.approx(sum(np.sum(a * a) for a in matrices))
        assert result.estimate.within(result.target, zscore=4.0)

    def test_hilbert_schmidt_needs_square_levels(self):
        with pytest.raises(DomainError):
            series.hs_identity_check([np.ones((2, 3))], samples=100)


class TestTorusAndHeavyTails:
    def test_salem_zygmund_sup(self):
        result = series.torus_salem_zygmund(32, samples=100, seed=9)
        assert result.grid_size == 512
        assert result.min_sup >= math.sqrt(32) * (1 - 1e-12)
        assert 0.5 < result.estimate.mean < 3.0
        assert result.flags == []

    def test_salem_zygmund_degenerate_degree(self):
        result = series.torus_salem_zygmund(1, samples=20, seed=0)
        assert "zero-denominator" in result.flags
        assert result.estimate.mean == pytest.approx(1.0)

    def test_salem_zygmund_grid_floor(self):
        with pytest.raises(DomainError):
            series.torus_salem_zygmund(8, samples=20, grid_size=64)

    def test_rademacher_trajectories_are_deterministic(self):
        rows = series.heavytail_divergence_demo(3.0, [100, 10, 1000], seed=0, trajectories=5, law="rademacher")
        peak = 1.0 / (2.0 ** (1.0 / 3.0) * math.log(2.0) ** (2.0 / 3.0))
        assert [row.N for row in rows] == [10, 100, 1000]
        assert all(row.running_max == pytest.approx(peak) for row in rows)
        assert rows[-1].median_window_max < rows[0].median_window_max

    def test_heavytail_running_max_is_monotone(self):
        rows = series.heavytail_divergence_demo(3.0, [100, 1000, 10000, 100000], seed=10, trajectories=20)
        maxima = [row.running_max for row in rows]
        assert maxima == sorted(maxima)
        assert all(row.median_window_max >= 0.0 for row in rows)

    def test_divergence_arguments(self):
        with pytest.raises(DomainError):
            series.heavytail_divergence_demo(1.5, [10])
        with pytest.raises(DomainError):
            series.heavytail_divergence_demo(3.0, [1])
        with pytest.raises(DomainError):
            series.heavytail_divergence_demo(3.0, [10], law="cauchy")
