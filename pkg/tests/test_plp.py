"""
Tests for PL^p norms, membership rules, interpolation defects and embeddings
"""
import csv
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from eigenrand import plp, spectral
from eigenrand.constants import get_constants
from eigenrand.errors import DivergenceWarning, DomainError
from eigenrand.measure import SampledFunction, line_rule, torus_rule
from eigenrand.plp import FiniteSeq, GeometricSeq, PowerLogSeq
from eigenrand.specfun import y_lp_closed_form


@pytest.fixture
def gaussian():
    rule = line_rule(-8.0, 8.0, 32)
    return SampledFunction.from_callable(rule, lambda x: np.exp(-x * x))


class TestSequences:
    def test_finite_sequence_values(self):
        seq = FiniteSeq([0.5, 0.0, 2.0], start=1)
        assert seq.support_end == 3
        assert_allclose(seq.values(np.arange(0, 6)), [0.0, 0.5, 0.0, 2.0, 0.0, 0.0])

    def test_negative_norms_rejected(self):
        with pytest.raises(DomainError):
            FiniteSeq([1.0, -0.1])

    def test_lacunary_support(self):
        seq = PowerLogSeq(sigma=0.0, lacunary=True)
        assert_allclose(seq.values(np.arange(1, 9)), [1, 1, 0, 1, 0, 0, 0, 1])

    def test_log_factor_needs_start_two(self):
        with pytest.raises(DomainError):
            PowerLogSeq(sigma=0.5, tau=1.0, start=1)
        with pytest.raises(DomainError):
            GeometricSeq(1.5)

    def test_truncation(self):
        truncated = PowerLogSeq(sigma=1.0).truncate(4)
        assert truncated.support_end == 4
        assert_allclose(truncated.values(np.arange(0, 5)), [0.0, 1.0, 0.5, 1.0 / 3.0, 0.25])


class TestMembership:
    def test_torus_is_l2(self):
        torus = spectral.TorusFourier()
        assert plp.plp_membership(torus, PowerLogSeq(0.6), 10.0)
        assert not plp.plp_membership(torus, PowerLogSeq(0.5), 3.0)
        assert plp.plp_membership(torus, PowerLogSeq(0.5, tau=0.6, start=2), 3.0)

    def test_highest_weight_threshold(self):
        # Σ n^{-3/2}(Σ k^{1/2} a_k²)^{p/2} with a_k = k^{-σ} converges iff σ > 3/4 − 1/(2p)
        family = spectral.SphereHighest(2)
        assert plp.plp_membership(family, PowerLogSeq(0.7), 6.0)
        assert not plp.plp_membership(family, PowerLogSeq(0.6), 6.0)
        assert plp.plp_membership(family, GeometricSeq(0.5), 100.0)

    def test_zonal_below_the_critical_exponent_is_l2(self):
        family = spectral.SphereZonal(2)
        assert plp.plp_membership(family, PowerLogSeq(0.55), 4.0)
        assert not plp.plp_membership(family, PowerLogSeq(0.55), 6.0)

    def test_oscillator_inclusions_run_upwards(self):
        family = spectral.HermiteOscillator(2)
        seq = PowerLogSeq(0.25)
        assert not plp.plp_membership(family, seq, 3.0)
        assert plp.plp_membership(family, seq, 5.0)

    @pytest.mark.parametrize(
        "family,seq,expected",
        [
            (spectral.SphereHighest(2), PowerLogSeq(0.7), 10.0),
            (spectral.SphereZonal(2), PowerLogSeq(0.8), 10.0),
            (spectral.HermiteOscillator(2), PowerLogSeq(0.25), 4.0),
        ],
    )
    def test_critical_exponents(self, family, seq, expected):
        assert plp.critical_exponent(family, seq) == pytest.approx(expected, abs=1e-2)

    def test_critical_exponent_edges(self):
        assert math.isinf(plp.critical_exponent(spectral.SphereHighest(2), PowerLogSeq(0.8)))
        # 1/(sqrt(n) ln n) is in l^2 and in no PL^p with p > 2
        assert plp.critical_exponent(spectral.SphereHighest(2), PowerLogSeq(0.5, 1.0, start=2)) == 2.0
        with pytest.raises(DomainError):
            plp.critical_exponent(spectral.TorusFourier(), PowerLogSeq(1.0))

    def test_sobolev_membership(self):
        torus = spectral.TorusFourier()
        assert plp.sobolev_membership(torus, PowerLogSeq(1.0), 0.4)
        assert not plp.sobolev_membership(torus, PowerLogSeq(1.0), 0.5)


class TestNorms:
    def test_single_level_matches_the_harmonic_norm(self):
        family = spectral.SphereHighest(2)
        value = plp.plp_norm_quadrature(family, [0.0, 0.0, 1.0], 6.0)
        assert value == pytest.approx(y_lp_closed_form(2, 3, 6.0), rel=1e-6)

    def test_torus_norm_is_the_l2_norm(self):
        norms = [0.3, 1.0, 0.0, 0.2]
        for p in (2.0, 5.0, math.inf):
            assert plp.plp_norm_quadrature(spectral.TorusFourier(), norms, p) == pytest.approx(
                np.linalg.norm(norms), rel=1e-8
            )

    def test_trivial_and_invalid(self):
        assert plp.plp_norm_quadrature(spectral.SphereZonal(2), [0.0, 0.0], 3.0) == 0.0
        with pytest.raises(DomainError):
            plp.plp_norm_quadrature(spectral.SphereZonal(2), [1.0], 0.5)
        with pytest.raises(DomainError):
            plp.plp_norm_quadrature(spectral.SphereZonal(2), [1.0, -1.0], 3.0)

    def test_sobolev_norm(self):
        assert plp.sobolev_norm(spectral.TorusFourier(), [1.0, 1.0], 1.0) == pytest.approx(math.sqrt(13.0))
        assert plp.sobolev_norm(spectral.HermiteOscillator(1), [1.0, 1.0], 1.0) == pytest.approx(math.sqrt(3.0))
        assert plp.sobolev_norm(spectral.TorusFourier(), PowerLogSeq(1.0), 0.0, n_max=2) == pytest.approx(
            math.sqrt(1.25)
        )


class TestClosedForms:
    @pytest.mark.parametrize(
        "name,norms,p,key",
        [
            ("highest", [0.0, 0.0, 1.0], 6.0, "y_band"),
            ("highest", [1.0, 0.5, 0.25, 0.0, 0.3], 4.0, "y_band"),
            ("zonal", [0.2, 1.0, 0.4], 6.0, "z_band"),
            ("hermite", [1.0, 0.0, 0.5, 0.7], 3.0, "hermite_band"),
        ],
    )
    def test_equivalence_ratio_inside_the_band(self, name, norms, p, key):
        band = getattr(get_constants().plp, key)
        row = plp.closed_form_ratio(spectral.make_family(name, 2), norms, p)
        assert row.family == name
        assert band[0] <= row.ratio <= band[1]

    def test_zonal_closed_form_needs_supercritical_p(self):
        with pytest.raises(DomainError):
            plp.z_closed_form([1.0], 4.0, 2)

    def test_non_member_gives_infinity_with_a_warning(self):
        with pytest.warns(DivergenceWarning):
            assert math.isinf(plp.y_closed_form(PowerLogSeq(0.6), 6.0, 2))

    @pytest.mark.parametrize("beta", [0.5, 1.5])
    def test_log_family_closed_form_follows_membership(self, beta):
        d, p = 3, 4.0
        seq = PowerLogSeq(sigma=d * (0.5 - 1.0 / p), tau=beta / p, start=2)
        member = plp.plp_membership(spectral.SphereZonal(d), seq, p)
        assert member == (beta > 1.0)
        if member:
            assert math.isfinite(plp.z_closed_form(seq, p, d))
        else:
            with pytest.warns(DivergenceWarning):
                assert math.isinf(plp.z_closed_form(seq, p, d))

    def test_infinite_member_is_truncated(self):
        full = plp.y_closed_form(GeometricSeq(0.5), 6.0, 2)
        head = plp.y_closed_form(GeometricSeq(0.5).truncate(60).values(np.arange(1, 61)), 6.0, 2)
        assert full == pytest.approx(head, rel=1e-12)

    def test_oscillator_base_level(self):
        assert plp.hermite_closed_form([2.0], 3.0, 2) == pytest.approx(2.0)

    def test_no_closed_form_on_the_torus(self):
        with pytest.raises(DomainError):
            plp.closed_form(spectral.TorusFourier(), [1.0], 4.0)


class TestInterpolation:
    def test_thetas(self):
        theta1, theta2 = plp.thetas(2.0, 4.0, 8.0)
        assert theta1 == pytest.approx(1.0 / 3.0)
        assert theta2 == pytest.approx(2.0 / 3.0)

    def test_constant_on_a_probability_space_has_no_defect(self):
        rule = torus_rule(32)
        phi = SampledFunction(rule, np.full(32, 3.0))
        assert plp.interpolation_defect(phi, 1.5, 6.0) == pytest.approx(1.0, abs=1e-12)

    def test_gaussian_norms(self, gaussian):
        for p in (1.0, 2.0, 5.0):
            assert plp._log_norm(gaussian, p) == pytest.approx(math.log(plp.gaussian_lp_norm(p)), abs=1e-10)

    def test_defect_and_lower_bound(self, gaussian):
        details = plp.interpolation_defect_details(gaussian, 2.0, 8.0)
        assert details.value >= 1.0
        assert 2.0 <= details.argmax <= 8.0
        lower, norm = plp.interpolation_lower_bound(gaussian, 2.0, 8.0, 4.0)
        assert lower <= norm * (1 + 1e-12)

    def test_defect_arguments(self, gaussian):
        with pytest.raises(DomainError):
            plp.interpolation_defect(gaussian, 4.0, 2.0)
        with pytest.raises(DomainError):
            plp.interpolation_defect(SampledFunction(gaussian.rule, np.zeros(gaussian.rule.size)), 2.0, 4.0)

    def test_witness_exponent(self):
        assert plp.witness_exponent(2.0, 2.0) == pytest.approx(2.0)
        with pytest.raises(DomainError):
            plp.witness_exponent(1.5, 1.5)

    def test_holder_witness(self, gaussian):
        result = plp.holder_witness(gaussian, 2.0, 4.0)
        assert result.pairing == pytest.approx(1.0, rel=1e-10)
        assert result.passed()

    def test_conjugate(self):
        assert plp.conjugate(1.0) == math.inf
        assert plp.conjugate(3.0) == pytest.approx(1.5)


class TestDualityAndHypotheses:
    @pytest.mark.parametrize("name", ["highest", "zonal", "hermite"])
    def test_duality_chain(self, name, rng):
        family = spectral.make_family(name, 2)
        u, w = rng.random(5), rng.random(5)
        result = plp.duality_pairing(family, u, w, 3.0)
        assert result.passed
        assert result.pairing <= result.middle <= result.bound * (1 + 1e-8)

    def test_duality_needs_matching_lengths(self):
        with pytest.raises(DomainError):
            plp.duality_pairing(spectral.SphereZonal(2), [1.0], [1.0, 2.0], 3.0)

    def test_hypothesis_report(self):
        report = plp.hypothesis_checks(spectral.HermiteOscillator(2), 3.0, 6)
        assert report.N == 6 and report.p2 == 6.0
        assert report.weak_N <= report.lp_N * (1 + 1e-12)
        assert report.defect_max >= 1.0
        assert isinstance(report.envelope_ok, bool)

    def test_sphere_reports_have_no_envelope(self):
        report = plp.hypothesis_checks(spectral.SphereZonal(2), 3.0, 8)
        assert report.envelope_ok is None
        assert report.product_growth >= 1.0


class TestEmbeddings:
    def test_critical_sobolev_exponents(self):
        assert plp.critical_sobolev_exponent(spectral.SphereHighest(3), 4.0) == pytest.approx(0.25)
        assert plp.critical_sobolev_exponent(spectral.SphereZonal(2), 8.0) == pytest.approx(0.25)
        assert plp.critical_sobolev_exponent(spectral.HermiteOscillator(2), 4.0) == pytest.approx(-0.5)

    @pytest.mark.parametrize("name,d,p", [("highest", 2, 6.0), ("zonal", 2, 6.0), ("hermite", 2, 4.0)])
    def test_sweep_classifies_every_cell(self, name, d, p):
        rows = plp.embedding_sweep(spectral.make_family(name, d), p, n_max=1024, random_instances=10, seed=1)
        assert len(rows) == 10
        assert [row.expected for row in rows[:9]] == ["no-embed"] * 4 + ["embed"] * 5
        assert all(row.passed for row in rows)

    def test_sweep_arguments(self):
        with pytest.raises(DomainError):
            plp.embedding_sweep(spectral.SphereHighest(2), 2.0)
        with pytest.raises(DomainError):
            plp.embedding_sweep(spectral.SphereZonal(2), 4.0)

    def test_sweep_csv(self, tmp_path):
        rows = plp.embedding_sweep(spectral.SphereHighest(2), 6.0, n_max=256)
        path = tmp_path / "sweep.csv"
        plp.write_sweep_csv(rows, str(path))
        with open(path, newline="", encoding="utf-8") as handle:
            reader = list(csv.reader(handle))
        assert tuple(reader[0]) == plp.SWEEP_COLUMNS
        assert len(reader) == len(rows) + 1


def test_shift_counterexample():
    assert plp.r_boundedness_counterexample(4.0, 5) == (pytest.approx(25.0), pytest.approx(5.0))
    assert plp.r_boundedness_counterexample(2.0, 1) == (pytest.approx(1.0), pytest.approx(1.0))
    with pytest.raises(DomainError):
        plp.r_boundedness_counterexample(0.5, 3)
