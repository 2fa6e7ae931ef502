"""
Tests for matrix ensembles, entry laws and matrix functionals
"""
import math
import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose

from eigenrand import randmat
from eigenrand.errors import DomainError


class TestEntryLaws:
    def test_heavytail_moments(self):
        assert randmat.heavytail_moment(4.0, 1.0) == pytest.approx(math.exp(-3.0) * (1.0 + 4.0 / 9.0))
        assert math.isinf(randmat.heavytail_moment(4.0, 4.0))
        assert math.isinf(randmat.heavytail_moment(4.0, 5.0))

    def test_heavytail_magnitude_inverts_the_tail(self):
        p = 3.0
        levels = np.array([1e-2, 1e-4, 1e-8, 1e-12]) * math.exp(-p)
        t = randmat.heavytail_magnitude(p, levels)
        assert np.all(t >= math.e)
        assert_allclose(np.log(t) / t ** p, levels, rtol=1e-9)

    def test_heavytail_atom_at_zero(self):
        p = 2.5
        assert np.all(randmat.heavytail_magnitude(p, np.array([0.5, math.exp(-p)])) == 0.0)
        draws = randmat.heavytail_sample(p, np.random.default_rng(3), size=200000)
        hit = math.exp(-p)
        observed = np.mean(draws != 0.0)
        assert abs(observed - hit) <= 4.0 * math.sqrt(hit * (1 - hit) / draws.size)

    def test_heavytail_exponent_floor(self):
        with pytest.raises(DomainError):
            randmat.heavytail_sample(1.5, np.random.default_rng(0))
        with pytest.raises(DomainError):
            randmat.EntryLaw("heavytail", 1.0)

    def test_gaussian_and_rademacher_moments(self):
        gaussian = randmat.EntryLaw("gaussian")
        assert gaussian.moment(2.0) == pytest.approx(1.0)
        assert gaussian.moment(4.0) == pytest.approx(3.0)
        assert randmat.EntryLaw("rademacher").moment(7.0) == 1.0

    def test_parse_law(self):
        assert randmat.parse_law("heavytail3").p == 3.0
        assert randmat.parse_law("heavytail(4.5)").label == "heavytail4.5"
        with pytest.raises(DomainError):
            randmat.parse_law("cauchy")


class TestEnsembles:
    @pytest.mark.parametrize(
        "name",
        ["haar-o", "haar-u", "identity", "iid-gaussian", "iid-rademacher", "iid-heavytail3",
         "haar-iid-rademacher", "2xhaar-o", "0.5xiid-gaussian"],
    )
    def test_names_round_trip(self, name):
        assert randmat.parse_ensemble(name).name == name

    def test_unknown_ensemble(self):
        with pytest.raises(DomainError):
            randmat.parse_ensemble("ginibre")

    def test_haar_orthogonal_is_orthogonal(self, rng):
        m = randmat.sample(randmat.HaarOrthogonal(), 6, rng)
        assert_allclose(m.T @ m, np.eye(6), atol=1e-12)
        assert abs(abs(np.linalg.det(m)) - 1.0) < 1e-12

    def test_haar_unitary_is_unitary(self, rng):
        m = randmat.sample(randmat.HaarUnitary(), 5, rng)
        assert np.iscomplexobj(m)
        assert_allclose(m.conj().T @ m, np.eye(5), atol=1e-12)

    def test_iid_normalisation(self, rng):
        m = randmat.sample(randmat.parse_ensemble("iid-rademacher"), 9, rng)
        assert_allclose(np.abs(m), 1.0 / 3.0)

    def test_scaled_entry_moment(self):
        scaled = randmat.parse_ensemble("2xiid-gaussian")
        assert scaled.entry_moment(2.0) == pytest.approx(4.0)
        assert math.isinf(randmat.parse_ensemble("iid-heavytail3").entry_moment(4.0))

    def test_matrix_size_floor(self, rng):
        with pytest.raises(DomainError):
            randmat.sample(randmat.Identity(), 0, rng)


class TestFunctionals:
    def test_matrix_abs_of_a_diagonal(self):
        assert_allclose(randmat.matrix_abs(np.diag([-2.0, 3.0])), np.diag([2.0, 3.0]), atol=1e-14)

    def test_matrix_abs_squares_to_the_gram_matrix(self, rng):
        m = rng.standard_normal((5, 5))
        root = randmat.matrix_abs(m)
        assert_allclose(root, root.T, atol=1e-12)
        assert_allclose(root @ root, m.T @ m, atol=1e-10)

    def test_singular_values(self):
        m = np.diag([0.5, -4.0, 2.0])
        assert randmat.op_norm(m) == pytest.approx(4.0)
        assert randmat.smallest_singular(m) == pytest.approx(0.5)
        assert randmat.hs_norm(m) == pytest.approx(math.sqrt(0.25 + 16.0 + 4.0))

    def test_sigma_of_deterministic_ensembles(self):
        identity = randmat.mc_sigma_expected_abs(randmat.Identity(), 4, 100, seed=0)
        assert identity.mean == pytest.approx(1.0)
        doubled = randmat.mc_sigma_expected_abs(randmat.parse_ensemble("2xhaar-o"), 4, 100, seed=0)
        assert doubled.mean == pytest.approx(2.0, rel=1e-10)

    def test_sample_floor(self):
        with pytest.raises(DomainError):
            randmat.mc_opnorm_moment(randmat.HaarOrthogonal(), 3, 1.0, samples=10, seed=0)

    def test_opnorm_moment_is_thread_independent(self):
        ensemble = randmat.parse_ensemble("iid-gaussian")
        one = randmat.mc_opnorm_moment(ensemble, 8, 2.0, 256, seed=4, threads=1)
        many = randmat.mc_opnorm_moment(ensemble, 8, 2.0, 256, seed=4, threads=4)
        assert one.mean == many.mean and one.stderr == many.stderr

    def test_orthogonal_opnorm_is_one(self):
        estimate = randmat.mc_opnorm_moment(randmat.HaarOrthogonal(), 7, 3.0, 100, seed=2)
        assert estimate.mean == pytest.approx(1.0, rel=1e-10)

    def test_opnorm_profile_uses_one_stream_per_size(self):
        profile = randmat.opnorm_profile(randmat.parse_ensemble("iid-rademacher"), [4, 8], 1.0, 128, seed=1)
        assert [d for d, _ in profile] == [4, 8]
        assert profile[0][1].seed != profile[1][1].seed


class TestMomentRatios:
    def test_constant_sample(self):
        ratio = randmat.moment_ratio(np.full(50, 2.0), 4.0)
        assert ratio.value == pytest.approx(1.0)
        assert ratio.stderr == pytest.approx(0.0, abs=1e-12)

    def test_zero_sample(self):
        assert randmat.moment_ratio(np.zeros(10), 3.0).value == 1.0

    def test_ratio_is_at_least_one(self, rng):
        assert randmat.moment_ratio(rng.exponential(size=1000), 3.0).value >= 1.0

    def test_kk_ratio_bounded(self):
        ratio = randmat.kk_moment_ratio(randmat.parse_ensemble("iid-gaussian"), 10, 4.0, 400, seed=6)
        assert 1.0 <= ratio.value <= 1.2


class TestHaarIdentities:
    def test_trace_moments(self, rng):
        a = rng.standard_normal((3, 3))
        result = randmat.haar_trace_moments(randmat.HaarOrthogonal(), 3, a, samples=4000, seed=8)
        assert result.target == pytest.approx(np.sum(a * a) / 3.0)
        assert result.passed(zscore=4.0)

    def test_unitary_trace_moments(self, rng):
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        result = randmat.haar_trace_moments(randmat.HaarUnitary(), 4, a, samples=4000, seed=9)
        assert result.passed(zscore=4.0)

    def test_orthogonal_invariance(self):
        result = randmat.orthogonal_invariance_ks(4, 2000, seed=10)
        assert 0.0 <= result.pvalue <= 1.0
        assert result.samples == 2000


class TestLatala:
    def test_bound_for_full_weights(self):
        d = 16
        assert randmat.latala_bound(np.ones((d, d))) == pytest.approx(3.0 * math.sqrt(d))

    def test_check_passes_for_sparse_weights(self, rng):
        weights = randmat.random_sparse_weights(12, 0.3, rng)
        result = randmat.latala_check(weights, 200, seed=12)
        assert result.passed
        assert result.estimate.mean <= result.bound * result.constant

    def test_verdict_is_a_plain_bool(self, rng):
        weights = randmat.random_sparse_weights(12, 0.3, rng)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            result = randmat.latala_check(weights, 200, seed=12)
        assert type(result.passed) is bool
        assert not [w for w in caught if issubclass(w.category, DeprecationWarning)]

    def test_rademacher_max_entry_is_deterministic(self):
        growth = randmat.max_entry_growth(randmat.EntryLaw("rademacher"), 16, 100, seed=0)
        assert growth.mean == pytest.approx(0.25)
        assert growth.stderr == pytest.approx(0.0, abs=1e-15)
