"""
Tests for the chunked, thread-independent Monte Carlo driver
"""
import numpy as np
import pytest

from eigenrand.tools.montecarlo import (
    ChunkPlan,
    MCEstimate,
    Welford,
    chunk_rng,
    collect_chunks,
    derive_seed,
    mc_estimate,
    resolve_threads,
)


def normal_sampler(rng, count):
    return rng.standard_normal(count)


def test_chunk_plan_covers_every_draw():
    plan = ChunkPlan(samples=100, chunk_size=32)
    chunks = plan.chunks()
    assert [count for _, count in chunks] == [32, 32, 32, 4]
    assert [index for index, _ in chunks] == [0, 1, 2, 3]
    assert ChunkPlan(samples=0).chunks() == []


def test_chunk_streams_are_independent():
    first = chunk_rng(7, 0, 0).random(4)
    assert np.array_equal(first, chunk_rng(7, 0, 0).random(4))
    assert not np.array_equal(first, chunk_rng(7, 0, 1).random(4))
    assert not np.array_equal(first, chunk_rng(7, 1, 0).random(4))


def test_derived_seeds_are_stable_and_label_specific():
    assert derive_seed(3, "alpha") == derive_seed(3, "alpha")
    assert derive_seed(3, "alpha") != derive_seed(3, "beta")
    assert derive_seed(3, "alpha") != derive_seed(4, "alpha")
    assert 0 <= derive_seed(3, "alpha") < 2 ** 64


def test_welford_merge_matches_numpy(rng):
    values = rng.standard_normal(1000) * 3.0 + 1.0
    acc = Welford()
    for part in np.array_split(values, 7):
        acc.update_batch(part)
    assert acc.count == 1000
    assert acc.mean == pytest.approx(values.mean(), rel=1e-12)
    assert acc.variance == pytest.approx(values.var(ddof=1), rel=1e-12)


@pytest.mark.parametrize("threads", [2, 3, 8])
def test_estimate_is_bit_identical_across_thread_counts(threads):
    reference = mc_estimate(normal_sampler, 1000, seed=42, threads=1)
    other = mc_estimate(normal_sampler, 1000, seed=42, threads=threads)
    assert reference.mean == other.mean
    assert reference.stderr == other.stderr


def test_collect_chunks_keeps_chunk_order():
    plan = ChunkPlan(samples=96, chunk_size=32)
    serial = collect_chunks(normal_sampler, plan, seed=1, threads=1)
    parallel = collect_chunks(normal_sampler, plan, seed=1, threads=4)
    for a, b in zip(serial, parallel):
        assert np.array_equal(a, b)


def test_estimate_records_provenance():
    estimate = mc_estimate(normal_sampler, 200, seed=9, chunk_size=50, stream=2)
    assert estimate.samples == 200
    assert estimate.seed == 9
    assert estimate.chunk_plan == ChunkPlan(samples=200, chunk_size=50, stream=2)
    assert estimate.within(0.0, zscore=4.0)


def test_root_uses_the_delta_method():
    plan = ChunkPlan(samples=10)
    estimate = MCEstimate(mean=16.0, stderr=0.8, samples=10, seed=0, chunk_plan=plan)
    root = estimate.root(2.0)
    assert root.mean == pytest.approx(4.0)
    assert root.stderr == pytest.approx(0.8 * 4.0 / (2.0 * 16.0))


def test_resolve_threads(monkeypatch):
    assert resolve_threads(5) == 5
    monkeypatch.setenv("EIGENRAND_THREADS", "3")
    assert resolve_threads() == 3
    monkeypatch.setenv("EIGENRAND_THREADS", "many")
    assert resolve_threads() >= 1
