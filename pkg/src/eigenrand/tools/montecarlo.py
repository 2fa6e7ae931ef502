"""
Reproducible chunked Monte Carlo.

A run of `samples` draws is cut into chunks of a fixed size that does not
depend on the number of worker threads. Chunk k draws from its own
counter-based stream keyed by (seed, stream, k); chunk results are merged in
chunk order with Welford/Chan accumulators, so the estimate is bit-identical
for any thread count.
"""
import hashlib
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

logger = logging.getLogger(__name__)

DEFAULT_CHUNK_SIZE = 32

Sampler = Callable[[np.random.Generator, int], np.ndarray]


class ChunkPlan(BaseModel):
    """How a Monte Carlo run is split into independently seeded chunks."""

    model_config = {"frozen": True}

    samples: int = Field(description="Total number of draws")
    chunk_size: int = Field(default=DEFAULT_CHUNK_SIZE, description="Draws per chunk")
    stream: int = Field(default=0, description="Stream id separating runs that share a seed")

    def chunks(self) -> List[Tuple[int, int]]:
        """(chunk index, draw count) pairs in merge order."""
        out = []
        start, index = 0, 0
        while start < self.samples:
            count = min(self.chunk_size, self.samples - start)
            out.append((index, count))
            start += count
            index += 1
        return out


def chunk_rng(seed: int, stream: int, chunk: int) -> np.random.Generator:
    """Counter-based generator owned by one chunk."""
    sequence = np.random.SeedSequence(seed, spawn_key=(stream, chunk))
    return np.random.Generator(np.random.Philox(sequence))


def derive_seed(master: int, label: str) -> int:
    """Independent 64-bit seed for a labelled sub-experiment."""
    digest = int.from_bytes(hashlib.sha256(label.encode("utf-8")).digest()[:8], "little")
    state = np.random.SeedSequence([master, digest]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def resolve_threads(threads: Optional[int] = None) -> int:
    """Worker count: explicit value, else EIGENRAND_THREADS, else cpu count."""
    if threads is not None and threads > 0:
        return threads
    env = os.getenv("EIGENRAND_THREADS")
    if env:
        try:
            value = int(env)
            if value > 0:
                return value
        except ValueError:
            logger.warning(f"Ignoring non-integer EIGENRAND_THREADS={env!r}")
    return os.cpu_count() or 1


class Welford:
    """Streaming mean/variance with Chan's pairwise merge."""

    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0

    def merge_stats(self, count: int, mean: float, m2: float):
        if count == 0:
            return
        if self.count == 0:
            self.count, self.mean, self.m2 = count, mean, m2
            return
        total = self.count + count
        delta = mean - self.mean
        self.mean += delta * count / total
        self.m2 += m2 + delta * delta * self.count * count / total
        self.count = total

    def update_batch(self, values: np.ndarray):
        values = np.asarray(values, dtype=float).ravel()
        if values.size == 0:
            return
        batch_mean = float(values.mean())
        batch_m2 = float(((values - batch_mean) ** 2).sum())
        self.merge_stats(values.size, batch_mean, batch_m2)

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def stderr(self) -> float:
        return math.sqrt(self.variance / self.count) if self.count > 0 else 0.0


class MCEstimate(BaseModel):
    """Sample mean with standard error and full seed provenance."""

    mean: float
    stderr: float
    samples: int
    seed: int
    chunk_plan: ChunkPlan
    flags: List[str] = Field(default_factory=list)

    def root(self, q: float) -> "MCEstimate":
        """Estimate of mean^(1/q); standard error by the delta method."""
        if self.mean <= 0.0:
            return self.model_copy(update={"mean": 0.0, "stderr": 0.0})
        value = self.mean ** (1.0 / q)
        return self.model_copy(
            update={"mean": value, "stderr": self.stderr * value / (q * self.mean)}
        )

    def within(self, target: float, zscore: float = 3.0, atol: float = 0.0) -> bool:
        return bool(abs(self.mean - target) <= zscore * self.stderr + atol)


def collect_chunks(
    sampler: Sampler,
    plan: ChunkPlan,
    seed: int,
    threads: Optional[int] = None,
) -> List[np.ndarray]:
    """Run every chunk and return the per-chunk arrays in chunk order."""

    def work(chunk: Tuple[int, int]) -> np.ndarray:
        index, count = chunk
        return np.asarray(sampler(chunk_rng(seed, plan.stream, index), count))

    chunks = plan.chunks()
    workers = min(resolve_threads(threads), max(len(chunks), 1))
    if workers == 1:
        return [work(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(work, chunks))


def estimate_from_chunks(chunks: List[np.ndarray], seed: int, plan: ChunkPlan) -> MCEstimate:
    acc = Welford()
    for values in chunks:
        acc.update_batch(values)
    return MCEstimate(
        mean=acc.mean, stderr=acc.stderr, samples=acc.count, seed=seed, chunk_plan=plan
    )


def mc_estimate(
    sampler: Sampler,
    samples: int,
    seed: int,
    threads: Optional[int] = None,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    stream: int = 0,
) -> MCEstimate:
    """Mean and standard error of the scalar values produced by `sampler`."""
    plan = ChunkPlan(samples=samples, chunk_size=chunk_size, stream=stream)
    return estimate_from_chunks(collect_chunks(sampler, plan, seed, threads), seed, plan)
