"""
Random matrix ensembles and Monte Carlo checks of their norm inequalities.

Ensembles are addressed on the command line by short names:

    haar-o, haar-u                  Haar measure on O_d / U_d
    iid-<law>                       (1/√d)[X_ij] with i.i.d. entries
    haar-iid-<law>                  Haar matrix times an independent iid-<law>
    identity                        the identity

where <law> is rademacher, gaussian or heavytail<p> (e.g. heavytail4).
"""
import logging
import math
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg
from pydantic import BaseModel, Field
from scipy import stats
from scipy.special import gammaln

from eigenrand.constants import get_constants
from eigenrand.errors import DomainError, EigensolverError
from eigenrand.tools.montecarlo import (
    ChunkPlan,
    MCEstimate,
    Welford,
    collect_chunks,
    derive_seed,
    estimate_from_chunks,
    mc_estimate,
)

logger = logging.getLogger(__name__)

MIN_SAMPLES = 100
_BISECTION_STEPS = 80


# ---------------------------------------------------------------------------
# Entry laws
# ---------------------------------------------------------------------------


def heavytail_magnitude(p: float, v: np.ndarray) -> np.ndarray:
    """
    Inverse survival function of |X| at levels v ∈ (0, 1].

    Levels at or above e^{−p} fall in the atom at 0. Below it, t = e^s with
    s e^{−ps} = v found by bisection on s ∈ [1, max(1, −ln v/(p − 1))].
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    out = np.zeros_like(v)
    active = v < math.exp(-p)
    if active.any():
        target = np.log(v[active])
        lo = np.ones_like(target)
        hi = np.maximum(1.0, -target / (p - 1.0))
        for _ in range(_BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            # s e^{-ps} is decreasing for s >= 1
            above = np.log(mid) - p * mid > target
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        out[active] = np.exp(0.5 * (lo + hi))
    return out


def heavytail_sample(p: float, rng: np.random.Generator, size=None):
    """Symmetric X with P[|X| ≥ t] = ln(t)/t^p for t ≥ e, an atom at 0 and a Rademacher sign."""
    if p < 2:
        raise DomainError(f"heavy-tail exponent must be >= 2, got {p}")
    v = 1.0 - rng.random(size)
    signs = 2.0 * rng.integers(0, 2, size=size) - 1.0
    out = heavytail_magnitude(p, v).reshape(np.shape(signs)) * signs
    return float(out) if size is None else out


def heavytail_moment(p: float, q: float) -> float:
    """E|X|^q = e^{q−p}(1 + q(k+1)/k²) with k = p − q; infinite for q ≥ p."""
    if q >= p:
        return math.inf
    k = p - q
    return math.exp(q - p) * (1.0 + q * (k + 1.0) / (k * k))


@dataclass(frozen=True)
class EntryLaw:
    """Distribution of the i.i.d. entries X_ij."""

    name: str
    p: Optional[float] = None

    def __post_init__(self):
        if self.name not in ("rademacher", "gaussian", "heavytail"):
            raise DomainError(f"unknown entry law {self.name!r}")
        if self.name == "heavytail" and (self.p is None or self.p < 2):
            raise DomainError("heavytail law needs an exponent p >= 2")

    @property
    def label(self) -> str:
        return f"heavytail{self.p:g}" if self.name == "heavytail" else self.name

    def draw(self, rng: np.random.Generator, shape) -> np.ndarray:
        if self.name == "rademacher":
            return 2.0 * rng.integers(0, 2, size=shape) - 1.0
        if self.name == "gaussian":
            return rng.standard_normal(shape)
        return heavytail_sample(self.p, rng, shape)

    def moment(self, q: float) -> float:
        """E|X|^q."""
        if self.name == "rademacher":
            return 1.0
        if self.name == "gaussian":
            return math.exp(q / 2.0 * math.log(2.0) + gammaln((q + 1.0) / 2.0) - 0.5 * math.log(math.pi))
        return heavytail_moment(self.p, q)


def parse_law(text: str) -> EntryLaw:
    match = re.fullmatch(r"heavytail\(?([0-9.]+)\)?", text)
    if match:
        return EntryLaw("heavytail", float(match.group(1)))
    return EntryLaw(text)


# ---------------------------------------------------------------------------
# Ensembles
# ---------------------------------------------------------------------------


def _haar_orthogonal(rng: np.random.Generator, d: int, count: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((count, d, d)))
    signs = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    signs[signs == 0] = 1.0
    return q * signs[:, None, :]


def _haar_unitary(rng: np.random.Generator, d: int, count: int) -> np.ndarray:
    z = (rng.standard_normal((count, d, d)) + 1j * rng.standard_normal((count, d, d))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    magnitude = np.abs(diag)
    phases = np.where(magnitude > 0, diag / np.where(magnitude > 0, magnitude, 1.0), 1.0)
    return q * phases[:, None, :]


class Ensemble(ABC):
    """Law of the d×d matrices M_n."""

    name: str = ""
    real: bool = True

    @abstractmethod
    def sample_batch(self, d: int, count: int, rng: np.random.Generator) -> np.ndarray:
        """count independent draws, shape (count, d, d)."""

    def sample(self, d: int, rng: np.random.Generator) -> np.ndarray:
        return self.sample_batch(d, 1, rng)[0]

    def entry_moment(self, q: float) -> float:
        """E|X|^q of the entry law; 1 for Haar ensembles."""
        return 1.0

    def __repr__(self) -> str:
        return self.name


class HaarOrthogonal(Ensemble):
    name = "haar-o"

    def sample_batch(self, d, count, rng):
        return _haar_orthogonal(rng, d, count)


class HaarUnitary(Ensemble):
    name = "haar-u"
    real = False

    def sample_batch(self, d, count, rng):
        return _haar_unitary(rng, d, count)


class IIDEntries(Ensemble):
    """(1/√d)[X_ij] with i.i.d. symmetric entries."""

    def __init__(self, law: EntryLaw):
        self.law = law
        self.name = f"iid-{law.label}"

    def sample_batch(self, d, count, rng):
        return self.law.draw(rng, (count, d, d)) / math.sqrt(d)

    def entry_moment(self, q: float) -> float:
        return self.law.moment(q)


class HaarTimesIID(Ensemble):
    """E·(1/√d)[X_ij] with E Haar orthogonal and independent of X."""

    def __init__(self, law: EntryLaw):
        self.law = law
        self.name = f"haar-iid-{law.label}"

    def sample_batch(self, d, count, rng):
        haar = _haar_orthogonal(rng, d, count)
        return haar @ (self.law.draw(rng, (count, d, d)) / math.sqrt(d))

    def entry_moment(self, q: float) -> float:
        return self.law.moment(q)


class Identity(Ensemble):
    name = "identity"

    def sample_batch(self, d, count, rng):
        return np.broadcast_to(np.eye(d), (count, d, d)).copy()


class Scaled(Ensemble):
    """factor · base, consuming the same draws as base."""

    def __init__(self, base: Ensemble, factor: float):
        self.base = base
        self.factor = factor
        self.real = base.real
        self.name = f"{factor:g}x{base.name}"

    def sample_batch(self, d, count, rng):
        return self.factor * self.base.sample_batch(d, count, rng)

    def entry_moment(self, q: float) -> float:
        return abs(self.factor) ** q * self.base.entry_moment(q)


STANDARD_ENSEMBLES = ("haar-o", "haar-u", "iid-gaussian", "haar-iid-rademacher")


def parse_ensemble(name: str) -> Ensemble:
    """Ensemble from its command-line name."""
    if name == "haar-o":
        return HaarOrthogonal()
    if name == "haar-u":
        return HaarUnitary()
    if name == "identity":
        return Identity()
    if name.startswith("haar-iid-"):
        return HaarTimesIID(parse_law(name[len("haar-iid-"):]))
    if name.startswith("iid-"):
        return IIDEntries(parse_law(name[len("iid-"):]))
    match = re.fullmatch(r"([0-9.]+)x(.+)", name)
    if match:
        return Scaled(parse_ensemble(match.group(2)), float(match.group(1)))
    raise DomainError(f"unknown ensemble {name!r}")


def sample(ensemble: Ensemble, d: int, rng: np.random.Generator) -> np.ndarray:
    """One d×d draw from the ensemble."""
    if d < 1:
        raise DomainError(f"matrix size must be >= 1, got {d}")
    return ensemble.sample(d, rng)


# ---------------------------------------------------------------------------
# Matrix functionals
# ---------------------------------------------------------------------------


def matrix_abs(m: np.ndarray) -> np.ndarray:
    """|M| = √(M*M) by symmetric eigendecomposition."""
    m = np.asarray(m)
    gram = m.conj().T @ m
    try:
        values, vectors = scipy.linalg.eigh(gram)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigh failed on a {gram.shape} Gram matrix: {exc}") from exc
    root = np.sqrt(np.clip(values, 0.0, None))
    out = (vectors * root) @ vectors.conj().T
    return out.real if np.isrealobj(m) else out


def _singular_values(m: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.svd(m, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"singular value decomposition failed: {exc}") from exc


def op_norm(m: np.ndarray) -> float:
    """Largest singular value."""
    return float(_singular_values(np.asarray(m))[0])


def smallest_singular(m: np.ndarray) -> float:
    """σ(M) = λ_min(|M|)."""
    return float(_singular_values(np.asarray(m))[-1])


def hs_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m))


def _check_samples(samples: int, minimum: int = MIN_SAMPLES):
    if samples < minimum:
        raise DomainError(f"need at least {minimum} samples, got {samples}")


def mc_opnorm_moment(
    ensemble: Ensemble,
    d: int,
    p: float,
    samples: int,
    seed: int,
    threads: Optional[int] = None,
) -> MCEstimate:
    """E[‖M‖_op^p]."""
    _check_samples(samples)

    def sampler(rng, count):
        return _singular_values(ensemble.sample_batch(d, count, rng))[:, 0] ** p

    return mc_estimate(sampler, samples, seed, threads)


def mc_sigma_expected_abs(
    ensemble: Ensemble,
    d: int,
    samples: int,
    seed: int,
    threads: Optional[int] = None,
) -> MCEstimate:
    """
    σ of the sample average of |M|.

    The standard error is the spread of σ over the per-chunk averages,
    scaled to the full sample.
    """
    _check_samples(samples)

    def sampler(rng, count):
        batch = ensemble.sample_batch(d, count, rng)
        total = sum(matrix_abs(m) for m in batch)
        return np.concatenate([[count], np.ravel(total)])

    plan = ChunkPlan(samples=samples)
    chunks = collect_chunks(sampler, plan, seed, threads)
    total = np.zeros(d * d, dtype=chunks[0].dtype)
    spread = Welford()
    for chunk in chunks:
        count = chunk[0].real
        total = total + chunk[1:]
        spread.update_batch([smallest_singular(chunk[1:].reshape(d, d) / count)])
    value = smallest_singular(total.reshape(d, d) / samples)
    stderr = math.sqrt(spread.variance / max(spread.count, 1))
    return MCEstimate(mean=value, stderr=stderr, samples=samples, seed=seed, chunk_plan=plan)


def sigma_lower_bound(law: EntryLaw) -> float:
    """E[X²]/(C·E[X⁴]^{1/4}) with the frozen C."""
    return law.moment(2.0) / (get_constants().randmat.sigma_C * law.moment(4.0) ** 0.25)


class RatioEstimate(BaseModel):
    """A ratio of two moments estimated from the same draws."""

    value: float
    stderr: float
    samples: int
    seed: int


def moment_ratio(values: np.ndarray, q: float, seed: int = 0) -> RatioEstimate:
    """
    E[X^q]^{1/q}/E[X] from one sample of X ≥ 0.

    The standard error is the delta method applied to the pair of sample means.
    """
    values = np.asarray(values, dtype=float).ravel()
    n = values.size
    powered = values ** q
    a, b = float(powered.mean()), float(values.mean())
    if a <= 0.0 or b <= 0.0:
        return RatioEstimate(value=1.0, stderr=0.0, samples=n, seed=seed)
    ratio = a ** (1.0 / q) / b
    grad = np.array([ratio / (q * a), -ratio / b])
    cov = np.cov(np.vstack([powered, values])) if n > 1 else np.zeros((2, 2))
    variance = float(grad @ cov @ grad) / n
    return RatioEstimate(value=ratio, stderr=math.sqrt(max(variance, 0.0)), samples=n, seed=seed)


def kk_moment_ratio(
    ensemble: Ensemble,
    d: int,
    q: float,
    samples: int,
    seed: int,
    threads: Optional[int] = None,
) -> RatioEstimate:
    """E[‖M‖_op^q]^{1/q}/E‖M‖_op."""
    _check_samples(samples)

    def sampler(rng, count):
        return _singular_values(ensemble.sample_batch(d, count, rng))[:, 0]

    norms = np.concatenate(collect_chunks(sampler, ChunkPlan(samples=samples), seed, threads))
    return moment_ratio(norms, q, seed)


# ---------------------------------------------------------------------------
# Haar identities
# ---------------------------------------------------------------------------


class TraceMoments(BaseModel):
    """Empirical E tr(PA) and E|tr(PA)|² against tr(ĀᵀA)/d."""

    first_real: MCEstimate
    first_imag: MCEstimate
    second: MCEstimate
    target: float = Field(description="tr(ĀᵀA)/d")

    def passed(self, zscore: Optional[float] = None) -> bool:
        z = get_constants().randmat.zscore if zscore is None else zscore
        return (
            self.first_real.within(0.0, z, 1e-12)
            and self.first_imag.within(0.0, z, 1e-12)
            and self.second.within(self.target, z, 1e-12)
        )


def haar_trace_moments(
    ensemble: Ensemble,
    d: int,
    a: np.ndarray,
    samples: int,
    seed: int,
    threads: Optional[int] = None,
) -> TraceMoments:
    _check_samples(samples)
    a = np.asarray(a)

    def sampler(rng, count):
        traces = np.einsum("kij,ji->k", ensemble.sample_batch(d, count, rng), a)
        return np.stack([traces.real, traces.imag, np.abs(traces) ** 2], axis=1)

    plan = ChunkPlan(samples=samples)
    chunks = collect_chunks(sampler, plan, seed, threads)
    parts = [estimate_from_chunks([c[:, k] for c in chunks], seed, plan) for k in range(3)]
    target = float(np.real(np.trace(a.conj().T @ a))) / d
    return TraceMoments(first_real=parts[0], first_imag=parts[1], second=parts[2], target=target)


class KSResult(BaseModel):
    statistic: float
    pvalue: float
    samples: int
    seed: int
    passed: bool


def orthogonal_invariance_ks(
    d: int,
    samples: int,
    seed: int,
    p_matrix: Optional[np.ndarray] = None,
    a: Optional[np.ndarray] = None,
    ensemble: Optional[Ensemble] = None,
    threads: Optional[int] = None,
) -> KSResult:
    """Two-sample KS test of tr(PMA) against tr(MA) from independent draws."""
    _check_samples(samples)
    ensemble = ensemble or HaarOrthogonal()
    fixed = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(2,))))
    p_matrix = _haar_orthogonal(fixed, d, 1)[0] if p_matrix is None else np.asarray(p_matrix)
    a = fixed.standard_normal((d, d)) if a is None else np.asarray(a)

    def traces(left: np.ndarray):
        def sampler(rng, count):
            return np.einsum("ij,kjl,li->k", left, ensemble.sample_batch(d, count, rng), a).real

        return sampler

    rotated = collect_chunks(traces(p_matrix), ChunkPlan(samples=samples, stream=0), seed, threads)
    plain = collect_chunks(traces(np.eye(d)), ChunkPlan(samples=samples, stream=1), seed, threads)
    result = stats.ks_2samp(np.concatenate(rotated), np.concatenate(plain))
    return KSResult(
        statistic=float(result.statistic),
        pvalue=float(result.pvalue),
        samples=samples,
        seed=seed,
        passed=bool(result.pvalue >= get_constants().randmat.ks_alpha),
    )


# ---------------------------------------------------------------------------
# Latała and heavy tails
# ---------------------------------------------------------------------------


def latala_bound(weights: np.ndarray) -> float:
    """(Σ a⁴)^{1/4} + max_i ‖a_i·‖₂ + max_j ‖a_·j‖₂."""
    a = np.asarray(weights, dtype=float)
    return float(
        np.sum(a ** 4) ** 0.25
        + np.sqrt((a * a).sum(axis=1)).max()
        + np.sqrt((a * a).sum(axis=0)).max()
    )


def random_sparse_weights(d: int, density: float, rng: np.random.Generator) -> np.ndarray:
    """Weights in [0, 1] kept with probability `density`."""
    mask = rng.random((d, d)) < density
    return np.where(mask, rng.random((d, d)), 0.0)


class LatalaResult(BaseModel):
    estimate: MCEstimate
    bound: float
    constant: float
    passed: bool


def latala_check(
    weights: np.ndarray,
    samples: int,
    seed: int,
    threads: Optional[int] = None,
) -> LatalaResult:
    """E‖(a_ij g_ij)‖_op against the three-term bound with the frozen constant."""
    _check_samples(samples)
    a = np.asarray(weights, dtype=float)

    def sampler(rng, count):
        g = rng.standard_normal((count,) + a.shape)
        return _singular_values(a * g)[:, 0]

    estimate = mc_estimate(sampler, samples, seed, threads)
    bound = latala_bound(a)
    constant = get_constants().randmat.latala_C
    return LatalaResult(
        estimate=estimate, bound=bound, constant=constant, passed=bool(estimate.mean <= constant * bound)
    )


def max_entry_growth(
    law: EntryLaw,
    d: int,
    samples: int,
    seed: int,
    threads: Optional[int] = None,
) -> MCEstimate:
    """E max_ij |X_ij|/√d, which stays bounded exactly when E X⁴ < ∞."""
    _check_samples(samples)

    def sampler(rng, count):
        return np.abs(law.draw(rng, (count, d * d))).max(axis=1) / math.sqrt(d)

    return mc_estimate(sampler, samples, seed, threads)


def opnorm_profile(
    ensemble: Ensemble,
    dims: List[int],
    p: float,
    samples: int,
    seed: int,
    threads: Optional[int] = None,
) -> List[Tuple[int, MCEstimate]]:
    """mc_opnorm_moment over several sizes, one derived stream per size."""
    out = []
    for d in dims:
        stream_seed = derive_seed(seed, f"opnorm-{ensemble.name}-d{d}")
        out.append((d, mc_opnorm_moment(ensemble, d, p, samples, stream_seed, threads)))
    return out
