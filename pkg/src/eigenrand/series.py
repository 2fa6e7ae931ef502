"""
Randomized eigenfunction series.

A deterministic u = Σ_n u_n, u_n ∈ E_n, is randomized level by level:

    S_N = Σ_{n≤N} Σ_i (Σ_j M_{n,i,j} ⟨u_n, φ_{n,j}⟩) φ_{n,i}

with independent random matrices M_n of size d_n = dim E_n. This module
samples S_N on a grid, estimates its L^p moments by chunked Monte Carlo and
compares them with the deterministic PL^p norm.

Only moment comparability is measured; almost-sure convergence is not
something a finite run can certify, and reports say so.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from eigenrand.constants import get_constants
from eigenrand.errors import DomainError
from eigenrand.measure import QuadratureRule, SampledFunction, lp_norm
from eigenrand.plp import plp_norm_quadrature
from eigenrand.randmat import (
    Ensemble,
    HaarOrthogonal,
    RatioEstimate,
    heavytail_magnitude,
    mc_sigma_expected_abs,
    moment_ratio,
    parse_ensemble,
)
from eigenrand.spectral import Family, HermiteOscillator, family_name
from eigenrand.tools.montecarlo import (
    ChunkPlan,
    MCEstimate,
    collect_chunks,
    derive_seed,
    estimate_from_chunks,
)

logger = logging.getLogger(__name__)

MIN_MOMENT_SAMPLES = 50
MIN_KKMP_SAMPLES = 200
MAX_HERMITE_LEVEL = 30
ALMOST_SURE_NOTE = "moment comparability only; almost-sure convergence is not certified"


@dataclass
class RandomSeriesSpec:
    """A deterministic function given by its level coefficients, and the matrix law that randomizes it."""

    family: Family
    coefficients: List[np.ndarray]
    ensemble: Ensemble
    rule: Optional[QuadratureRule] = None

    def __post_init__(self):
        if not self.coefficients:
            raise DomainError("a random series needs at least one level")
        self.coefficients = [np.atleast_1d(np.asarray(v)) for v in self.coefficients]
        for offset, vector in enumerate(self.coefficients):
            n = self.family.first_level + offset
            if vector.size != self.family.dim(n):
                raise DomainError(
                    f"level {n} of {self.family.label} needs {self.family.dim(n)} coefficients, got {vector.size}"
                )
            if not np.all(np.isfinite(vector)):
                raise DomainError(f"level {n} has non-finite coefficients")
        if isinstance(self.family, HermiteOscillator) and self.N > MAX_HERMITE_LEVEL:
            raise DomainError(f"oscillator series are sampled up to level {MAX_HERMITE_LEVEL}, got N={self.N}")

    @classmethod
    def from_level_norms(
        cls,
        family: Family,
        norms: Sequence[float],
        ensemble: Ensemble,
        rule: Optional[QuadratureRule] = None,
    ) -> "RandomSeriesSpec":
        """Spread each level norm evenly over the d_n basis coefficients."""
        coefficients = []
        for offset, norm in enumerate(norms):
            dim = family.dim(family.first_level + offset)
            coefficients.append(np.full(dim, float(norm) / math.sqrt(dim)))
        return cls(family, coefficients, ensemble, rule)

    @property
    def N(self) -> int:
        return self.family.first_level + len(self.coefficients) - 1

    def level_norms(self) -> np.ndarray:
        return np.array([np.linalg.norm(v) for v in self.coefficients])

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.level_norms()))

    def grid(self, p: float = 2.0) -> QuadratureRule:
        return self.rule if self.rule is not None else self.family.series_rule(self.N, p)

    def with_ensemble(self, ensemble: Ensemble) -> "RandomSeriesSpec":
        return RandomSeriesSpec(self.family, self.coefficients, ensemble, self.rule)


def default_level_norms(family: Family, N: int) -> np.ndarray:
    """a_n = (1 + n)^{−1/2}, the profile used by the standard test matrix."""
    n = np.arange(family.first_level, N + 1, dtype=float)
    return (1.0 + n) ** -0.5


def _draw(spec: RandomSeriesSpec, rng: np.random.Generator, rule: QuadratureRule) -> SampledFunction:
    randomized = []
    for vector in spec.coefficients:
        m = spec.ensemble.sample(vector.size, rng)
        randomized.append(m @ vector)
    return SampledFunction(rule, spec.family.synthesize(randomized, rule))


def sample_series(spec: RandomSeriesSpec, rng: np.random.Generator, p: float = 2.0) -> SampledFunction:
    """Grid values of S_N for one draw of (M_n)."""
    return _draw(spec, rng, spec.grid(p))


def _sample_norms(
    spec: RandomSeriesSpec, p: float, samples: int, seed: int, threads: Optional[int] = None
) -> Tuple[List[np.ndarray], ChunkPlan]:
    rule = spec.grid(p)
    plan = ChunkPlan(samples=samples)

    def sampler(rng, count):
        return np.array([lp_norm(_draw(spec, rng, rule), p) for _ in range(count)])

    return collect_chunks(sampler, plan, seed, threads), plan


def mc_lp_moment(
    spec: RandomSeriesSpec,
    p: float,
    q: Optional[float] = None,
    samples: int = 200,
    seed: int = 0,
    threads: Optional[int] = None,
) -> MCEstimate:
    """E[‖S_N‖_{L^p}^q]^{1/q}, q = max(2, p) by default."""
    if samples < MIN_MOMENT_SAMPLES:
        raise DomainError(f"mc_lp_moment needs at least {MIN_MOMENT_SAMPLES} samples, got {samples}")
    q = max(2.0, p) if q is None else q
    chunks, plan = _sample_norms(spec, p, samples, seed, threads)
    estimate = estimate_from_chunks([c ** q for c in chunks], seed, plan)
    return estimate.root(q)


def kkmp_ratio(
    spec: RandomSeriesSpec, p: float, samples: int = 400, seed: int = 0, threads: Optional[int] = None
) -> RatioEstimate:
    """E[‖S‖_p^p]^{1/p}/E‖S‖_p from one set of draws."""
    if samples < MIN_KKMP_SAMPLES:
        raise DomainError(f"kkmp_ratio needs at least {MIN_KKMP_SAMPLES} samples, got {samples}")
    chunks, _ = _sample_norms(spec, p, samples, seed, threads)
    return moment_ratio(np.concatenate(chunks), p, seed)


# ---------------------------------------------------------------------------
# Universality
# ---------------------------------------------------------------------------


class SeriesRow(BaseModel):
    """One experiment row of a series report."""

    model_config = {"populate_by_name": True}

    experiment: str
    family: str
    d: int
    ensemble: str
    p: float
    q: float
    N: int
    estimate: float
    stderr: float
    samples: int
    seed: int
    deterministic: Optional[float] = Field(default=None, description="PL^p norm of the deterministic function")
    ratio: Optional[float] = None
    band: Optional[List[float]] = None
    passed: Optional[bool] = Field(default=None, alias="pass")
    note: str = ALMOST_SURE_NOTE


class UniversalityTable(BaseModel):
    rows: List[SeriesRow]
    spread: float = Field(description="max/min ratio across ensembles")
    passed: bool


def check_moment_hypothesis(ensemble: Ensemble, p: float):
    """Entries must have a finite moment of order max(2, p)."""
    q = max(2.0, p)
    if not math.isfinite(ensemble.entry_moment(q)):
        raise DomainError(f"{ensemble.name} has no finite moment of order {q:g}")


def universality_ratio(
    spec: RandomSeriesSpec,
    p: float,
    ensembles: Sequence[Ensemble],
    samples: int = 200,
    seed: int = 0,
    threads: Optional[int] = None,
) -> UniversalityTable:
    """mc_lp_moment(q = max(2, p))/‖u‖_{PL^p} for each ensemble."""
    for ensemble in ensembles:
        check_moment_hypothesis(ensemble, p)
    consts = get_constants().series
    q = max(2.0, p)
    deterministic = plp_norm_quadrature(spec.family, spec.level_norms(), p)
    rows = []
    for ensemble in ensembles:
        ensemble_seed = derive_seed(seed, ensemble.name)
        estimate = mc_lp_moment(spec.with_ensemble(ensemble), p, q, samples, ensemble_seed, threads)
        ratio = estimate.mean / deterministic
        band = list(consts.universality_band)
        rows.append(
            SeriesRow(
                experiment="universality",
                family=family_name(spec.family),
                d=spec.family.d,
                ensemble=ensemble.name,
                p=p,
                q=q,
                N=spec.N,
                estimate=estimate.mean,
                stderr=estimate.stderr,
                samples=samples,
                seed=ensemble_seed,
                deterministic=deterministic,
                ratio=ratio,
                band=band,
                passed=bool(band[0] <= ratio <= band[1]),
            )
        )
    ratios = [row.ratio for row in rows]
    spread = max(ratios) / min(ratios)
    logger.info(f"universality {spec.family.label} p={p} N={spec.N}: spread {spread:.3f}")
    return UniversalityTable(
        rows=rows,
        spread=spread,
        passed=bool(spread <= consts.universality_max_ratio and all(row.passed for row in rows)),
    )


# ---------------------------------------------------------------------------
# Contraction principle and trace forms
# ---------------------------------------------------------------------------


class ContractionResult(BaseModel):
    lhs: float = Field(description="c·E‖Σ√d_n tr(P_n b_n)‖_p with Haar orthogonal P_n")
    rhs: float = Field(description="E‖Σ√d_n tr(M_n b_n)‖_p")
    c: float = Field(description="min_n σ(E|M_n|)")
    lhs_stderr: float
    rhs_stderr: float
    passed: bool


def contraction_check(
    spec: RandomSeriesSpec,
    p: float,
    ensemble: Optional[Ensemble] = None,
    samples: int = 200,
    seed: int = 0,
    threads: Optional[int] = None,
) -> ContractionResult:
    """
    c·E‖S_Haar‖_p ≤ E‖S_M‖_p within zscore standard errors.

    Both sides use the same seed, so an ensemble that is a deterministic
    multiple of Haar orthogonal reproduces the left side draw for draw.
    """
    ensemble = spec.ensemble if ensemble is None else ensemble
    dims = sorted({v.size for v in spec.coefficients})
    sigma_samples = max(samples, 100)
    c = min(
        mc_sigma_expected_abs(ensemble, d, sigma_samples, derive_seed(seed, f"sigma-d{d}"), threads).mean
        for d in dims
    )
    if c <= 0.0:
        raise DomainError(f"{ensemble.name} has σ(E|M|) = 0")
    haar_chunks, plan = _sample_norms(spec.with_ensemble(HaarOrthogonal()), p, samples, seed, threads)
    haar = estimate_from_chunks(haar_chunks, seed, plan)
    target_chunks, _ = _sample_norms(spec.with_ensemble(ensemble), p, samples, seed, threads)
    target = estimate_from_chunks(target_chunks, seed, plan)
    lhs, lhs_stderr = c * haar.mean, c * haar.stderr
    z = get_constants().series.zscore
    slack = z * math.hypot(lhs_stderr, target.stderr)
    return ContractionResult(
        lhs=lhs,
        rhs=target.mean,
        c=c,
        lhs_stderr=lhs_stderr,
        rhs_stderr=target.stderr,
        passed=bool(lhs <= target.mean + slack + 1e-12 * abs(lhs)),
    )


def trace_form(m: np.ndarray, c: np.ndarray, phi_values: np.ndarray) -> np.ndarray:
    """
    √d tr(M b) with b = c ⊗ φ/√d, pointwise on the grid.

    phi_values has shape (d, points); the result equals (M c)·φ.
    """
    m = np.asarray(m)
    c = np.asarray(c)
    d = c.size
    if m.shape != (d, d) or phi_values.shape[0] != d:
        raise DomainError("trace form needs M of shape (d, d) and d basis rows")
    b = np.einsum("i,jx->ijx", c, phi_values) / math.sqrt(d)
    return math.sqrt(d) * np.einsum("ji,ijx->x", m, b)


class HSIdentityResult(BaseModel):
    estimate: MCEstimate = Field(description="E|Σ√d_n tr(M_n a_n)|²")
    target: float = Field(description="Σ‖a_n‖²_HS")
    passed: bool


def hs_identity_check(
    matrices: Sequence[np.ndarray],
    ensemble: Optional[Ensemble] = None,
    samples: int = 20000,
    seed: int = 0,
    threads: Optional[int] = None,
) -> HSIdentityResult:
    """E|Σ_n √d_n tr(M_n a_n)|² = Σ_n ‖a_n‖²_HS for Haar M_n."""
    ensemble = HaarOrthogonal() if ensemble is None else ensemble
    matrices = [np.asarray(a) for a in matrices]
    for a in matrices:
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DomainError("each level needs a square matrix")

    def sampler(rng, count):
        total = np.zeros(count, dtype=complex)
        for a in matrices:
            d = a.shape[0]
            batch = ensemble.sample_batch(d, count, rng)
            total += math.sqrt(d) * np.einsum("kij,ji->k", batch, a)
        return np.abs(total) ** 2

    plan = ChunkPlan(samples=samples)
    estimate = estimate_from_chunks(collect_chunks(sampler, plan, seed, threads), seed, plan)
    target = float(sum(np.sum(np.abs(a) ** 2) for a in matrices))
    z = get_constants().series.zscore
    return HSIdentityResult(estimate=estimate, target=target, passed=bool(estimate.within(target, z, 1e-12)))


# ---------------------------------------------------------------------------
# Torus and heavy tails
# ---------------------------------------------------------------------------


class SalemZygmundResult(BaseModel):
    estimate: MCEstimate = Field(description="E max|Σ ε_n e^{inx}| / √(N ln N)")
    N: int
    grid_size: int
    min_sup: float = Field(description="smallest sampled sup, never below √N")
    flags: List[str] = Field(default_factory=list)


def torus_salem_zygmund(
    N: int,
    samples: int = 200,
    grid_size: Optional[int] = None,
    seed: int = 0,
    threads: Optional[int] = None,
) -> SalemZygmundResult:
    """Sup of a Rademacher trigonometric polynomial of degree N on an equispaced grid."""
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    grid_size = 16 * N if grid_size is None else grid_size
    if grid_size < 16 * N:
        raise DomainError(f"grid_size must be >= 16N = {16 * N}, got {grid_size}")
    flags = []
    scale = math.sqrt(N * math.log(N))
    if scale == 0.0:
        flags.append("zero-denominator")
        scale = 1.0

    def sampler(rng, count):
        coefficients = np.zeros((count, grid_size))
        coefficients[:, 1:N + 1] = rng.choice([-1.0, 1.0], size=(count, N))
        sups = np.abs(np.fft.ifft(coefficients, axis=1) * grid_size).max(axis=1)
        return np.column_stack([sups / scale, sups])

    plan = ChunkPlan(samples=samples)
    chunks = collect_chunks(sampler, plan, seed, threads)
    estimate = estimate_from_chunks([c[:, 0] for c in chunks], seed, plan)
    estimate.flags.extend(flags)
    return SalemZygmundResult(
        estimate=estimate,
        N=N,
        grid_size=grid_size,
        min_sup=float(min(c[:, 1].min() for c in chunks)),
        flags=flags,
    )


class DivergenceRow(BaseModel):
    N: int
    running_max: float = Field(description="max_{2≤n≤N} |X_n|/(n^{1/p} ln^{2/p} n) on trajectory 0")
    median_running_max: float
    median_window_max: float = Field(description="median of the same max over the window since the previous N")


def _trajectory(p: float, ends: np.ndarray, law: str, rng: np.random.Generator) -> np.ndarray:
    """Running and windowed maxima of one trajectory at every N in ends."""
    n_max = int(ends[-1])
    if law == "rademacher":
        positions = np.arange(2, n_max + 1)
        magnitudes = np.ones(positions.size)
    else:
        # X_n ≠ 0 with probability e^{−p}; gaps between such n are geometric
        hit = math.exp(-p)
        expected = int(hit * n_max * 1.2) + 64
        gaps = rng.geometric(hit, size=expected)
        positions = 1 + np.cumsum(gaps)
        while positions[-1] <= n_max:
            more = positions[-1] + np.cumsum(rng.geometric(hit, size=expected))
            positions = np.concatenate([positions, more])
        positions = positions[positions <= n_max]
        levels = hit * (1.0 - rng.random(positions.size))
        magnitudes = heavytail_magnitude(p, levels)
    n = positions.astype(float)
    ratios = magnitudes / (n ** (1.0 / p) * np.log(n) ** (2.0 / p))
    running = np.maximum.accumulate(ratios) if ratios.size else ratios
    out = np.zeros(2 * ends.size)
    lo = 1
    for k, end in enumerate(ends):
        upto = np.searchsorted(positions, end, side="right")
        start = np.searchsorted(positions, lo, side="right")
        out[k] = running[upto - 1] if upto > 0 else 0.0
        out[ends.size + k] = ratios[start:upto].max() if upto > start else 0.0
        lo = end
    return out


def heavytail_divergence_demo(
    p: float,
    N_list: Sequence[int],
    seed: int = 0,
    trajectories: int = 100,
    law: str = "heavytail",
    threads: Optional[int] = None,
) -> List[DivergenceRow]:
    """
    max |X_n|/(n^{1/p} ln^{2/p} n) along trajectories of i.i.d. X_n.

    law is "heavytail" (the order-p law, which has every moment below p but
    an almost surely unbounded normalized maximum) or "rademacher".
    """
    if p < 2:
        raise DomainError(f"divergence demo needs p >= 2, got {p}")
    if law not in ("heavytail", "rademacher"):
        raise DomainError(f"unknown law {law!r}")
    ends = np.array(sorted(set(int(n) for n in N_list)))
    if ends.size == 0 or ends[0] < 2:
        raise DomainError("N_list needs values >= 2")
    plan = ChunkPlan(samples=trajectories, chunk_size=1)

    def sampler(rng, count):
        return np.stack([_trajectory(p, ends, law, rng) for _ in range(count)])

    table = np.concatenate(collect_chunks(sampler, plan, seed, threads))
    k = ends.size
    medians = np.median(table, axis=0)
    return [
        DivergenceRow(
            N=int(end),
            running_max=float(table[0, i]),
            median_running_max=float(medians[i]),
            median_window_max=float(medians[k + i]),
        )
        for i, end in enumerate(ends)
    ]


def ensembles_from_names(names: Sequence[str]) -> List[Ensemble]:
    return [parse_ensemble(name) for name in names]
