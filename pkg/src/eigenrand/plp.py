"""
Probabilistic Lebesgue norms.

For a family of eigenspaces and level norms a_n = ‖u_n‖_{L²} the PL^p norm is

    ‖u‖_{PL^p} = ‖ (Σ_n a_n² e(n, ·)/d_n)^{1/2} ‖_{L^p}.

This module evaluates it by quadrature and by the discrete closed forms of
the sphere and oscillator families, decides membership of parametric
coefficient sequences from their growth exponents, and implements the
interpolation defect, the Hölder witness, Sobolev norms, embedding sweeps
and the shift counterexample on L^p(R, ℓ²).
"""
import csv
import logging
import math
import os
import warnings
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field
from scipy.optimize import minimize_scalar
from scipy.special import zeta

from eigenrand.constants import get_constants
from eigenrand.errors import DivergenceWarning, DomainError
from eigenrand.measure import SampledFunction, lp_norm, weak_lp_quasinorm
from eigenrand.spectral import (
    Family,
    HermiteOscillator,
    SphereHighest,
    SphereZonal,
    TorusFourier,
    family_name,
)

logger = logging.getLogger(__name__)

DEFAULT_TRUNCATION = 1 << 16
_EXPONENT_TOL = 1e-9


# ---------------------------------------------------------------------------
# Coefficient sequences and growth exponents
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Growth:
    """n^power (ln n)^log (ln ln n)^loglog; power = −∞ means faster than any power."""

    power: float = 0.0
    log: float = 0.0
    loglog: float = 0.0

    @property
    def vanishing(self) -> bool:
        return math.isinf(self.power) and self.power < 0


CONSTANT = Growth()
NEGLIGIBLE = Growth(power=-math.inf)


def _eq(x: float, y: float) -> bool:
    return abs(x - y) <= _EXPONENT_TOL


def _power_log_partial(alpha: float, beta: float, lacunary: bool) -> Growth:
    """Growth of Σ_{k ≤ n} k^α ln^β k, over all k or over k ∈ {2^j}."""
    # over k = 2^j the sum behaves like Σ_{j ≤ log n} 2^{jα} j^β
    threshold = 0.0 if lacunary else -1.0
    shift = 0.0 if lacunary else 1.0
    if alpha > threshold + _EXPONENT_TOL:
        return Growth(alpha + shift, beta)
    if _eq(alpha, threshold):
        if beta > -1.0 + _EXPONENT_TOL:
            return Growth(0.0, beta + 1.0)
        if _eq(beta, -1.0):
            return Growth(0.0, 0.0, 1.0)
    return CONSTANT


def _power_log_tail(alpha: float, beta: float, lacunary: bool) -> Optional[Growth]:
    """Growth of Σ_{k ≥ n} k^α ln^β k, or None when the series diverges."""
    threshold = 0.0 if lacunary else -1.0
    shift = 0.0 if lacunary else 1.0
    if alpha < threshold - _EXPONENT_TOL:
        return Growth(alpha + shift, beta)
    if _eq(alpha, threshold) and beta < -1.0 - _EXPONENT_TOL:
        return Growth(0.0, beta + 1.0)
    return None


def _outer_converges(gamma: float, inner: Growth, half_p: float) -> bool:
    """Does Σ_n n^γ G(n)^{p/2} converge?"""
    if inner.vanishing:
        return True
    exponent = gamma + inner.power * half_p
    if exponent < -1.0 - _EXPONENT_TOL:
        return True
    if exponent > -1.0 + _EXPONENT_TOL:
        return False
    log_exponent = inner.log * half_p
    if log_exponent < -1.0 - _EXPONENT_TOL:
        return True
    if log_exponent > -1.0 + _EXPONENT_TOL:
        return False
    return inner.loglog * half_p < -1.0 - _EXPONENT_TOL


class CoeffSeq(ABC):
    """Nonnegative level norms a_n, n ≥ 1 (a_0 for the oscillator)."""

    @property
    def support_end(self) -> Optional[int]:
        """Last nonzero index for finitely supported sequences."""
        return None

    @abstractmethod
    def values(self, n: np.ndarray) -> np.ndarray:
        """a_n at the given indices."""

    @abstractmethod
    def weighted_partial(self, alpha: float) -> Growth:
        """Growth of Σ_{k ≤ n} k^α a_k²."""

    @abstractmethod
    def weighted_tail(self, alpha: float) -> Optional[Growth]:
        """Growth of Σ_{k ≥ n} k^α a_k², None when divergent."""

    def truncate(self, n_max: int) -> "FiniteSeq":
        n = np.arange(0, n_max + 1)
        return FiniteSeq(tuple(float(v) for v in self.values(n)), start=0)


@dataclass(frozen=True)
class FiniteSeq(CoeffSeq):
    """a_{start + i} = values[i], zero elsewhere."""

    values_: Tuple[float, ...]
    start: int = 1

    def __init__(self, values: Sequence[float], start: int = 1):
        arr = np.asarray(values, dtype=float)
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise DomainError("level norms must be finite and nonnegative")
        object.__setattr__(self, "values_", tuple(arr.tolist()))
        object.__setattr__(self, "start", start)

    @property
    def support_end(self) -> int:
        nonzero = np.nonzero(np.asarray(self.values_))[0]
        return self.start + int(nonzero[-1]) if nonzero.size else 0

    def values(self, n: np.ndarray) -> np.ndarray:
        n = np.asarray(n, dtype=int)
        arr = np.asarray(self.values_)
        index = n - self.start
        inside = (index >= 0) & (index < arr.size)
        out = np.zeros(n.shape)
        out[inside] = arr[index[inside]]
        return out

    def weighted_partial(self, alpha: float) -> Growth:
        return CONSTANT if any(self.values_) else NEGLIGIBLE

    def weighted_tail(self, alpha: float) -> Growth:
        return NEGLIGIBLE


@dataclass(frozen=True)
class PowerLogSeq(CoeffSeq):
    """a_n = n^{−σ} ln^{−τ} n for n ≥ start, optionally only on n ∈ {2^k}."""

    sigma: float
    tau: float = 0.0
    start: int = 1
    lacunary: bool = False

    def __post_init__(self):
        if self.tau != 0.0 and self.start < 2:
            raise DomainError("logarithmic factors need start >= 2")

    def values(self, n: np.ndarray) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        mask = n >= self.start
        if self.lacunary:
            as_int = n.astype(np.int64)
            mask &= (as_int > 0) & ((as_int & (as_int - 1)) == 0)
        safe = np.where(mask, n, 2.0)
        out = safe ** (-self.sigma)
        if self.tau:
            out = out * np.log(safe) ** (-self.tau)
        return np.where(mask, out, 0.0)

    def weighted_partial(self, alpha: float) -> Growth:
        return _power_log_partial(alpha - 2 * self.sigma, -2 * self.tau, self.lacunary)

    def weighted_tail(self, alpha: float) -> Optional[Growth]:
        return _power_log_tail(alpha - 2 * self.sigma, -2 * self.tau, self.lacunary)


@dataclass(frozen=True)
class GeometricSeq(CoeffSeq):
    """a_n = ratio^n for n ≥ start, 0 < ratio < 1."""

    ratio: float
    start: int = 1

    def __post_init__(self):
        if not 0.0 < self.ratio < 1.0:
            raise DomainError(f"geometric ratio must lie in (0, 1), got {self.ratio}")

    def values(self, n: np.ndarray) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        return np.where(n >= self.start, self.ratio ** n, 0.0)

    def weighted_partial(self, alpha: float) -> Growth:
        return CONSTANT

    def weighted_tail(self, alpha: float) -> Growth:
        return NEGLIGIBLE


CoeffLike = Union[CoeffSeq, Sequence[float], np.ndarray]


def as_sequence(a: CoeffLike, start: int = 1) -> CoeffSeq:
    return a if isinstance(a, CoeffSeq) else FiniteSeq(a, start)


def _critical_zonal(d: int) -> float:
    return 2.0 * d / (d - 1.0)


def l2_membership(a: CoeffSeq) -> bool:
    return a.weighted_tail(0.0) is not None


def plp_membership(family: Family, a: CoeffLike, p: float) -> bool:
    """Is Σ a_n u_n in PL^p, decided from the growth exponents of a?"""
    a = as_sequence(a, family.first_level)
    d = family.d
    if isinstance(family, TorusFourier) or p <= 2.0 and not isinstance(family, HermiteOscillator):
        return l2_membership(a)
    if isinstance(family, SphereHighest):
        return _outer_converges(-(d + 1) / 2.0, a.weighted_partial((d - 1) / 2.0), p / 2.0)
    if isinstance(family, SphereZonal):
        if p <= _critical_zonal(d):
            return l2_membership(a)
        return _outer_converges(-(d + 1.0), a.weighted_partial(d - 1.0), p / 2.0)
    if isinstance(family, HermiteOscillator):
        tail = a.weighted_tail(-d / 2.0)
        if tail is None:
            return False
        return _outer_converges(d / 2.0 - 1.0, tail, p / 2.0)
    raise DomainError(f"no membership rule for {family.label}")


def _sobolev_exponent(family: Family, s: float) -> float:
    return s if isinstance(family, HermiteOscillator) else 2.0 * s


def sobolev_membership(family: Family, a: CoeffLike, s: float) -> bool:
    """Is Σ (1+n)^{w(s)} a_n² finite, with w(s) = s for the oscillator and 2s otherwise?"""
    a = as_sequence(a, family.first_level)
    return a.weighted_tail(_sobolev_exponent(family, s)) is not None


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


def _level_weights(family: Family, norms: np.ndarray) -> np.ndarray:
    levels = family.levels(family.first_level + len(norms) - 1)
    return np.asarray(norms, dtype=float) ** 2 / np.array([family.dim(n) for n in levels], dtype=float)


def _aligned(family: Family, a: CoeffLike, n_max: Optional[int] = None) -> np.ndarray:
    """Level norms for levels first_level … n_max."""
    if not isinstance(a, CoeffSeq):
        arr = np.asarray(a, dtype=float)
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise DomainError("level norms must be finite and nonnegative")
        return arr
    if n_max is None:
        n_max = a.support_end
        if n_max is None:
            raise DomainError("an infinite sequence needs an explicit truncation")
    return a.values(np.arange(family.first_level, n_max + 1))


def plp_norm_quadrature(family: Family, norms: CoeffLike, p: float) -> float:
    """‖(Σ_n a_n² e(n, ·)/d_n)^{1/2}‖_{L^p} with norms[i] = a_{first_level + i}."""
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    norms = _aligned(family, norms)
    if norms.size == 0 or not np.any(norms):
        return 0.0
    weights = _level_weights(family, norms)
    n_max = family.first_level + norms.size - 1
    if math.isinf(p):
        rule = family.density_rule(n_max, 2 * family.density_start(n_max, 2.0))
        return float(np.sqrt((weights @ family.spectral_levels(n_max, rule)).max()))
    value = family.integrate_levels(
        n_max,
        lambda table: np.maximum(weights @ table, 0.0) ** (p / 2.0),
        p,
        f"plp_norm_quadrature[{family.label}, p={p}]",
    )
    return value ** (1.0 / p)


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def _finite_or_truncated(family: Family, a: CoeffLike, p: float, truncation: int, what: str):
    seq = as_sequence(a, 1)
    if seq.support_end is not None:
        return seq
    if not plp_membership(family, seq, p):
        warnings.warn(f"{what}: sequence is not in PL^{p:g}", DivergenceWarning, stacklevel=3)
        return None
    return seq.truncate(truncation)


def _sphere_closed_form(seq: CoeffSeq, p: float, inner_power: float, outer_power: float) -> float:
    end = seq.support_end
    if end < 1:
        return 0.0
    n = np.arange(1, end + 1, dtype=float)
    partial = np.cumsum(n ** inner_power * seq.values(n) ** 2)
    head = float(np.sum(n ** (-outer_power) * partial ** (p / 2.0)))
    tail = float(partial[-1] ** (p / 2.0) * zeta(outer_power, end + 1))
    return (head + tail) ** (1.0 / p)


def y_closed_form(a: CoeffLike, p: float, d: int, truncation: int = DEFAULT_TRUNCATION) -> float:
    """
    [Σ_{n≥1} n^{−(d+1)/2} (Σ_{k≤n} k^{(d−1)/2} a_k²)^{p/2}]^{1/p}.

    The tail beyond the support is S^{p/2} ζ((d+1)/2, K+1).
    """
    if p <= 1:
        raise DomainError(f"y_closed_form needs p > 1, got {p}")
    seq = _finite_or_truncated(SphereHighest(d), a, p, truncation, "y_closed_form")
    if seq is None:
        return math.inf
    return _sphere_closed_form(seq, p, (d - 1) / 2.0, (d + 1) / 2.0)


def z_closed_form(a: CoeffLike, p: float, d: int, truncation: int = DEFAULT_TRUNCATION) -> float:
    """[Σ_{n≥1} n^{−(d+1)} (Σ_{k≤n} k^{d−1} a_k²)^{p/2}]^{1/p}, for p above 2d/(d−1)."""
    if d < 2 or p <= _critical_zonal(d):
        raise DomainError(f"z_closed_form needs p > 2d/(d-1), got p={p}, d={d}")
    seq = _finite_or_truncated(SphereZonal(d), a, p, truncation, "z_closed_form")
    if seq is None:
        return math.inf
    return _sphere_closed_form(seq, p, d - 1.0, d + 1.0)


def hermite_closed_form(norms: CoeffLike, p: float, d: int, truncation: int = DEFAULT_TRUNCATION) -> float:
    """
    ‖Π₀u‖ + [Σ_{n≥1} n^{d/2−1} R_n^{p/2}]^{1/p} with R_n = Σ_{k≥n} ‖Π_k u‖²/k^{d/2}.

    Array input is indexed from level 0.
    """
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    family = HermiteOscillator(d)
    seq = norms if isinstance(norms, CoeffSeq) else FiniteSeq(norms, start=0)
    if seq.support_end is None:
        if not plp_membership(family, seq, p):
            warnings.warn(f"hermite_closed_form: sequence is not in PL^{p:g}", DivergenceWarning, stacklevel=2)
            return math.inf
        seq = seq.truncate(truncation)
    end = seq.support_end
    base = float(seq.values(np.array([0]))[0])
    if end < 1:
        return base
    k = np.arange(1, end + 1, dtype=float)
    tails = np.cumsum((seq.values(k) ** 2 / k ** (d / 2.0))[::-1])[::-1]
    return base + float(np.sum(k ** (d / 2.0 - 1.0) * tails ** (p / 2.0))) ** (1.0 / p)


def closed_form(family: Family, a: CoeffLike, p: float) -> float:
    """The closed form matching the family."""
    if isinstance(family, SphereHighest):
        return y_closed_form(a, p, family.d)
    if isinstance(family, SphereZonal):
        return z_closed_form(a, p, family.d)
    if isinstance(family, HermiteOscillator):
        return hermite_closed_form(a, p, family.d)
    raise DomainError(f"no closed form for {family.label}")


class EquivalenceRow(BaseModel):
    family: str
    d: int
    p: float
    n_max: int
    closed_form: float
    quadrature: float
    ratio: float


def closed_form_ratio(family: Family, norms: Sequence[float], p: float) -> EquivalenceRow:
    """closed form / quadrature for one finitely supported instance (norms from first_level)."""
    norms = np.asarray(norms, dtype=float)
    if isinstance(family, HermiteOscillator):
        cf = hermite_closed_form(norms, p, family.d)
    else:
        cf = closed_form(family, FiniteSeq(norms, start=family.first_level), p)
    quad = plp_norm_quadrature(family, norms, p)
    return EquivalenceRow(
        family=family_name(family),
        d=family.d,
        p=p,
        n_max=family.first_level + norms.size - 1,
        closed_form=cf,
        quadrature=quad,
        ratio=cf / quad if quad > 0 else math.nan,
    )


# ---------------------------------------------------------------------------
# Sobolev norms and critical exponents
# ---------------------------------------------------------------------------


def sobolev_norm(family: Family, norms: CoeffLike, s: float, n_max: Optional[int] = None) -> float:
    """
    (Σ_n w_n a_n²)^{1/2} with w_n = (1+n)^s for the oscillator and (1+n)^{2s}
    on the sphere and the torus.
    """
    values = _aligned(family, norms, n_max)
    n = np.arange(family.first_level, family.first_level + values.size, dtype=float)
    return float(np.sqrt(np.sum((1.0 + n) ** _sobolev_exponent(family, s) * values ** 2)))


def critical_exponent(family: Family, a: CoeffLike) -> float:
    """
    Bisection in p ∈ [2, p_max] of the membership predicate.

    Sphere families return the supremum of admissible p; the oscillator, whose
    inclusions run the other way, returns the infimum. +∞ means no transition
    was found in the tested range.
    """
    if not isinstance(family, (SphereHighest, SphereZonal, HermiteOscillator)):
        raise DomainError(f"critical exponent is defined for sphere and oscillator families, not {family.label}")
    consts = get_constants().plp
    a = as_sequence(a, family.first_level)
    lo, hi = 2.0, consts.critical_p_max
    increasing = isinstance(family, HermiteOscillator)

    def admissible(p: float) -> bool:
        return plp_membership(family, a, p)

    tol = consts.critical_tol
    if increasing:
        if admissible(lo):
            return lo
        if not admissible(hi):
            return math.inf
        if not admissible(hi - tol):
            return hi
    else:
        if admissible(hi):
            return math.inf
        # a cut-off sitting at an endpoint is returned exactly
        if not admissible(lo + tol):
            return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        # keep lo on the side of the 2-end, hi on the p_max side
        if admissible(mid) != increasing:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Interpolation defect and Hölder witness
# ---------------------------------------------------------------------------


def thetas(p1: float, p: float, p2: float) -> Tuple[float, float]:
    """θ₁/p₁ + θ₂/p₂ = 1/p with θ₁ + θ₂ = 1."""
    span = 1.0 / p1 - 1.0 / p2
    theta1 = (1.0 / p - 1.0 / p2) / span
    return theta1, 1.0 - theta1


def _log_norm(phi: SampledFunction, p: float) -> float:
    magnitude = np.abs(phi.values)
    positive = magnitude > 0
    logs = np.log(magnitude[positive])
    top = logs.max()
    return (top * p + math.log(float(np.dot(phi.rule.weights[positive], np.exp(p * (logs - top)))))) / p


def _log_quotient(phi: SampledFunction, p1: float, p2: float, p: float, log_n1: float, log_n2: float) -> float:
    t1, t2 = thetas(p1, p, p2)
    return t1 * log_n1 + t2 * log_n2 - _log_norm(phi, p)


class DefectResult(BaseModel):
    value: float = Field(description="Q(φ, [p1, p2])")
    argmax: float
    grid_size: int


def interpolation_defect_details(
    phi: SampledFunction,
    p1: float,
    p2: float,
    grid: Optional[int] = None,
    extra: Sequence[float] = (),
) -> DefectResult:
    """
    sup over p ∈ [p1, p2] of ‖φ‖_{p1}^{θ1}‖φ‖_{p2}^{θ2}/‖φ‖_p.

    The sup is taken over a grid uniform in 1/p, the points in `extra`, and a
    bounded scalar maximisation around the best grid point.
    """
    if not 1.0 <= p1 < p2 < math.inf:
        raise DomainError(f"interpolation defect needs 1 <= p1 < p2 < inf, got [{p1}, {p2}]")
    if not np.any(phi.values):
        raise DomainError("interpolation defect of the zero function")
    grid = grid or get_constants().plp.defect_grid
    log_n1, log_n2 = _log_norm(phi, p1), _log_norm(phi, p2)
    inverse = np.linspace(1.0 / p2, 1.0 / p1, grid)
    candidates = sorted({*(1.0 / inverse), *(x for x in extra if p1 <= x <= p2)})
    values = [_log_quotient(phi, p1, p2, p, log_n1, log_n2) for p in candidates]
    best = int(np.argmax(values))
    best_p, best_value = candidates[best], values[best]
    lo = candidates[max(best - 1, 0)]
    hi = candidates[min(best + 1, len(candidates) - 1)]
    if hi > lo:
        refined = minimize_scalar(
            lambda p: -_log_quotient(phi, p1, p2, p, log_n1, log_n2),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-10},
        )
        if -refined.fun > best_value:
            best_p, best_value = float(refined.x), float(-refined.fun)
    # Hölder makes the quotient >= 1; rounding may not
    value = max(math.exp(best_value), 1.0)
    return DefectResult(value=value, argmax=best_p, grid_size=len(candidates))


def interpolation_defect(
    phi: SampledFunction, p1: float, p2: float, grid: Optional[int] = None, extra: Sequence[float] = ()
) -> float:
    return interpolation_defect_details(phi, p1, p2, grid, extra).value


def interpolation_lower_bound(
    phi: SampledFunction, p1: float, p2: float, p: float, defect: Optional[float] = None
) -> Tuple[float, float]:
    """(‖φ‖_{p1}^{θ1}‖φ‖_{p2}^{θ2}/Q, ‖φ‖_p); the first never exceeds the second."""
    defect = interpolation_defect(phi, p1, p2, extra=(p,)) if defect is None else defect
    t1, t2 = thetas(p1, p, p2)
    lower = math.exp(t1 * _log_norm(phi, p1) + t2 * _log_norm(phi, p2)) / defect
    return lower, lp_norm(phi, p)


def gaussian_lp_norm(p: float) -> float:
    """‖e^{−x²}‖_{L^p(R)} = (π/p)^{1/(2p)}."""
    return (math.pi / p) ** (1.0 / (2.0 * p))


def conjugate(p: float) -> float:
    return math.inf if p == 1.0 else p / (p - 1.0)


def witness_exponent(p1: float, p2: float) -> float:
    """Midpoint of the admissible interval [1 + p1/q2, 1 + p2/q1]."""
    if 1.0 / p1 + 1.0 / p2 > 1.0 + 1e-15:
        raise DomainError(f"Hölder witness needs 1/p1 + 1/p2 <= 1, got p1={p1}, p2={p2}")
    lo = 1.0 + p1 / conjugate(p2)
    hi = 1.0 + p2 / conjugate(p1)
    if lo > hi:
        raise DomainError(f"empty witness interval [{lo:.6g}, {hi:.6g}]")
    return 0.5 * (lo + hi)


class WitnessResult(BaseModel):
    """ψ = |φ|^r/(φ ∫|φ|^r) and the five inequalities it satisfies."""

    model_config = {"arbitrary_types_allowed": True}

    psi: np.ndarray = Field(repr=False)
    r: float
    defect: float
    pairing: float = Field(description="∫ φψ")
    product_1: float = Field(description="‖φ‖_{p1}‖ψ‖_{q1}")
    product_2: float = Field(description="‖φ‖_{p2}‖ψ‖_{q2}")
    bound: float = Field(description="Q^r")
    pointwise_excess_1: float = Field(description="max of the pointwise bound's lhs − rhs at q1")
    pointwise_excess_2: float = Field(description="max of the pointwise bound's lhs − rhs at q2")

    def passed(self, slack: float = 1e-6) -> bool:
        return (
            abs(self.pairing - 1.0) <= slack
            and self.product_1 <= self.bound + slack
            and self.product_2 <= self.bound + slack
            and self.pointwise_excess_1 <= slack
            and self.pointwise_excess_2 <= slack
        )


def holder_witness(phi: SampledFunction, p1: float, p2: float) -> WitnessResult:
    r = witness_exponent(p1, p2)
    q1, q2 = conjugate(p1), conjugate(p2)
    defect = interpolation_defect(phi, p1, p2, extra=(r, (r - 1.0) * q1, (r - 1.0) * q2))
    weights = phi.rule.weights
    values = phi.values
    magnitude = np.abs(values)
    integral_r = float(np.dot(weights, magnitude ** r))
    nonzero = magnitude > 0
    psi = np.zeros_like(values)
    psi[nonzero] = magnitude[nonzero] ** r / (values[nonzero] * integral_r)
    psi_fn = SampledFunction(phi.rule, psi)

    def pointwise_excess(q: float) -> float:
        lhs = np.abs(psi) ** q / float(np.dot(weights, np.abs(psi) ** q))
        rhs = defect ** ((r - 1.0) * q) * (
            magnitude ** p1 / float(np.dot(weights, magnitude ** p1))
            + magnitude ** p2 / float(np.dot(weights, magnitude ** p2))
        )
        return float(np.max(lhs - rhs))

    return WitnessResult(
        psi=psi,
        r=r,
        defect=defect,
        pairing=float(np.real(np.dot(weights, values * psi))),
        product_1=lp_norm(phi, p1) * lp_norm(psi_fn, q1),
        product_2=lp_norm(phi, p2) * lp_norm(psi_fn, q2),
        bound=defect ** r,
        pointwise_excess_1=pointwise_excess(q1),
        pointwise_excess_2=pointwise_excess(q2),
    )


# ---------------------------------------------------------------------------
# Hypothesis checks
# ---------------------------------------------------------------------------


class HypothesisReport(BaseModel):
    """Weak-L^p envelope, its strong norm, interpolation defects and Hölder products."""

    family: str
    d: int
    p: float
    q: float
    p1: float
    p2: float
    N: int
    weak_N: float
    weak_2N: float
    weak_stability: float = Field(description="|weak_2N/weak_N − 1|")
    lp_N: float
    lp_2N: float
    lp_growth: float = Field(description="lp_2N/lp_N")
    defect_max: float = Field(description="max_n Q(√e(n,·), [p1, p2]) over n ≤ N")
    product_max_N: float = Field(description="max_n ‖√e_n‖_p‖√e_n‖_q/d_n over n ≤ N")
    product_max_2N: float
    product_growth: float
    envelope_ok: Optional[bool] = Field(default=None, description="oscillator envelope on the grid")


def hypothesis_checks(
    family: Family,
    p: float,
    N: int,
    p1: float = 2.0,
    p2: Optional[float] = None,
) -> HypothesisReport:
    """
    (a) weak-L^p quasinorm of g_N = sup_{n≤N} √e(n,·)/‖√e(n,·)‖_p and its stability
    as N doubles; (b) ‖g_N‖_p; (c) the largest interpolation defect; (d) the
    largest Hölder product ‖√e‖_p‖√e‖_q/d_n.
    """
    if p <= 1:
        raise DomainError(f"hypothesis checks need p > 1, got {p}")
    p2 = 2.0 * p if p2 is None else p2
    q = conjugate(p)
    top = 2 * N
    rule = family.density_rule(top, 2 * family.density_start(top, max(p, p2)))
    table = np.sqrt(np.maximum(family.spectral_levels(top, rule), 0.0))
    levels = list(family.levels(top))
    weights = rule.weights
    norms_p = np.dot(table ** p, weights) ** (1.0 / p)
    norms_q = np.dot(table ** q, weights) ** (1.0 / q)
    dims = np.array([family.dim(n) for n in levels], dtype=float)
    products = norms_p * norms_q / dims
    scaled = table / norms_p[:, None]
    upto_n = sum(1 for n in levels if n <= N)

    def envelope(rows: int) -> SampledFunction:
        return SampledFunction(rule, scaled[:rows].max(axis=0))

    g_n, g_2n = envelope(upto_n), envelope(len(levels))
    weak_n, weak_2n = weak_lp_quasinorm(g_n, p), weak_lp_quasinorm(g_2n, p)
    lp_n, lp_2n = lp_norm(g_n, p), lp_norm(g_2n, p)
    defects = [
        interpolation_defect(SampledFunction(rule, table[i]), p1, p2) for i in range(upto_n) if np.any(table[i])
    ]
    envelope_ok = None
    if isinstance(family, HermiteOscillator):
        consts = get_constants()
        r = rule.coords["r"]
        with np.errstate(divide="ignore"):
            bound = consts.plp.hypothesis_envelope_C * (
                np.power(r, -family.d / p) + np.exp(-0.5 * consts.spectral.tail_gamma * r * r)
            )
        envelope_ok = bool(np.all(g_2n.values <= bound))
    report = HypothesisReport(
        family=family_name(family),
        d=family.d,
        p=p,
        q=q,
        p1=p1,
        p2=p2,
        N=N,
        weak_N=weak_n,
        weak_2N=weak_2n,
        weak_stability=abs(weak_2n / weak_n - 1.0),
        lp_N=lp_n,
        lp_2N=lp_2n,
        lp_growth=lp_2n / lp_n,
        defect_max=max(defects) if defects else 1.0,
        product_max_N=float(products[:upto_n].max()),
        product_max_2N=float(products.max()),
        product_growth=float(products.max() / products[:upto_n].max()),
        envelope_ok=envelope_ok,
    )
    logger.debug(f"hypothesis_checks {family.label} p={p} N={N}: {report}")
    return report


# ---------------------------------------------------------------------------
# Duality
# ---------------------------------------------------------------------------


class DualityResult(BaseModel):
    pairing: float = Field(description="∫ Σ a_n b_n e(n,·)/d_n")
    middle: float = Field(description="∫ (Σ a_n² e/d_n)^{1/2}(Σ b_n² e/d_n)^{1/2}")
    bound: float = Field(description="‖a‖_{PL^p}‖b‖_{PL^q}")
    passed: bool


def duality_pairing(family: Family, u_norms: Sequence[float], w_norms: Sequence[float], p: float) -> DualityResult:
    """Σ‖u_n‖‖w_n‖ ≤ ∫√A√B ≤ ‖u‖_{PL^p}‖w‖_{PL^q}, all on one rule."""
    u = np.asarray(u_norms, dtype=float)
    w = np.asarray(w_norms, dtype=float)
    if u.shape != w.shape:
        raise DomainError("both sequences need the same number of levels")
    q = conjugate(p)
    n_max = family.first_level + u.size - 1
    rule = family.density_rule(n_max, 2 * family.density_start(n_max, max(p, q)))
    table = family.spectral_levels(n_max, rule)
    dims = np.array([family.dim(n) for n in family.levels(n_max)], dtype=float)
    a_field = np.maximum((u * u / dims) @ table, 0.0)
    b_field = np.maximum((w * w / dims) @ table, 0.0)
    pairing = rule.integrate((u * w / dims) @ table)
    middle = rule.integrate(np.sqrt(a_field * b_field))
    bound = rule.integrate(a_field ** (p / 2.0)) ** (1.0 / p) * rule.integrate(b_field ** (q / 2.0)) ** (1.0 / q)
    tol = 1e-8 * max(bound, 1e-300)
    return DualityResult(
        pairing=pairing, middle=middle, bound=bound, passed=bool(pairing <= middle + tol and middle <= bound + tol)
    )


# ---------------------------------------------------------------------------
# Embeddings
# ---------------------------------------------------------------------------

SWEEP_COLUMNS = ("family", "d", "p", "s_or_param", "lhs", "rhs", "ratio", "band_lo", "band_hi", "pass")


class SweepRow(BaseModel):
    model_config = {"populate_by_name": True}

    family: str
    d: int
    p: float
    s_or_param: float
    lhs: float
    rhs: float
    ratio: float
    band_lo: float
    band_hi: float
    passed: bool = Field(alias="pass")
    kind: str = Field(default="power", description="power, lacunary or random")
    expected: str = Field(default="embed", description="embed or no-embed")


def critical_sobolev_exponent(family: Family, p: float) -> float:
    """Smallest s with H^s ⊂ PL^p; the endpoint itself is included."""
    d = family.d
    if isinstance(family, SphereHighest):
        return (d - 1) / 2.0 * (0.5 - 1.0 / p)
    if isinstance(family, SphereZonal):
        return (d - 1) / 2.0 - d / p
    if isinstance(family, HermiteOscillator):
        return -d * (0.5 - 1.0 / p)
    raise DomainError(f"no Sobolev exponent for {family.label}")


def _witness(family: Family, s: float, eta: float) -> PowerLogSeq:
    """Power law inside H^s with margin η."""
    if isinstance(family, HermiteOscillator):
        return PowerLogSeq(sigma=(s + 1.0 + 2.0 * eta) / 2.0)
    return PowerLogSeq(sigma=s + 0.5 + eta)


def _finite_pair(family: Family, seq: CoeffSeq, s: float, p: float, n_max: int) -> Tuple[float, float]:
    truncated = seq.truncate(n_max)
    lhs = sobolev_norm(family, truncated.values(np.arange(family.first_level, n_max + 1)), s)
    if isinstance(family, HermiteOscillator):
        rhs = hermite_closed_form(truncated, p, family.d)
    else:
        rhs = closed_form(family, FiniteSeq(truncated.values(np.arange(1, n_max + 1)), start=1), p)
    return lhs, rhs


def check_sweep_arguments(family: Family, p: float, n_max: int = 4096):
    """Raise DomainError unless (family, p, n_max) describe a sweep that can be run."""
    if p <= 2:
        raise DomainError(f"embedding sweep needs p > 2, got {p}")
    if isinstance(family, SphereZonal) and p <= _critical_zonal(family.d):
        raise DomainError(f"zonal embedding sweep needs p > {_critical_zonal(family.d):g}")
    if n_max < 16:
        raise DomainError(f"embedding sweep needs n_max >= 16, got {n_max}")
    critical_sobolev_exponent(family, p)


def embedding_sweep(
    family: Family,
    p: float,
    n_max: int = 4096,
    random_instances: int = 20,
    seed: int = 0,
) -> List[SweepRow]:
    """
    Classify (family, p, s) cells on s* + 0.25k, k = −4 … 4, as embed / no-embed.

    Embed cells carry a power-law witness that must be a PL^p member with a
    bounded closed-form/Sobolev ratio; no-embed cells carry a witness inside
    H^s whose ratio keeps growing with the truncation and which the
    membership rule rejects. Sphere families add the lacunary witness on
    J = {2^k} at s* − 1/4; the oscillator adds random finite instances at s*.
    """
    check_sweep_arguments(family, p, n_max)
    consts = get_constants().plp
    eta = consts.embedding_eta
    s_star = critical_sobolev_exponent(family, p)
    oscillator = isinstance(family, HermiteOscillator)
    name = family_name(family)
    rows = []
    for k in range(-4, 5):
        s = s_star + 0.25 * k
        embeds = k >= 0
        witness = _witness(family, s, eta)
        member = plp_membership(family, witness, p)
        inside = sobolev_membership(family, witness, s)
        if embeds:
            lhs, rhs = _finite_pair(family, witness, s, p, n_max)
            ratio = rhs / lhs
            band = (0.0, consts.embedding_ratio_max)
            passed = bool(member and inside and ratio <= band[1])
        else:
            lhs_small, rhs_small = _finite_pair(family, witness, s, p, n_max // 4)
            lhs, rhs = _finite_pair(family, witness, s, p, n_max)
            ratio = rhs / lhs
            band = (rhs_small / lhs_small, math.inf)
            passed = bool((not member) and inside and ratio > band[0])
        rows.append(
            SweepRow(
                family=name, d=family.d, p=p, s_or_param=s, lhs=lhs, rhs=rhs, ratio=ratio,
                band_lo=band[0], band_hi=band[1], passed=passed, kind="power",
                expected="embed" if embeds else "no-embed",
            )
        )
    if oscillator:
        rng = np.random.default_rng(seed)
        worst = None
        for _ in range(random_instances):
            levels = int(rng.integers(1, 41))
            norms = rng.random(levels + 1) * (rng.random(levels + 1) < 0.6)
            lhs = sobolev_norm(family, norms, s_star)
            if lhs == 0.0:
                continue
            rhs = hermite_closed_form(norms, p, family.d)
            if worst is None or rhs / lhs > worst[2]:
                worst = (lhs, rhs, rhs / lhs)
        lhs, rhs, ratio = worst
        rows.append(
            SweepRow(
                family=name, d=family.d, p=p, s_or_param=s_star, lhs=lhs, rhs=rhs, ratio=ratio,
                band_lo=0.0, band_hi=consts.embedding_ratio_max, passed=bool(ratio <= consts.embedding_ratio_max),
                kind="random", expected="embed",
            )
        )
    else:
        witness = PowerLogSeq(sigma=s_star, lacunary=True)
        # one grid step below s*
        s = s_star - 0.25
        lhs_small, rhs_small = _finite_pair(family, witness, s, p, n_max // 4)
        lhs, rhs = _finite_pair(family, witness, s, p, n_max)
        passed = bool(
            sobolev_membership(family, witness, s)
            and not plp_membership(family, witness, p)
            and rhs / lhs > rhs_small / lhs_small
        )
        rows.append(
            SweepRow(
                family=name, d=family.d, p=p, s_or_param=s, lhs=lhs, rhs=rhs, ratio=rhs / lhs,
                band_lo=rhs_small / lhs_small, band_hi=math.inf, passed=passed, kind="lacunary",
                expected="no-embed",
            )
        )
    return rows


def write_sweep_csv(rows: Sequence[SweepRow], path: str):
    """CSV with the fixed sweep columns, '.' decimals and repr floats."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            data = row.model_dump(by_alias=True)
            writer.writerow([repr(data[c]) if isinstance(data[c], float) else data[c] for c in SWEEP_COLUMNS])
    logger.info(f"📁 Sweep written to {path} ({len(rows)} rows)")


# ---------------------------------------------------------------------------
# Shift counterexample on L^p(R, ℓ²)
# ---------------------------------------------------------------------------


def r_boundedness_counterexample(p: float, N: int) -> Tuple[float, float]:
    """
    f_n = 1_{[n, n+1)}, n < N, and the shifts T_n f_n = 1_{[0, 1)}.

    Returns ∫(Σ|T_n f_n|²)^{p/2} = N^{p/2} and ∫(Σ|f_n|²)^{p/2} = N, computed
    cell by cell on the unit-interval partition of [0, N).
    """
    if p < 1 or N < 1:
        raise DomainError(f"counterexample needs p >= 1 and N >= 1, got p={p}, N={N}")
    cells = np.arange(N)
    indicators = (cells[None, :] == np.arange(N)[:, None]).astype(float)
    shifted = np.zeros_like(indicators)
    shifted[:, 0] = 1.0

    def lp_l2_power(family: np.ndarray) -> float:
        return float(np.sum(np.sum(family ** 2, axis=0) ** (p / 2.0)))

    return lp_l2_power(shifted), lp_l2_power(indicators)
