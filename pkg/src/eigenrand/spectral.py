"""
Spectral functions of the concrete eigenspace families.

A family is a sequence of eigenspaces E_n with dimension d_n and spectral
function e(n, x) = Σ_j |φ_{n,j}(x)|². Four families are implemented:

* HermiteOscillator(d): eigenspaces of −Δ + |x|² on R^d, radial e_d(n, r)
* SphereHighest(d): the highest-weight harmonics Y_n on S^d (dimension 1)
* SphereZonal(d): the zonal harmonics Z_n on S^d, L²-normalised (dimension 1)
* TorusFourier: the exponentials e^{inx} on the circle (dimension 1)
"""
import csv
import hashlib
import logging
import math
import os
import threading
from abc import ABC, abstractmethod
from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field
from scipy.linalg import toeplitz

from eigenrand.constants import get_constants
from eigenrand.errors import DomainError, GridMismatchError
from eigenrand.measure import (
    QuadratureRule,
    band_rule,
    box_rule,
    integrate_band,
    integrate_zonal,
    radial_rule,
    refine_until_stable,
    torus_rule,
    zonal_rule,
)
from eigenrand.specfun import (
    hermite_table,
    jacobi_band_constant,
    jacobi_table,
    y_abs,
    y_norm_const,
    zonal_norm_sq,
    zonal_z,
)

logger = logging.getLogger(__name__)

METHODS = ("hermite-at-origin", "spectral-at-origin")
_MEMO_SIZE = 64


def dim_e(d: int, n: int) -> int:
    """dim E_{d,n} = (n+1)···(n+d−1)/(d−1)!, the number of multi-indices of length d summing to n."""
    if d < 1 or n < 0:
        raise DomainError(f"dim_e needs d >= 1 and n >= 0, got d={d}, n={n}")
    value = math.comb(n + d - 1, d - 1)
    if value > np.iinfo(np.int64).max:
        raise OverflowError(f"dim_e({d}, {n}) exceeds the 64-bit integer range")
    return value


# ---------------------------------------------------------------------------
# Oscillator spectral function
# ---------------------------------------------------------------------------


class _SpectralMemo:
    """LRU table cache keyed by (d, method, grid digest); inserts are locked."""

    def __init__(self, size: int = _MEMO_SIZE):
        self._tables: "OrderedDict[Tuple[int, str, str], np.ndarray]" = OrderedDict()
        self._lock = threading.Lock()
        self._size = size

    def get(self, key, rows: int) -> Optional[np.ndarray]:
        with self._lock:
            table = self._tables.get(key)
            if table is None or table.shape[0] < rows:
                return None
            self._tables.move_to_end(key)
            return table[:rows]

    def put(self, key, table: np.ndarray):
        table.setflags(write=False)
        with self._lock:
            current = self._tables.get(key)
            if current is None or current.shape[0] < table.shape[0]:
                self._tables[key] = table
            self._tables.move_to_end(key)
            while len(self._tables) > self._size:
                self._tables.popitem(last=False)

    def clear(self):
        with self._lock:
            self._tables.clear()


_MEMO = _SpectralMemo()


def clear_spectral_cache():
    _MEMO.clear()


def _grid_digest(r: np.ndarray) -> str:
    return hashlib.sha1(np.ascontiguousarray(r, dtype=float).tobytes()).hexdigest()


def _lower_toeplitz(column: np.ndarray) -> np.ndarray:
    return toeplitz(column, np.zeros_like(column))


def osc_spectral_table(
    d: int, n_max: int, r: Union[float, Sequence[float], np.ndarray], method: str = "hermite-at-origin"
) -> np.ndarray:
    """
    e_d(n, (r, 0, …, 0)) for n = 0 … n_max, shape (n_max + 1, len(r)).

    Both methods use e_d(n, ·) = Σ_k e_{d−1}(k, ·) h_{n−k}(0)² starting from
    e_1(n, x) = h_n(x)²:

    * "hermite-at-origin" keeps the spectral values at r and convolves d − 1
      times with the Hermite values at the origin;
    * "spectral-at-origin" builds e_{d−1}(·, 0) first and convolves it once
      with h_k(r)².
    """
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    if n_max < 0:
        raise DomainError(f"level must be >= 0, got {n_max}")
    if method not in METHODS:
        raise DomainError(f"unknown recursion {method!r}, expected one of {METHODS}")
    r = np.atleast_1d(np.asarray(r, dtype=float)).ravel()
    if np.any(r < 0.0):
        raise DomainError("radius must be >= 0")

    key = (d, method, _grid_digest(r))
    cached = _MEMO.get(key, n_max + 1)
    if cached is not None:
        return cached

    h0_sq = hermite_table(n_max, np.zeros(1))[:, 0] ** 2
    values = hermite_table(n_max, r) ** 2
    if d > 1:
        if method == "hermite-at-origin":
            step = _lower_toeplitz(h0_sq)
            for _ in range(d - 1):
                values = step @ values
        else:
            at_origin = h0_sq
            step = _lower_toeplitz(h0_sq)
            for _ in range(d - 2):
                at_origin = step @ at_origin
            values = _lower_toeplitz(at_origin) @ values
    _MEMO.put(key, values)
    return _MEMO.get(key, n_max + 1)


def osc_spectral(d: int, n: int, r: Union[float, np.ndarray], method: str = "hermite-at-origin"):
    """e_d(n, x) at |x| = r (rotation invariant)."""
    if n < 0:
        raise DomainError(f"level must be >= 0, got {n}")
    values = osc_spectral_table(d, n, r, method)[n]
    return float(values[0]) if np.ndim(r) == 0 else values.reshape(np.shape(r))


class ConcentrationReport(BaseModel):
    """Measured two-sided bands of e_d(n, r)/n^{d/2−1}."""

    d: int
    n: int
    alpha: float
    c0: float
    gamma: float
    r_inner: float = Field(description="C0/√(2n+1)")
    r_outer: float = Field(description="α√(2n+1)")
    min_ratio: float = Field(description="min of e_d/n^{d/2−1} on the annulus")
    max_ratio: float = Field(description="max of e_d/n^{d/2−1} on the annulus")
    bulk_max: float = Field(description="max of e_d/n^{d/2−1} for r ≤ √(2n+1)")
    tail_max: float = Field(description="max of e_d e^{γr²}/n^{d/2−1} for r ≥ √(2n+1)")


def osc_concentration_report(
    d: int,
    n: int,
    alpha: Optional[float] = None,
    c0: Optional[float] = None,
    points: int = 400,
) -> ConcentrationReport:
    consts = get_constants().spectral
    alpha = consts.concentration_alpha if alpha is None else alpha
    c0 = consts.concentration_C0 if c0 is None else c0
    if n < consts.concentration_n0:
        raise DomainError(f"concentration report needs n >= {consts.concentration_n0}, got {n}")
    if not 0.0 < alpha < math.sin(0.25):
        raise DomainError(f"alpha must lie in (0, sin(1/4)), got {alpha}")
    big_n = 2 * n + 1
    r_inner, r_outer = c0 / math.sqrt(big_n), alpha * math.sqrt(big_n)
    if r_inner >= r_outer:
        raise DomainError(f"empty annulus [{r_inner:.4g}, {r_outer:.4g}] for n={n}")
    turning = math.sqrt(big_n)
    annulus = np.linspace(r_inner, r_outer, points)
    bulk = np.linspace(0.0, turning, points)
    tail = np.linspace(turning, turning + get_constants().measure.radial_margin, points)
    table = osc_spectral(d, n, np.concatenate([annulus, bulk, tail]))
    scale = float(n) ** (d / 2.0 - 1.0)
    ratio = table / scale
    on_annulus, on_bulk, on_tail = np.split(ratio, [points, 2 * points])
    report = ConcentrationReport(
        d=d,
        n=n,
        alpha=alpha,
        c0=c0,
        gamma=consts.tail_gamma,
        r_inner=r_inner,
        r_outer=r_outer,
        min_ratio=float(on_annulus.min()),
        max_ratio=float(on_annulus.max()),
        bulk_max=float(on_bulk.max()),
        tail_max=float(np.max(on_tail * np.exp(consts.tail_gamma * tail * tail))),
    )
    logger.debug(f"concentration d={d} n={n}: {report.min_ratio:.4g}..{report.max_ratio:.4g}")
    return report


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------


class Family(ABC):
    """A sequence of eigenspaces with their spectral functions and bases."""

    tag: str = ""
    first_level: int = 1

    def __init__(self, d: int):
        self.d = d

    @property
    def label(self) -> str:
        return f"{self.tag}({self.d})"

    def __repr__(self) -> str:
        return self.label

    def levels(self, n_max: int) -> range:
        return range(self.first_level, n_max + 1)

    def dim(self, n: int) -> int:
        return 1

    def check_level(self, n: int):
        if n < self.first_level:
            raise DomainError(f"{self.label} has no level {n}")

    # --- spectral function -------------------------------------------------

    @abstractmethod
    def density_rule(self, n_max: int, resolution: int) -> QuadratureRule:
        """Rule on which e(n, ·), n ≤ n_max, is integrated."""

    @abstractmethod
    def density_start(self, n_max: int, p: float) -> int:
        """First resolution tried when integrating e(n, ·)^{p/2}."""

    @abstractmethod
    def spectral(self, n: int, rule: QuadratureRule) -> np.ndarray:
        """e(n, ·) at the nodes of a density rule."""

    def spectral_levels(self, n_max: int, rule: QuadratureRule) -> np.ndarray:
        """Rows e(n, ·) for n in levels(n_max)."""
        return np.stack([self.spectral(n, rule) for n in self.levels(n_max)])

    def integrate_levels(
        self,
        n_max: int,
        combine: Callable[[np.ndarray], np.ndarray],
        p: float = 2.0,
        what: str = "",
    ) -> float:
        """∫ combine(E) where E holds the rows e(n, ·), n in levels(n_max), refined until stable."""

        def evaluate(resolution: int) -> Tuple[float, int]:
            rule = self.density_rule(n_max, resolution)
            return rule.integrate(combine(self.spectral_levels(n_max, rule))), rule.size

        return refine_until_stable(evaluate, self.density_start(n_max, p), what or self.label)

    # --- series synthesis --------------------------------------------------

    @abstractmethod
    def series_rule(self, n_max: int, p: float = 2.0) -> QuadratureRule:
        """Grid on which random series truncated at n_max are sampled."""

    @abstractmethod
    def basis(self, n: int, rule: QuadratureRule) -> np.ndarray:
        """Orthonormal basis of E_n at the nodes, shape (dim(n), rule.size)."""

    def synthesize(self, coeffs: Sequence[np.ndarray], rule: QuadratureRule) -> np.ndarray:
        """Σ_n Σ_j v_{n,j} φ_{n,j} at the nodes; coeffs[i] belongs to level first_level + i."""
        total = np.zeros(rule.size, dtype=complex)
        for offset, vector in enumerate(coeffs):
            n = self.first_level + offset
            total += np.asarray(vector) @ self.basis(n, rule)
        return total

    def _expect_domain(self, rule: QuadratureRule, *domains: str):
        if rule.domain not in domains:
            raise GridMismatchError(f"{self.label} cannot be evaluated on a {rule.domain!r} rule")


class HermiteOscillator(Family):
    """Eigenspaces of the harmonic oscillator on R^d."""

    tag = "HermiteOscillator"
    first_level = 0

    def __init__(self, d: int):
        if d < 1:
            raise DomainError(f"oscillator dimension must be >= 1, got {d}")
        super().__init__(d)

    def dim(self, n: int) -> int:
        return dim_e(self.d, n)

    def radius(self, n_max: int) -> float:
        return math.sqrt(2 * n_max + 1) + get_constants().measure.radial_margin

    def density_rule(self, n_max: int, resolution: int) -> QuadratureRule:
        return radial_rule(self.d, self.radius(n_max), resolution)

    def density_start(self, n_max: int, p: float) -> int:
        return max(8, int(math.ceil(self.radius(n_max) * math.sqrt(2 * n_max + 1) / 8.0)))

    def spectral(self, n: int, rule: QuadratureRule) -> np.ndarray:
        self._expect_domain(rule, "radial")
        return osc_spectral_table(self.d, n, rule.coords["r"])[n]

    def spectral_levels(self, n_max: int, rule: QuadratureRule) -> np.ndarray:
        self._expect_domain(rule, "radial")
        return np.asarray(osc_spectral_table(self.d, n_max, rule.coords["r"]))

    def series_rule(self, n_max: int, p: float = 2.0) -> QuadratureRule:
        if self.d > 2:
            raise DomainError("oscillator series are sampled on R and R² only")
        half_width = math.sqrt(2 * n_max + 3) + 4.0
        nodes = max(8, int(math.ceil(max(p, 2.0) * math.sqrt(2 * n_max + 1) / 2.0)) + 4)
        return box_rule(half_width, nodes, dim=self.d)

    def basis(self, n: int, rule: QuadratureRule) -> np.ndarray:
        self.check_level(n)
        if self.d == 1:
            self._expect_domain(rule, "line")
            return hermite_table(n, rule.coords["x"])[n][None, :]
        self._expect_domain(rule, "box")
        hx = hermite_table(n, rule.coords["x"])
        hy = hermite_table(n, rule.coords["y"])
        return np.stack([hx[i] * hy[n - i] for i in range(n + 1)])

    def synthesize(self, coeffs: Sequence[np.ndarray], rule: QuadratureRule) -> np.ndarray:
        """Tensor synthesis S = H_xᵀ C H_y with C[i, n − i] = v_{n,i}."""
        n_max = len(coeffs) - 1
        if self.d == 1:
            self._expect_domain(rule, "line")
            table = hermite_table(n_max, rule.coords["x"])
            vector = np.array([np.asarray(v).ravel()[0] for v in coeffs])
            return vector @ table
        self._expect_domain(rule, "box")
        axis = rule.axes[0]
        table = hermite_table(n_max, axis)
        dtype = np.result_type(*[np.asarray(v).dtype for v in coeffs], float)
        grid = np.zeros((n_max + 1, n_max + 1), dtype=dtype)
        for n, vector in enumerate(coeffs):
            vector = np.asarray(vector)
            if vector.size != n + 1:
                raise DomainError(f"level {n} needs {n + 1} coefficients, got {vector.size}")
            i = np.arange(n + 1)
            grid[i, n - i] = vector
        return (table.T @ grid @ table).ravel()


class SphereHighest(Family):
    """Highest-weight harmonics Y_n = c_{d,n}(x₁ + ix₂)^n on S^d."""

    tag = "SphereHighest"

    def __init__(self, d: int):
        if d < 2:
            raise DomainError(f"sphere dimension must be >= 2, got {d}")
        super().__init__(d)

    def density_rule(self, n_max: int, resolution: int) -> QuadratureRule:
        return band_rule(self.d, resolution)

    def density_start(self, n_max: int, p: float) -> int:
        return max(16, int(math.ceil(n_max * max(p, 2.0) / 4.0)) + 2)

    def spectral(self, n: int, rule: QuadratureRule) -> np.ndarray:
        self._expect_domain(rule, "band")
        self.check_level(n)
        return y_abs(self.d, n, rule.coords["rho"]) ** 2

    def series_rule(self, n_max: int, p: float = 2.0) -> QuadratureRule:
        q = max(p, 2.0)
        t_nodes = max(24, int(math.ceil(n_max * q / 2.0)) + 8)
        theta_points = max(8, int(math.ceil(q)) * (n_max + 1) + 1)
        return band_rule(self.d, t_nodes, theta_points)

    def basis(self, n: int, rule: QuadratureRule) -> np.ndarray:
        self._expect_domain(rule, "band")
        self.check_level(n)
        rho, theta = rule.coords["rho"], rule.coords["theta"]
        return (y_abs(self.d, n, rho) * np.exp(1j * n * theta))[None, :]

    def synthesize(self, coeffs: Sequence[np.ndarray], rule: QuadratureRule) -> np.ndarray:
        self._expect_domain(rule, "band")
        levels = np.arange(self.first_level, self.first_level + len(coeffs))
        vector = np.array([np.asarray(v).ravel()[0] for v in coeffs])
        consts = np.array([y_norm_const(self.d, int(n)) for n in levels])
        rho, theta = rule.coords["rho"], rule.coords["theta"]
        waves = np.power.outer(rho, levels) * np.exp(1j * np.multiply.outer(theta, levels))
        return waves @ (consts * vector)


class SphereZonal(Family):
    """L²-normalised zonal harmonics Z_n/‖Z_n‖ on S^d."""

    tag = "SphereZonal"

    def __init__(self, d: int):
        if d < 2:
            raise DomainError(f"sphere dimension must be >= 2, got {d}")
        super().__init__(d)
        self.alpha = (d - 2) / 2.0

    def density_rule(self, n_max: int, resolution: int) -> QuadratureRule:
        return zonal_rule(self.d, resolution)

    def density_start(self, n_max: int, p: float) -> int:
        return max(4, n_max)

    def _normalised(self, n_max: int, theta: np.ndarray) -> np.ndarray:
        table = jacobi_table(n_max, self.alpha, np.cos(theta))[self.first_level:]
        levels = np.arange(self.first_level, n_max + 1)
        scale = np.sqrt(levels / np.array([zonal_norm_sq(self.d, int(n)) for n in levels]))
        return scale[:, None] * table

    def spectral(self, n: int, rule: QuadratureRule) -> np.ndarray:
        self._expect_domain(rule, "zonal")
        self.check_level(n)
        return zonal_z(self.d, n, rule.coords["theta"]) ** 2 / zonal_norm_sq(self.d, n)

    def spectral_levels(self, n_max: int, rule: QuadratureRule) -> np.ndarray:
        self._expect_domain(rule, "zonal")
        return self._normalised(n_max, rule.coords["theta"]) ** 2

    def series_rule(self, n_max: int, p: float = 2.0) -> QuadratureRule:
        return zonal_rule(self.d, max(8, 2 * n_max * int(math.ceil(max(p, 2.0) / 2.0))))

    def basis(self, n: int, rule: QuadratureRule) -> np.ndarray:
        self._expect_domain(rule, "zonal")
        self.check_level(n)
        return (zonal_z(self.d, n, rule.coords["theta"]) / math.sqrt(zonal_norm_sq(self.d, n)))[None, :]

    def synthesize(self, coeffs: Sequence[np.ndarray], rule: QuadratureRule) -> np.ndarray:
        self._expect_domain(rule, "zonal")
        n_max = self.first_level + len(coeffs) - 1
        vector = np.array([np.asarray(v).ravel()[0] for v in coeffs])
        return vector @ self._normalised(n_max, rule.coords["theta"])


class TorusFourier(Family):
    """Exponentials e^{inx}, n ≥ 1, on T with μ(T) = 1."""

    tag = "TorusFourier"

    def __init__(self, d: int = 1):
        if d != 1:
            raise DomainError("the torus family is one-dimensional")
        super().__init__(1)

    @property
    def label(self) -> str:
        return self.tag

    def density_rule(self, n_max: int, resolution: int) -> QuadratureRule:
        return torus_rule(resolution)

    def density_start(self, n_max: int, p: float) -> int:
        return max(16, 4 * (n_max + 1))

    def spectral(self, n: int, rule: QuadratureRule) -> np.ndarray:
        self._expect_domain(rule, "torus")
        self.check_level(n)
        return np.ones(rule.size)

    def series_rule(self, n_max: int, p: float = 2.0) -> QuadratureRule:
        return torus_rule(max(64, 16 * n_max * int(math.ceil(max(p, 2.0) / 2.0))))

    def basis(self, n: int, rule: QuadratureRule) -> np.ndarray:
        self._expect_domain(rule, "torus")
        self.check_level(n)
        return np.exp(1j * n * rule.coords["x"])[None, :]

    def synthesize(self, coeffs: Sequence[np.ndarray], rule: QuadratureRule) -> np.ndarray:
        self._expect_domain(rule, "torus")
        levels = np.arange(self.first_level, self.first_level + len(coeffs))
        vector = np.array([np.asarray(v).ravel()[0] for v in coeffs])
        return np.exp(1j * np.multiply.outer(rule.coords["x"], levels)) @ vector


FAMILIES: Dict[str, type] = {
    "hermite": HermiteOscillator,
    "highest": SphereHighest,
    "zonal": SphereZonal,
    "torus": TorusFourier,
}


def make_family(name: str, d: int) -> Family:
    """Family from its command-line name."""
    try:
        cls = FAMILIES[name]
    except KeyError:
        raise DomainError(f"unknown family {name!r}, expected one of {sorted(FAMILIES)}") from None
    return cls() if cls is TorusFourier else cls(d)


def family_name(family: Family) -> str:
    for name, cls in FAMILIES.items():
        if isinstance(family, cls):
            return name
    return family.tag


# ---------------------------------------------------------------------------
# Norms of spectral functions
# ---------------------------------------------------------------------------


def density_mass(family: Family, n: int) -> float:
    """(1/d_n) ∫ e(n, ·) dμ, which is 1 for every level."""
    family.check_level(n)
    value = family.integrate_levels(n, lambda table: table[-1], 2.0, f"density_mass[{family.label}, n={n}]")
    return value / family.dim(n)


def sqrt_spectral_lp(family: Family, n: int, p: float) -> float:
    """‖√e(n, ·)‖_{L^p}; p = ∞ is the maximum over a doubled density rule."""
    family.check_level(n)
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if math.isinf(p):
        rule = family.density_rule(n, 2 * family.density_start(n, 2.0))
        return float(np.sqrt(family.spectral(n, rule).max()))
    value = family.integrate_levels(
        n, lambda table: table[-1] ** (p / 2.0), p, f"sqrt_spectral_lp[{family.label}, n={n}, p={p}]"
    )
    return value ** (1.0 / p)


def zonal_lp_profile(d: int, n: int, p: float) -> float:
    """‖Z_n‖_{L^p(S^d)} with Z_n = √n P_n^{(α,α)}(cos Θ) unnormalised."""
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    poles = (1.0 / max(n, 1), math.pi - 1.0 / max(n, 1))
    if math.isinf(p):
        rule = zonal_rule(d, 4 * max(n, 4), poles)
        return float(np.abs(zonal_z(d, n, rule.coords["theta"])).max())
    value = integrate_zonal(
        d, lambda theta: np.abs(zonal_z(d, n, theta)) ** p, oscillation=n, breakpoints=poles
    )
    return value ** (1.0 / p)


# ---------------------------------------------------------------------------
# Indicator surrogates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Profile:
    """A function on S^d reduced to the band (ρ, θ) or zonal (Θ) variables."""

    kind: str
    d: int
    n: int
    fn: Callable[..., np.ndarray]
    breakpoints: Tuple[float, ...]

    def __call__(self, *coords: np.ndarray) -> np.ndarray:
        return self.fn(*coords)

    def lp_norm(self, p: float) -> float:
        if self.kind == "band":
            value = integrate_band(
                self.d, lambda rho, theta: np.abs(self.fn(rho, theta)) ** p, breakpoints=self.breakpoints
            )
        else:
            value = integrate_zonal(
                self.d, lambda theta: np.abs(self.fn(theta)) ** p, breakpoints=self.breakpoints
            )
        return value ** (1.0 / p)


def _y_band_edge(n: int) -> float:
    """t = ρ² at geodesic distance 1/√n from the great circle."""
    return math.cos(1.0 / math.sqrt(n)) ** 2


def y_tilde(d: int, n: int) -> Profile:
    """Ỹ_n(ρ, θ) = n^{(d−1)/4} 1{arccos ρ ≤ 1/√n}."""
    height = n ** ((d - 1) / 4.0)
    edge = math.cos(1.0 / math.sqrt(n))

    def fn(rho, theta):
        return np.where(np.asarray(rho) >= edge, height, 0.0)

    return Profile("band", d, n, fn, (_y_band_edge(n),))


def z_tilde(d: int, n: int) -> Profile:
    """Z̃_n = 1_{[0, c/n]}(Θ) Z_n with c the Jacobi band constant."""
    c = jacobi_band_constant((d - 2) / 2.0, max(n, 1))
    cap = c / n

    def fn(theta):
        theta = np.asarray(theta)
        return np.where(theta <= cap, zonal_z(d, n, theta), 0.0)

    return Profile("zonal", d, n, fn, (cap,))


def tilde_profiles(family: Family, n: int) -> Profile:
    if isinstance(family, SphereHighest):
        return y_tilde(family.d, n)
    if isinstance(family, SphereZonal):
        return z_tilde(family.d, n)
    raise DomainError(f"no indicator surrogate for {family.label}")


def y_envelope_ratio(d: int, n: int, points: int = 512) -> float:
    """max over δ ∈ [0, π/2] of |Y_n| n^{−(d−1)/4} e^{nδ²/2} at ρ = cos δ."""
    delta = np.linspace(0.0, math.pi / 2.0, points)
    rho = np.cos(delta)
    ratio = y_abs(d, n, rho) * n ** (-(d - 1) / 4.0) * np.exp(0.5 * n * delta * delta)
    return float(ratio.max())


def y_product_l2(d: int, n1: int, n2: int) -> float:
    """∫|Y_{n1} Y_{n2}|² = (c_{n1} c_{n2}/c_{n1+n2})²."""
    return (y_norm_const(d, n1) * y_norm_const(d, n2) / y_norm_const(d, n1 + n2)) ** 2


def y_product_l2_quadrature(d: int, n1: int, n2: int) -> float:
    scale = (y_norm_const(d, n1) * y_norm_const(d, n2)) ** 2
    return integrate_band(d, lambda rho, theta: scale * rho ** (2 * (n1 + n2)), oscillation=(n1 + n2) // 2)


def tilde_product_l2(d: int, n1: int, n2: int) -> float:
    """∫|Ỹ_{n1} Ỹ_{n2}|² by quadrature with both band edges as breakpoints."""
    first, second = y_tilde(d, n1), y_tilde(d, n2)
    return integrate_band(
        d,
        lambda rho, theta: (first(rho, theta) * second(rho, theta)) ** 2,
        breakpoints=first.breakpoints + second.breakpoints,
    )


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

SPECTRAL_TABLE_COLUMNS = ("d", "n", "r", "e", "e_normalized")


def export_spectral_table(
    path: Optional[str],
    d: int,
    levels: Sequence[int],
    r_points: int = 200,
    r_scale: float = 1.5,
) -> List[Dict[str, float]]:
    """
    Rows (d, n, r, e, e_normalized) on r ∈ [0, r_scale·√(2n+1)] for each level.

    e_normalized is e/n^{d/2−1}. Rows are written as CSV when a path is given.
    """
    rows = []
    for n in levels:
        r = np.linspace(0.0, r_scale * math.sqrt(2 * n + 1), r_points)
        values = osc_spectral(d, n, r)
        scale = float(max(n, 1)) ** (d / 2.0 - 1.0)
        for radius, value in zip(r, values):
            rows.append(
                {"d": d, "n": int(n), "r": float(radius), "e": float(value), "e_normalized": float(value / scale)}
            )
    if path:
        write_spectral_csv(rows, path)
    return rows


def write_spectral_csv(rows: Sequence[Dict[str, float]], path: str):
    """CSV with the fixed spectral-table columns, '.' decimals and repr floats."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=SPECTRAL_TABLE_COLUMNS)
        writer.writeheader()
        writer.writerows({k: repr(v) if isinstance(v, float) else v for k, v in row.items()} for row in rows)
    logger.info(f"📁 Spectral table written to {path} ({len(rows)} rows)")
