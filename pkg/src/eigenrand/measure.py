"""
Quadrature and norms on S^d, R^d and the circle.

Sphere integrals are reduced to one or two variables by the usual change of
variables: zonal functions by the colatitude Θ, band functions by
(ρ, θ) with ρ = √(x₁² + x₂²). Rules are plain node/weight arrays tagged with
their domain; adaptive integrators double the node count until two
successive values agree.
"""
import hashlib
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln, roots_jacobi

from eigenrand.constants import get_constants
from eigenrand.errors import DomainError, QuadratureWarning, TailTruncationWarning
from eigenrand.tools.montecarlo import MCEstimate, mc_estimate

logger = logging.getLogger(__name__)

DOMAINS = ("zonal", "band", "radial", "box", "torus", "line")
GL_ORDER = 20


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes (one flat array per coordinate) and positive weights on a domain."""

    domain: str
    coords: Dict[str, np.ndarray]
    weights: np.ndarray
    resolution: int
    d: Optional[int] = None
    axes: Tuple[np.ndarray, ...] = field(default=())

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise DomainError(f"unknown quadrature domain {self.domain!r}")
        if np.any(self.weights <= 0.0):
            raise DomainError("quadrature weights must be strictly positive")
        for name, values in self.coords.items():
            if values.shape != self.weights.shape:
                raise DomainError(f"coordinate {name!r} does not match the weights")

    @property
    def size(self) -> int:
        return int(self.weights.size)

    def total(self) -> float:
        return float(self.weights.sum())

    def evaluate(self, fn: Callable[..., np.ndarray]) -> np.ndarray:
        """Call fn with the coordinate arrays in declaration order."""
        values = np.asarray(fn(*self.coords.values()))
        return np.broadcast_to(values, self.weights.shape).copy() if values.ndim == 0 else values

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self.weights, values))

    def digest(self) -> str:
        """Stable identity of the node set, used as a cache key."""
        h = hashlib.sha1(self.domain.encode())
        for name, values in self.coords.items():
            h.update(name.encode())
            h.update(np.ascontiguousarray(values, dtype=float).tobytes())
        return h.hexdigest()


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Function values at the nodes of a rule."""

    rule: QuadratureRule
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.rule.weights.shape:
            raise DomainError("sample values do not match the rule")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("sampled function has non-finite values")

    @classmethod
    def from_callable(cls, rule: QuadratureRule, fn: Callable[..., np.ndarray]) -> "SampledFunction":
        return cls(rule, rule.evaluate(fn))


def sphere_area(d: int) -> float:
    """Surface measure of the unit d-sphere in R^{d+1}; the 0-sphere has measure 2."""
    if d < 0:
        raise DomainError(f"sphere dimension must be >= 0, got {d}")
    return float(2.0 * math.pi ** ((d + 1) / 2.0) / math.gamma((d + 1) / 2.0))


def log_sphere_area(d: int) -> float:
    return math.log(2.0) + (d + 1) / 2.0 * math.log(math.pi) - float(gammaln((d + 1) / 2.0))


def ball_volume(d: int) -> float:
    """Lebesgue measure of the unit ball of R^d."""
    return sphere_area(d - 1) / d


# ---------------------------------------------------------------------------
# Rule constructors
# ---------------------------------------------------------------------------


def composite_gauss_legendre(
    edges: Sequence[float], panels: int, order: int = GL_ORDER
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Composite Gauss–Legendre nodes and weights on [edges[0], edges[-1]].

    The panels are distributed over the segments between consecutive edges
    in proportion to their length, at least one per segment, so every edge
    is a panel boundary.
    """
    edges = np.asarray(edges, dtype=float)
    lengths = np.diff(edges)
    if np.any(lengths <= 0):
        raise DomainError("composite rule edges must be increasing")
    x, w = np.polynomial.legendre.leggauss(order)
    share = np.maximum(1, np.round(panels * lengths / lengths.sum()).astype(int))
    nodes, weights = [], []
    for lo, length, count in zip(edges[:-1], lengths, share):
        h = length / count
        starts = lo + h * np.arange(count)
        nodes.append((starts[:, None] + 0.5 * h * (x + 1.0)[None, :]).ravel())
        weights.append(np.tile(0.5 * h * w, count))
    return np.concatenate(nodes), np.concatenate(weights)


def zonal_rule(d: int, panels: int, breakpoints: Sequence[float] = (), order: int = GL_ORDER) -> QuadratureRule:
    """Θ-rule on [0, π] carrying the weight μ_{d−1}(S^{d−1}) sin^{d−1}Θ."""
    if d < 1:
        raise DomainError(f"zonal rule needs d >= 1, got {d}")
    inner = sorted({b for b in breakpoints if 0.0 < b < math.pi})
    theta, w = composite_gauss_legendre([0.0, *inner, math.pi], panels, order)
    weights = sphere_area(d - 1) * np.sin(theta) ** (d - 1) * w
    return QuadratureRule("zonal", {"theta": theta}, weights, resolution=panels, d=d)


def band_rule(
    d: int,
    t_nodes: int,
    theta_points: int = 1,
    breakpoints: Sequence[float] = (),
) -> QuadratureRule:
    """
    (ρ, θ)-rule on S^d for functions of x₁ + ix₂.

    In t = ρ² the measure is μ_{d−2}(S^{d−2})·½·(1 − t)^{(d−3)/2} dt dθ. The
    t-panel touching t = 1 uses Gauss–Jacobi so the endpoint singularity of
    d = 2 is integrated exactly; other panels are Gauss–Legendre. For d = 2
    the factor μ_0 = 2 accounts for the two hemispheres. Breakpoints are
    t-values; repeated ones give a single edge.
    """
    if d < 2:
        raise DomainError(f"band rule needs d >= 2, got {d}")
    a = (d - 3) / 2.0
    edges = [0.0, *sorted({b for b in breakpoints if 0.0 < b < 1.0}), 1.0]
    t_parts, w_parts = [], []
    x_gl, w_gl = np.polynomial.legendre.leggauss(t_nodes)
    for lo, hi in zip(edges[:-2], edges[1:-1]):
        t = lo + 0.5 * (hi - lo) * (x_gl + 1.0)
        t_parts.append(t)
        w_parts.append(0.5 * (hi - lo) * w_gl * (1.0 - t) ** a)
    lo = edges[-2]
    x_gj, w_gj = roots_jacobi(t_nodes, a, 0.0)
    t_parts.append(lo + 0.5 * (1.0 - lo) * (x_gj + 1.0))
    w_parts.append(w_gj * (0.5 * (1.0 - lo)) ** (a + 1.0))
    t = np.concatenate(t_parts)
    w_t = np.concatenate(w_parts)

    theta = 2.0 * math.pi * np.arange(theta_points) / theta_points
    w_theta = np.full(theta_points, 2.0 * math.pi / theta_points)
    rho = np.sqrt(t)
    weights = 0.5 * sphere_area(d - 2) * np.outer(w_t, w_theta).ravel()
    coords = {
        "rho": np.repeat(rho, theta_points),
        "theta": np.tile(theta, t.size),
    }
    return QuadratureRule("band", coords, weights, resolution=t_nodes, d=d, axes=(rho, theta))


def radial_rule(d: int, r_max: float, panels: int, order: int = GL_ORDER) -> QuadratureRule:
    """r-rule on [0, r_max] for radial functions on R^d."""
    if d < 1:
        raise DomainError(f"radial rule needs d >= 1, got {d}")
    r, w = composite_gauss_legendre([0.0, r_max], panels, order)
    weights = sphere_area(d - 1) * r ** (d - 1) * w
    return QuadratureRule("radial", {"r": r}, weights, resolution=panels, d=d)


def box_rule(half_width: float, nodes_per_unit: int = 8, dim: int = 2) -> QuadratureRule:
    """Tensor Gauss–Legendre rule on [−L, L]^dim with unit-length panels."""
    panels = max(1, int(math.ceil(2.0 * half_width)))
    axis, w = composite_gauss_legendre([-half_width, half_width], panels, nodes_per_unit)
    if dim == 1:
        return QuadratureRule("line", {"x": axis}, w, resolution=panels, d=1, axes=(axis,))
    if dim != 2:
        raise DomainError(f"box rules are implemented for dim <= 2, got {dim}")
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    weights = np.outer(w, w).ravel()
    return QuadratureRule(
        "box", {"x": xx.ravel(), "y": yy.ravel()}, weights, resolution=panels, d=2, axes=(axis, axis)
    )


def torus_rule(points: int) -> QuadratureRule:
    """Equispaced rule on T = R/2πZ for the normalised measure (μ(T) = 1)."""
    x = 2.0 * math.pi * np.arange(points) / points
    return QuadratureRule("torus", {"x": x}, np.full(points, 1.0 / points), resolution=points, d=1)


def line_rule(
    a: float, b: float, panels: int, breakpoints: Sequence[float] = (), order: int = GL_ORDER
) -> QuadratureRule:
    """Composite Gauss–Legendre on an interval of the real line."""
    inner = sorted({x for x in breakpoints if a < x < b})
    x, w = composite_gauss_legendre([a, *inner, b], panels, order)
    return QuadratureRule("line", {"x": x}, w, resolution=panels, d=1)


# ---------------------------------------------------------------------------
# Adaptive integrals
# ---------------------------------------------------------------------------


def refine_until_stable(
    evaluate: Callable[[int], Tuple[float, int]],
    start: int,
    what: str,
    rel_tol: Optional[float] = None,
    max_nodes: Optional[int] = None,
) -> float:
    """
    Double the resolution until two successive values agree to rel_tol.

    `evaluate(resolution)` returns (value, node count). Past max_nodes the
    last value is returned with a QuadratureWarning.
    """
    consts = get_constants().measure
    rel_tol = consts.rel_tol if rel_tol is None else rel_tol
    max_nodes = consts.max_nodes if max_nodes is None else max_nodes
    resolution = start
    previous, size = evaluate(resolution)
    while True:
        if 2 * size > max_nodes:
            warnings.warn(
                f"{what}: no convergence to {rel_tol:g} within {max_nodes} nodes",
                QuadratureWarning,
                stacklevel=3,
            )
            return previous
        resolution *= 2
        value, size = evaluate(resolution)
        if abs(value - previous) <= rel_tol * max(abs(value), 1e-300):
            return value
        previous = value


def integrate_zonal(
    d: int,
    f: Callable[[np.ndarray], np.ndarray],
    oscillation: int = 0,
    breakpoints: Sequence[float] = (),
    rel_tol: Optional[float] = None,
    max_nodes: Optional[int] = None,
) -> float:
    """
    μ_{d−1}(S^{d−1}) ∫_0^π f(Θ) sin^{d−1}Θ dΘ.

    `oscillation` is the expected number of zeros of f; the first rule puts
    one 20-node panel on each of them.
    """

    def evaluate(panels: int) -> Tuple[float, int]:
        rule = zonal_rule(d, panels, breakpoints)
        return rule.integrate(f(rule.coords["theta"])), rule.size

    return refine_until_stable(evaluate, max(4, oscillation), "integrate_zonal", rel_tol, max_nodes)


def integrate_band(
    d: int,
    g: Callable[[np.ndarray, np.ndarray], np.ndarray],
    oscillation: int = 0,
    breakpoints: Sequence[float] = (),
    theta_points: int = 1,
    rel_tol: Optional[float] = None,
    max_nodes: Optional[int] = None,
) -> float:
    """μ_{d−2}(S^{d−2}) ∫∫ g(ρ, θ)(1 − ρ²)^{(d−3)/2} ρ dρ dθ."""

    def evaluate(t_nodes: int) -> Tuple[float, int]:
        rule = band_rule(d, t_nodes, theta_points, breakpoints)
        return rule.integrate(g(rule.coords["rho"], rule.coords["theta"])), rule.size

    return refine_until_stable(evaluate, max(16, oscillation), "integrate_band", rel_tol, max_nodes)


def integrate_radial(
    d: int,
    f: Callable[[np.ndarray], np.ndarray],
    r_max: float = 12.0,
    oscillation: int = 0,
    breakpoints: Sequence[float] = (),
    rel_tol: Optional[float] = None,
    max_nodes: Optional[int] = None,
) -> float:
    """μ_{d−1}(S^{d−1}) ∫_0^{r_max} f(r) r^{d−1} dr, warning if f has not decayed."""

    def evaluate(panels: int) -> Tuple[float, int]:
        r, w = composite_gauss_legendre([0.0, *sorted({b for b in breakpoints if 0 < b < r_max}), r_max],
                                        panels)
        weights = sphere_area(d - 1) * r ** (d - 1) * w
        return float(np.dot(weights, f(r))), r.size

    start = max(8, oscillation, int(math.ceil(r_max)))
    value = refine_until_stable(evaluate, start, "integrate_radial", rel_tol, max_nodes)
    edge = abs(float(np.asarray(f(np.array([r_max])))[0])) * sphere_area(d - 1) * r_max ** (d - 1)
    if edge > 1e-10 * max(abs(value), 1e-300):
        warnings.warn(
            f"integrate_radial: integrand is {edge:.3g} at r_max={r_max:g}",
            TailTruncationWarning,
            stacklevel=2,
        )
    return value


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------


def lp_norm(u: SampledFunction, p: float) -> float:
    """(Σ w_i |u_i|^p)^{1/p}; p = ∞ gives the maximum over the nodes."""
    if p < 1:
        raise DomainError(f"lp_norm needs p >= 1, got {p}")
    magnitude = np.abs(u.values)
    if math.isinf(p):
        return float(magnitude.max())
    return float(np.dot(u.rule.weights, magnitude ** p) ** (1.0 / p))


def decreasing_rearrangement(u: SampledFunction) -> Tuple[np.ndarray, np.ndarray]:
    """Cumulative measure T_i and the sorted values f*(T_i), largest first."""
    magnitude = np.abs(u.values)
    order = np.argsort(-magnitude, kind="stable")
    return np.cumsum(u.rule.weights[order]), magnitude[order]


def weak_lp_quasinorm(u: SampledFunction, p: float) -> float:
    """sup_T T^{1/p} f*(T) over the breakpoints of the rearrangement."""
    if p <= 1:
        raise DomainError(f"weak_lp_quasinorm needs p > 1, got {p}")
    cumulative, fstar = decreasing_rearrangement(u)
    return float(np.max(cumulative ** (1.0 / p) * fstar))


def sphere_mc_integral(
    d: int,
    f: Callable[[np.ndarray], np.ndarray],
    samples: int,
    seed: int,
    threads: Optional[int] = None,
) -> MCEstimate:
    """
    Monte Carlo ∫_{S^d} f dμ_d with uniform points from normalised Gaussians.

    f receives an array of shape (count, d + 1).
    """
    area = sphere_area(d)

    def sampler(rng: np.random.Generator, count: int) -> np.ndarray:
        g = rng.standard_normal((count, d + 1))
        points = g / np.linalg.norm(g, axis=1, keepdims=True)
        return area * np.asarray(f(points), dtype=float)

    return mc_estimate(sampler, samples, seed, threads, chunk_size=4096)
