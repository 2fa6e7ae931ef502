"""
Hermite functions, symmetric Jacobi polynomials and the sphere harmonics Y_n, Z_n.

Hermite functions are L²(R)-normalised and evaluated by the weighted
three-term recurrence with h_0 = π^{−1/4} e^{−x²/2}. The Gaussian factor is
carried as a per-abscissa log-scale so high degrees far from the origin
neither overflow nor turn into 0·∞.
"""
import logging
import math
from functools import lru_cache
from typing import Union

import numpy as np
from scipy.special import betaln, binom, gammaln

from eigenrand.constants import get_constants
from eigenrand.errors import CalibrationError, DomainError
from eigenrand.measure import log_sphere_area

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

PI_M14 = math.pi ** -0.25
_RESCALE_AT = 1e150


def _as_array(x: ArrayLike) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=float))


def _like_input(x: ArrayLike, values: np.ndarray):
    return float(values[0]) if np.ndim(x) == 0 else values.reshape(np.shape(x))


def _unscale(values: np.ndarray, log_scale: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.sign(values) * np.exp(np.log(np.abs(values)) + log_scale)


# ---------------------------------------------------------------------------
# Hermite
# ---------------------------------------------------------------------------


def hermite_table(n_max: int, x: ArrayLike) -> np.ndarray:
    """
    h_0 … h_{n_max} at every abscissa, shape (n_max + 1, len(x)).

    h_{k+1} = x√(2/(k+1)) h_k − √(k/(k+1)) h_{k−1}
    """
    if n_max < 0:
        raise DomainError(f"degree must be >= 0, got {n_max}")
    x = _as_array(x).ravel()
    table = np.empty((n_max + 1, x.size))
    log_scale = -0.5 * x * x
    previous = np.zeros_like(x)
    current = np.full_like(x, PI_M14)
    table[0] = _unscale(current, log_scale)
    for k in range(n_max):
        following = x * math.sqrt(2.0 / (k + 1)) * current - math.sqrt(k / (k + 1)) * previous
        previous, current = current, following
        big = np.abs(current) > _RESCALE_AT
        if big.any():
            factor = np.abs(current[big])
            current[big] /= factor
            previous[big] /= factor
            log_scale[big] += np.log(factor)
        table[k + 1] = _unscale(current, log_scale)
    return table


def hermite_h(n: int, x: ArrayLike):
    """L²-normalised Hermite function h_n(x)."""
    values = hermite_table(n, x)[n]
    return _like_input(x, values)


def hermite_zero(k: int) -> float:
    """h_{2k}(0) = (−1)^k √((2k)!) / (k! 2^k π^{1/4}), in log space."""
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    log_abs = 0.5 * gammaln(2 * k + 1) - gammaln(k + 1) - k * math.log(2.0) - 0.25 * math.log(math.pi)
    return (-1.0) ** k * math.exp(log_abs)


def hermite_envelope_ok(n: int, x: ArrayLike) -> np.ndarray:
    """
    Pointwise check of the two-regime Hermite envelope.

    |h_n(x)| ≤ (2n + 2 − x²)^{−1/4} for |x| ≤ √(2n+1), and
    |h_n(x)| ≤ C e^{−γx²/2} beyond, with the frozen (C, γ).
    """
    consts = get_constants().specfun
    x = _as_array(x)
    h = np.abs(hermite_table(n, x)[n])
    inside = x * x <= 2 * n + 1
    bound = np.where(
        inside,
        np.power(np.maximum(2 * n + 2 - x * x, 1e-300), -0.25),
        consts.envelope_C * np.exp(-0.5 * consts.envelope_gamma * x * x),
    )
    return h <= bound * (1.0 + 1e-12)


def phi_fn(u: ArrayLike):
    """Φ(u) = ½ arcsin u + ½ u√(1 − u²), increasing from 0 to π/4 on [0, 1]."""
    arr = _as_array(u)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError("phi_fn is defined on [0, 1]")
    values = 0.5 * np.arcsin(arr) + 0.5 * arr * np.sqrt(1.0 - arr * arr)
    return _like_input(u, values)


def muckenhoupt_main(n: int, x: ArrayLike):
    """
    Oscillatory main term of h_n inside the turning point.

    √2 / (√π (2n+1−x²)^{1/4}) · cos[(2n+1)Φ(x/√(2n+1)) − nπ/2],
    valid for 0 ≤ x ≤ √(2n+1) − (2n+1)^{−1/6}.
    """
    big_n = 2 * n + 1
    arr = _as_array(x)
    upper = math.sqrt(big_n) - big_n ** (-1.0 / 6.0)
    if np.any(arr < 0.0) or np.any(arr > upper + 1e-12):
        raise DomainError(f"muckenhoupt_main(n={n}) needs 0 <= x <= {upper:.6g}")
    arr = np.minimum(arr, upper)
    phase = big_n * phi_fn(arr / math.sqrt(big_n)) - n * math.pi / 2.0
    values = math.sqrt(2.0 / math.pi) * (big_n - arr * arr) ** -0.25 * np.cos(phase)
    return _like_input(x, values)


# ---------------------------------------------------------------------------
# Jacobi
# ---------------------------------------------------------------------------


def _check_alpha(alpha: float):
    if alpha <= -1.0:
        raise DomainError(f"Jacobi parameter must be > -1, got {alpha}")


def jacobi_table(n_max: int, alpha: float, x: ArrayLike) -> np.ndarray:
    """
    P_0^{(α,α)} … P_{n_max}^{(α,α)} at every abscissa.

    (k+1)(k+2α+1) P_{k+1} = (k+α+1)[(2k+2α+1) x P_k − (k+α) P_{k−1}]
    """
    _check_alpha(alpha)
    x = _as_array(x).ravel()
    table = np.empty((n_max + 1, x.size))
    table[0] = 1.0
    if n_max >= 1:
        table[1] = (alpha + 1.0) * x
    for k in range(1, n_max):
        table[k + 1] = (k + alpha + 1.0) * (
            (2 * k + 2 * alpha + 1.0) * x * table[k] - (k + alpha) * table[k - 1]
        ) / ((k + 1.0) * (k + 2 * alpha + 1.0))
    return table


def jacobi_p(n: int, alpha: float, x: ArrayLike):
    """Symmetric Jacobi polynomial P_n^{(α,α)}(x)."""
    if n < 0:
        raise DomainError(f"degree must be >= 0, got {n}")
    values = jacobi_table(n, alpha, x)[n]
    return _like_input(x, values)


def jacobi_at_one(n: int, alpha: float) -> float:
    """P_n^{(α,α)}(1) = binom(n + α, n)."""
    return float(binom(n + alpha, n))


def _jacobi_diagonal(n_max: int, alpha: float, x_blocks: np.ndarray) -> np.ndarray:
    """Row n of the result is P_n evaluated on block n of x_blocks (shape (n_max, m))."""
    x = x_blocks.ravel()
    m = x_blocks.shape[1]
    out = np.empty_like(x_blocks)
    previous = np.ones_like(x)
    current = (alpha + 1.0) * x
    out[0] = current[:m]
    for k in range(1, n_max):
        # blocks below k are finished
        s = k * m
        following = (k + alpha + 1.0) * (
            (2 * k + 2 * alpha + 1.0) * x[s:] * current[s:] - (k + alpha) * previous[s:]
        ) / ((k + 1.0) * (k + 2 * alpha + 1.0))
        previous[s:] = current[s:]
        current[s:] = following
        out[k] = current[s:s + m]
    return out


@lru_cache(maxsize=64)
def jacobi_band_constant(alpha: float, n_max: int) -> float:
    """
    Largest c ≤ π/2 with P_n^{(α,α)}(cos Θ) ≥ ½ P_n^{(α,α)}(1) on Θ ≤ c/n, n ≤ n_max.

    Found by bisection on c; each candidate is tested on a Θ-grid of
    J + 1 points per degree.
    """
    _check_alpha(alpha)
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    consts = get_constants().specfun
    grid = consts.band_constant_grid
    degrees = np.arange(1, n_max + 1)
    half_at_one = 0.5 * binom(degrees + alpha, degrees)
    fractions = np.arange(grid + 1) / grid

    def admissible(c: float) -> bool:
        theta = fractions[None, :] * c / degrees[:, None]
        values = _jacobi_diagonal(n_max, alpha, np.cos(theta))
        return bool(np.all(values >= half_at_one[:, None]))

    lo, hi = consts.band_constant_min, math.pi / 2.0
    if admissible(hi):
        return hi
    if not admissible(lo):
        raise CalibrationError(
            f"no band constant >= {lo:g} for alpha={alpha}, n_max={n_max}"
        )
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if admissible(mid):
            lo = mid
        else:
            hi = mid
    logger.debug(f"jacobi_band_constant(alpha={alpha}, n_max={n_max}) = {lo:.6f}")
    return lo


# ---------------------------------------------------------------------------
# Sphere harmonics
# ---------------------------------------------------------------------------


def _check_sphere(d: int, n: int, min_n: int = 0):
    if d < 2:
        raise DomainError(f"sphere dimension must be >= 2, got {d}")
    if n < min_n:
        raise DomainError(f"degree must be >= {min_n}, got {n}")


def y_norm_const(d: int, n: int) -> float:
    """c_{d,n} with c_{d,n}^{−2} = μ_{d−2}(S^{d−2}) π B(n + 1, (d − 1)/2)."""
    _check_sphere(d, n)
    return math.exp(-0.5 * (log_sphere_area(d - 2) + math.log(math.pi) + betaln(n + 1, (d - 1) / 2.0)))


def y_abs(d: int, n: int, rho: ArrayLike):
    """|Y_n| = c_{d,n} ρ^n."""
    return y_norm_const(d, n) * np.power(rho, n)


def highest_weight_y(d: int, n: int, rho: ArrayLike, theta: ArrayLike):
    """Y_n = c_{d,n}(x₁ + ix₂)^n = c_{d,n} ρ^n e^{inθ}."""
    return y_abs(d, n, rho) * np.exp(1j * n * np.asarray(theta))


def y_lp_closed_form(d: int, n: int, p: float) -> float:
    """‖Y_n‖_{L^p(S^d)} = [c^p μ_{d−2} π B(np/2 + 1, (d − 1)/2)]^{1/p}."""
    _check_sphere(d, n)
    log_c = math.log(y_norm_const(d, n))
    log_pp = p * log_c + log_sphere_area(d - 2) + math.log(math.pi) + betaln(n * p / 2.0 + 1.0, (d - 1) / 2.0)
    return math.exp(log_pp / p)


def zonal_z(d: int, n: int, theta: ArrayLike):
    """Z_n(Θ) = √n P_n^{((d−2)/2,(d−2)/2)}(cos Θ)."""
    _check_sphere(d, n, min_n=1)
    return math.sqrt(n) * jacobi_p(n, (d - 2) / 2.0, np.cos(theta))


def zonal_norm_sq(d: int, n: int) -> float:
    """Exact ‖Z_n‖²_{L²(S^d)} = n μ_{d−1} ∫(1 − x²)^α P_n^{(α,α)}(x)² dx, α = (d − 2)/2."""
    _check_sphere(d, n, min_n=1)
    alpha = (d - 2) / 2.0
    log_h = (
        (2 * alpha + 1) * math.log(2.0)
        + 2 * gammaln(n + alpha + 1)
        - math.log(2 * n + 2 * alpha + 1)
        - gammaln(n + 1)
        - gammaln(n + 2 * alpha + 1)
    )
    return n * math.exp(log_sphere_area(d - 1) + log_h)
