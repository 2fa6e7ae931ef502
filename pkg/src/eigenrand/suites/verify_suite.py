"""
Verification suite.

Each check is a method registered with @check and described by an entry of
config/checks.yaml (suite, description, acceptance, operations, params). The
@verification_suite class decorator loads that file and refuses to build a
suite whose methods and YAML entries disagree.
"""
import logging
import math
import os
import tempfile
import warnings
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import yaml
from pydantic import BaseModel, Field, field_validator
from scipy.optimize import minimize_scalar

from .. import measure, plp, randmat, series, specfun, spectral
from ..constants import get_constants
from ..errors import DivergenceWarning, DomainError, EigenrandError, warning_flags
from ..phoenix_config import experiment_span
from ..tools.montecarlo import derive_seed
from ..tools.tracking_tools import SuiteProgressTracker

logger = logging.getLogger("eigenrand.suites")

CHECKS_CONFIG_PATH = Path(__file__).parent / "config" / "checks.yaml"

SUITES = ("specfun", "measure", "spectral", "randmat", "series", "plp", "cli")
SCALES = ("desk", "acceptance")

OPERATIONS = (
    "specfun.hermite_h", "specfun.hermite_zero", "specfun.hermite_table", "specfun.hermite_envelope_ok",
    "specfun.phi_fn", "specfun.muckenhoupt_main", "specfun.jacobi_p", "specfun.jacobi_table",
    "specfun.y_norm_const", "specfun.highest_weight_y", "specfun.zonal_z", "specfun.zonal_norm_sq",
    "specfun.jacobi_band_constant",
    "measure.sphere_area", "measure.integrate_zonal", "measure.integrate_band", "measure.integrate_radial",
    "measure.lp_norm", "measure.weak_lp_quasinorm", "measure.decreasing_rearrangement",
    "measure.sphere_mc_integral", "measure.rules",
    "spectral.dim_e", "spectral.osc_spectral", "spectral.osc_spectral_table", "spectral.osc_concentration_report",
    "spectral.sqrt_spectral_lp", "spectral.tilde_profiles", "spectral.zonal_lp_profile",
    "spectral.y_product_l2", "spectral.export_spectral_table",
    "randmat.sample", "randmat.heavytail_sample", "randmat.heavytail_moment", "randmat.matrix_abs",
    "randmat.mc_opnorm_moment", "randmat.mc_sigma_expected_abs", "randmat.haar_trace_moments",
    "randmat.orthogonal_invariance_ks", "randmat.kk_moment_ratio", "randmat.latala_check",
    "randmat.max_entry_growth",
    "series.sample_series", "series.mc_lp_moment", "series.kkmp_ratio", "series.universality_ratio",
    "series.contraction_check", "series.torus_salem_zygmund", "series.heavytail_divergence_demo",
    "series.hs_identity_check", "series.trace_form",
    "plp.plp_norm_quadrature", "plp.y_closed_form", "plp.z_closed_form", "plp.hermite_closed_form",
    "plp.sobolev_norm", "plp.sobolev_membership", "plp.plp_membership", "plp.critical_exponent",
    "plp.interpolation_defect", "plp.interpolation_lower_bound", "plp.holder_witness", "plp.hypothesis_checks",
    "plp.embedding_sweep", "plp.duality_pairing", "plp.r_boundedness_counterexample",
    "cli.run",
)


def check(method: Callable) -> Callable:
    """Mark a suite method as a verification check."""
    method.is_check = True
    return method


def verification_suite(cls):
    """Load the check registry and bind it to the @check methods of `cls`."""
    with open(cls.checks_config_path, "r", encoding="utf-8") as handle:
        cls.checks_config = yaml.safe_load(handle)
    registered = [name for name, member in vars(cls).items() if getattr(member, "is_check", False)]
    missing = sorted(set(cls.checks_config) - set(registered))
    unconfigured = sorted(set(registered) - set(cls.checks_config))
    if missing or unconfigured:
        raise ValueError(f"check registry mismatch: no method for {missing}, no config for {unconfigured}")
    cls.check_names = [name for name in cls.checks_config]
    return cls


class CheckOutcome(BaseModel):
    passed: bool
    rows: List[Dict[str, Any]] = Field(default_factory=list)
    flags: List[str] = Field(default_factory=list)

    @field_validator("passed", mode="before")
    @classmethod
    def plain_bool(cls, value: Any) -> bool:
        # verdicts are folded from numpy comparisons
        return bool(value)


class CheckResult(BaseModel):
    name: str
    suite: str
    description: str
    acceptance: str
    operations: List[str]
    seed: int
    passed: bool
    rows: List[Dict[str, Any]]
    flags: List[str]


class SuiteReport(BaseModel):
    suite: str
    seed: int
    scale: str = "desk"
    checks: List[CheckResult]
    coverage: Dict[str, List[str]] = Field(description="operation -> checks exercising it")
    uncovered: List[str]
    passed: bool


def _plain(value: Any) -> Any:
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def _row(**fields) -> Dict[str, Any]:
    return {key: _plain(value) for key, value in fields.items()}


def _inside(value: float, band) -> bool:
    return band[0] <= value <= band[1]


@verification_suite
class VerificationSuite:
    """All numerical checks, run in registry order with one derived seed each."""

    checks_config_path = CHECKS_CONFIG_PATH

    def __init__(self, seed: int, threads: Optional[int] = None, scale: str = "desk"):
        if scale not in SCALES:
            raise DomainError(f"unknown scale {scale!r}; expected one of {SCALES}")
        self.seed = seed
        self.threads = threads
        self.scale = scale
        self.constants = get_constants()

    # ------------------------------------------------------------------
    # Runner
    # ------------------------------------------------------------------

    def selected(self, suite: str = "all") -> List[str]:
        if suite != "all" and suite not in SUITES:
            raise DomainError(f"unknown suite {suite!r}; expected one of {('all',) + SUITES}")
        return [name for name in self.check_names if suite == "all" or self.checks_config[name]["suite"] == suite]

    def params(self, name: str) -> Dict[str, Any]:
        """Desk-scale parameters of a check, overridden by its acceptance_params at acceptance scale."""
        config = self.checks_config[name]
        params = dict(config.get("params") or {})
        if self.scale == "acceptance":
            params.update(config.get("acceptance_params") or {})
        return params

    def run_check(self, name: str) -> CheckResult:
        config = self.checks_config[name]
        seed = derive_seed(self.seed, name)
        method = getattr(self, name)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            try:
                outcome = method(self.params(name), seed)
            except EigenrandError as exc:
                logger.error(f"❌ {name}: {type(exc).__name__}: {exc}")
                outcome = CheckOutcome(passed=False, flags=[f"{type(exc).__name__}: {exc}"])
        return CheckResult(
            name=name,
            suite=config["suite"],
            description=" ".join(str(config.get("description", "")).split()),
            acceptance=str(config.get("acceptance", "")),
            operations=list(config.get("operations", [])),
            seed=seed,
            passed=outcome.passed,
            rows=outcome.rows,
            flags=sorted(set(outcome.flags) | set(warning_flags(caught))),
        )

    def coverage(self, names: Optional[List[str]] = None) -> Dict[str, List[str]]:
        names = self.check_names if names is None else names
        table = {op: [] for op in OPERATIONS}
        for name in names:
            for op in self.checks_config[name].get("operations", []):
                table.setdefault(op, []).append(name)
        return table

    def run(self, suite: str = "all", progress: bool = True) -> SuiteReport:
        names = self.selected(suite)
        tracker = SuiteProgressTracker(len(names)) if progress else None
        results = []
        for name in names:
            if tracker:
                tracker.start_check(name, self.checks_config[name].get("acceptance", ""))
            with experiment_span(f"check.{name}", seed=self.seed, suite=suite):
                result = self.run_check(name)
            results.append(result)
            logger.info(f"{'✅' if result.passed else '❌'} {name}: {len(result.rows)} rows, {len(result.flags)} flags")
            if tracker:
                tracker.complete_check(result.passed, len(result.rows))
        coverage = self.coverage(names)
        uncovered = [op for op in OPERATIONS if not coverage.get(op)] if suite == "all" else []
        return SuiteReport(
            suite=suite,
            seed=self.seed,
            scale=self.scale,
            checks=results,
            coverage=coverage,
            uncovered=uncovered,
            passed=all(r.passed for r in results) and not uncovered,
        )

    # ------------------------------------------------------------------
    # specfun
    # ------------------------------------------------------------------

    @check
    def hermite_values(self, params, seed) -> CheckOutcome:
        n_max, gram_n = params["n_max"], params["gram_n"]
        at_origin = specfun.hermite_table(n_max, np.array([0.0]))[:, 0]
        worst = 0.0
        for k in range(n_max // 2 + 1):
            exact = specfun.hermite_zero(k)
            worst = max(worst, abs(at_origin[2 * k] - exact) / abs(exact))
        known = [
            (0, 0.0, math.pi ** -0.25),
            (1, 0.0, 0.0),
            (2, 0.0, -math.sqrt(2.0) / (2.0 * math.pi ** 0.25)),
            (1, 1.0, math.sqrt(2.0) * math.pi ** -0.25 * math.exp(-0.5)),
        ]
        hand = max(abs(float(specfun.hermite_h(n, x)) - value) for n, x, value in known)
        half_width = math.sqrt(2 * gram_n + 1) + 6.0
        rule = measure.line_rule(-half_width, half_width, panels=8 * int(math.ceil(half_width)))
        table = specfun.hermite_table(gram_n, rule.coords["x"])
        gram = (table * rule.weights) @ table.T
        gram_error = float(np.abs(gram - np.eye(gram_n + 1)).max())
        rows = [
            _row(quantity="origin_rel_error", n_max=n_max, value=worst, tolerance=1e-10),
            _row(quantity="hand_values", n_max=2, value=hand, tolerance=1e-12),
            _row(quantity="gram_error", n_max=gram_n, value=gram_error, tolerance=1e-8),
        ]
        return CheckOutcome(passed=worst <= 1e-10 and hand <= 1e-12 and gram_error <= 1e-8, rows=rows)

    @check
    def hermite_asymptotics(self, params, seed) -> CheckOutcome:
        consts = self.constants.specfun
        grid = params["grid"]
        rows, passed = [], True
        for n in params["envelope_levels"]:
            edge = 2.0 * math.sqrt(2 * n + 1) + 4.0
            ok = bool(specfun.hermite_envelope_ok(n, np.linspace(-edge, edge, grid)).all())
            passed &= ok
            rows.append(_row(quantity="envelope", n=n, ratio=float(ok), passed=ok))
        for n in params["main_levels"]:
            big_n = 2 * n + 1
            upper = math.sqrt(big_n) - big_n ** (-1.0 / 6.0)
            x = np.linspace(0.0, upper, grid)
            error = np.abs(specfun.hermite_h(n, x) - specfun.muckenhoupt_main(n, x))
            bound = consts.muckenhoupt_C * math.sqrt(big_n) * (big_n - x * x) ** -1.75
            ratio = float((error / bound).max())
            squared_x = np.linspace(0.0, consts.squared_law_beta * math.sqrt(big_n), grid)
            squared_error = np.abs(
                specfun.hermite_h(n, squared_x) ** 2 - specfun.muckenhoupt_main(n, squared_x) ** 2
            ).max()
            squared_ratio = float(squared_error / (consts.squared_law_C * big_n ** -1.5))
            ok = ratio <= 1.0 and squared_ratio <= 1.0
            passed &= ok
            rows.append(_row(quantity="main_term", n=n, ratio=ratio, passed=ratio <= 1.0))
            rows.append(_row(quantity="squared_law", n=n, ratio=squared_ratio, passed=squared_ratio <= 1.0))
        phi_ok = (
            abs(specfun.phi_fn(0.0)) <= 1e-15
            and abs(specfun.phi_fn(1.0) - math.pi / 4.0) <= 1e-15
            and abs(specfun.phi_fn(0.5) - (math.pi / 12.0 + math.sqrt(3.0) / 8.0)) <= 1e-15
        )
        try:
            specfun.phi_fn(1.5)
            phi_ok = False
        except DomainError:
            pass
        rows.append(_row(quantity="phi_values", n=0, ratio=float(phi_ok), passed=phi_ok))
        return CheckOutcome(passed=passed and phi_ok, rows=rows)

    @check
    def jacobi_polynomials(self, params, seed) -> CheckOutcome:
        consts = self.constants.specfun
        n_max = params["n_max"]
        x = np.linspace(-1.0, 1.0, 101)
        rows, passed = [], True
        for alpha in params["alphas"]:
            table = specfun.jacobi_table(n_max, alpha, x)
            at_one = max(
                abs(float(specfun.jacobi_p(n, alpha, 1.0)) / specfun.jacobi_at_one(n, alpha) - 1.0)
                for n in range(n_max + 1)
            )
            signs = (-1.0) ** np.arange(n_max + 1)
            scale = np.abs(table).max(axis=1, keepdims=True)
            parity = float((np.abs(table[:, ::-1] - signs[:, None] * table) / scale).max())
            c_half = specfun.jacobi_band_constant(alpha, n_max // 2)
            c_full = specfun.jacobi_band_constant(alpha, n_max)
            drift = abs(c_full / c_half - 1.0)
            envelope = 0.0
            for n in range(1, n_max + 1):
                theta = np.linspace(c_full / n, math.pi - c_full / n, 200)
                values = np.abs(specfun.jacobi_p(n, alpha, np.cos(theta)))
                envelope = max(envelope, float((values * math.sqrt(n) * np.sin(theta) ** (alpha + 0.5)).max()))
            ok = at_one <= 1e-10 and parity <= 1e-10 and drift <= 0.1 and envelope <= consts.jacobi_envelope_C
            passed &= ok
            rows.append(
                _row(alpha=alpha, at_one=at_one, parity=parity, band_constant=c_full, band_drift=drift,
                     envelope=envelope, passed=ok)
            )
        c_one = specfun.jacobi_band_constant(0.0, 1)
        legendre = abs(c_one - math.pi / 3.0) <= 1e-6
        rows.append(_row(alpha=0.0, band_constant=c_one, target=math.pi / 3.0, passed=legendre))
        return CheckOutcome(passed=passed and legendre, rows=rows)

    @check
    def sphere_harmonics(self, params, seed) -> CheckOutcome:
        consts = self.constants.specfun
        rows = []
        passed = abs(specfun.y_norm_const(2, 0) - 1.0 / (2.0 * math.sqrt(math.pi))) <= 1e-14
        for d in params["dims"]:
            alpha = (d - 2) / 2.0
            c = specfun.jacobi_band_constant(alpha, max(params["levels"]))
            for n in params["levels"]:
                y_mass = measure.integrate_band(
                    d, lambda rho, th: np.abs(specfun.highest_weight_y(d, n, rho, th)) ** 2, oscillation=n // 2
                )
                y_growth = specfun.y_norm_const(d, n) * n ** (-(d - 1) / 4.0)
                z_exact = specfun.zonal_norm_sq(d, n)
                z_quad = measure.integrate_zonal(d, lambda th: specfun.zonal_z(d, n, th) ** 2, oscillation=n)
                theta = np.linspace(0.0, math.pi / 2.0, 257)
                reflection = float(
                    np.abs(np.abs(specfun.zonal_z(d, n, math.pi - theta)) - np.abs(specfun.zonal_z(d, n, theta))).max()
                ) / math.sqrt(z_exact)
                cap = np.linspace(0.0, c / n, 33)
                cap_min = float(np.abs(specfun.zonal_z(d, n, cap)).min()) * n ** (-(d - 1) / 2.0)
                ok = (
                    abs(y_mass - 1.0) <= 1e-8
                    and _inside(y_growth, consts.y_const_band)
                    and abs(z_quad / z_exact - 1.0) <= 1e-8
                    and _inside(math.sqrt(z_exact), consts.zonal_norm_band)
                    and reflection <= 1e-10
                    and cap_min >= 1.0 / consts.zonal_cap_C
                )
                passed &= ok
                rows.append(
                    _row(d=d, n=n, y_l2=y_mass, y_const_scaled=y_growth, z_norm_sq=z_exact, z_quadrature=z_quad,
                         reflection=reflection, cap_min_scaled=cap_min, passed=ok)
                )
        return CheckOutcome(passed=passed, rows=rows)

    # ------------------------------------------------------------------
    # measure
    # ------------------------------------------------------------------

    @check
    def quadrature_basics(self, params, seed) -> CheckOutcome:
        consts = self.constants.measure
        rows = []

        def record(quantity, value, target, tol):
            ok = abs(value - target) <= tol * max(abs(target), 1.0)
            rows.append(_row(quantity=quantity, value=value, target=target, passed=ok))
            return ok

        ok = record("area_S0", measure.sphere_area(0), 2.0, 1e-14)
        ok &= record("area_S1", measure.sphere_area(1), 2.0 * math.pi, 1e-14)
        ok &= record("area_S2", measure.sphere_area(2), 4.0 * math.pi, 1e-14)
        ok &= record("zonal_cos2_S2", measure.integrate_zonal(2, lambda th: np.cos(th) ** 2), 4.0 * math.pi / 3.0, 1e-10)
        for d in (2, 3):
            ok &= record(f"zonal_one_S{d}", measure.integrate_zonal(d, np.ones_like), measure.sphere_area(d), 1e-10)
            ok &= record(
                f"band_one_S{d}",
                measure.integrate_band(d, lambda rho, th: np.ones_like(rho)),
                measure.sphere_area(d),
                1e-10,
            )
        ok &= record("radial_gaussian_R2", measure.integrate_radial(2, lambda r: np.exp(-r * r)), math.pi, 1e-10)
        ok &= record(
            "radial_ball_R3",
            measure.integrate_radial(3, lambda r: (r <= 1.0).astype(float), breakpoints=(1.0,)),
            measure.ball_volume(3),
            1e-10,
        )
        ok &= record("torus_total", measure.torus_rule(64).total(), 1.0, 1e-14)
        ok &= record("box_total", measure.box_rule(3.0, 8).total(), 36.0, 1e-12)
        ok &= record("radial_rule_total", measure.radial_rule(2, 5.0, 10).total(), 25.0 * math.pi, 1e-12)
        ok &= record("zonal_rule_total", measure.zonal_rule(3, 8).total(), measure.sphere_area(3), 1e-12)
        ok &= record("band_rule_total", measure.band_rule(3, 64).total(), measure.sphere_area(3), 1e-10)

        sphere = measure.zonal_rule(2, 8)
        one = measure.SampledFunction(sphere, np.ones(sphere.size))
        ok &= record("lp_one_S2", measure.lp_norm(one, 2.0), math.sqrt(4.0 * math.pi), 1e-12)
        cap_rule = measure.zonal_rule(2, 8, breakpoints=(1.0,))
        indicator = measure.SampledFunction(cap_rule, (cap_rule.coords["theta"] <= 1.0).astype(float))
        cap_measure = 2.0 * math.pi * (1.0 - math.cos(1.0))
        ok &= record("weak_lp_indicator", measure.weak_lp_quasinorm(indicator, 3.0), cap_measure ** (1.0 / 3.0), 1e-10)
        smooth = measure.SampledFunction(cap_rule, np.cos(cap_rule.coords["theta"]) ** 2 + 0.1)
        weak, strong = measure.weak_lp_quasinorm(smooth, 3.0), measure.lp_norm(smooth, 3.0)
        weak_ok = weak <= strong * (1.0 + 1e-12)
        rows.append(_row(quantity="weak_le_strong", value=weak, target=strong, passed=weak_ok))
        cumulative, fstar = measure.decreasing_rearrangement(smooth)
        rearranged = bool(np.all(np.diff(fstar) <= 0.0)) and abs(cumulative[-1] - cap_rule.total()) <= 1e-12
        rows.append(_row(quantity="rearrangement", value=float(cumulative[-1]), target=cap_rule.total(),
                         passed=rearranged))

        estimate = measure.sphere_mc_integral(
            2, lambda pts: pts[:, 0] ** 2, params["mc_samples"], derive_seed(seed, "sphere-mc"), self.threads
        )
        mc_ok = estimate.within(4.0 * math.pi / 3.0, self.constants.series.zscore)
        rows.append(_row(quantity="mc_x1_squared", value=estimate.mean, target=4.0 * math.pi / 3.0,
                         stderr=estimate.stderr, passed=mc_ok))

        shell_ok = True
        for d in (2, 3):
            for n in (5, 20, 80):
                shell = measure.integrate_zonal(
                    d,
                    lambda th, n=n: ((th > 1.0 / (n + 1)) & (th <= 1.0 / n)).astype(float),
                    breakpoints=(1.0 / (n + 1), 1.0 / n),
                )
                scaled = shell * n ** (d + 1)
                inside = _inside(scaled, consts.cap_shell_band)
                shell_ok &= inside
                rows.append(_row(quantity=f"cap_shell_S{d}_n{n}", value=scaled, target=None, passed=inside))
        return CheckOutcome(passed=bool(ok and weak_ok and rearranged and mc_ok and shell_ok), rows=rows)

    # ------------------------------------------------------------------
    # spectral
    # ------------------------------------------------------------------

    @check
    def density_normalization(self, params, seed) -> CheckOutcome:
        consts = self.constants.spectral
        rows, passed = [], True
        families = [spectral.make_family(name, d) for name in ("hermite", "highest", "zonal") for d in params["dims"]]
        families.append(spectral.make_family("torus", 1))
        for family in families:
            for n in params["levels"]:
                if n < family.first_level:
                    continue
                mass = spectral.density_mass(family, n)
                ok = abs(mass - 1.0) <= 1e-6
                passed &= ok
                rows.append(_row(quantity="mass", family=spectral.family_name(family), d=family.d, n=n,
                                 value=mass, passed=ok))
        dims_ok = spectral.dim_e(2, 5) == 6 and spectral.dim_e(3, 4) == 15 and spectral.dim_e(1, 7) == 1
        rows.append(_row(quantity="dim_e", family="hermite", d=0, n=0, value=float(dims_ok), passed=dims_ok))
        n = params["recursion_n"]
        for d in params["recursion_dims"]:
            r = np.linspace(0.0, 1.5 * math.sqrt(2 * n + 1), 200)
            first = spectral.osc_spectral_table(d, n, r, "hermite-at-origin")
            second = spectral.osc_spectral_table(d, n, r, "spectral-at-origin")
            agreement = float((np.abs(first - second) / np.maximum(np.abs(first), 1e-280)).max())
            odd = float(abs(spectral.osc_spectral(d, 2 * (n // 2) + 1, 0.0)))
            ok = agreement <= 1e-8 and odd == 0.0
            passed &= ok
            rows.append(_row(quantity="recursions", family="hermite", d=d, n=n, value=agreement, passed=ok))
        for d in params["dims"]:
            for m in (10, 50, 100, 200, 400):
                scaled = float(spectral.osc_spectral(d, m, 0.0)) * m ** (1.0 - d / 2.0)
                ok = _inside(scaled, consts.origin_band)
                passed &= ok
                rows.append(_row(quantity="origin", family="hermite", d=d, n=m, value=scaled, passed=ok))
        return CheckOutcome(passed=passed and dims_ok, rows=rows)

    @check
    def oscillator_concentration(self, params, seed) -> CheckOutcome:
        consts = self.constants.spectral
        rows, passed = [], True
        for d in params["dims"]:
            for n in params["levels"]:
                report = spectral.osc_concentration_report(d, n)
                ok = (
                    report.min_ratio >= consts.concentration_band[0]
                    and report.max_ratio <= consts.concentration_band[1]
                    and report.tail_max <= consts.tail_bound
                )
                passed &= ok
                rows.append(_row(d=d, n=n, min_ratio=report.min_ratio, max_ratio=report.max_ratio,
                                 tail_max=report.tail_max, passed=ok))
        return CheckOutcome(passed=passed, rows=rows)

    @check
    def norm_exponents(self, params, seed) -> CheckOutcome:
        consts = self.constants.spectral
        d, p = params["d"], params["p"]
        rows, passed = [], True

        def slope(levels, values) -> float:
            return float(np.polyfit(np.log(levels), np.log(values), 1)[0])

        cases = [
            ("hermite", params["osc_levels"], 0.5 * (d / 2.0 - 1.0 + d / p)),
            ("highest", params["sphere_levels"], (d - 1) / 2.0 * (0.5 - 1.0 / p)),
        ]
        for name, levels, expected in cases:
            family = spectral.make_family(name, d)
            values = [spectral.sqrt_spectral_lp(family, n, p) for n in levels]
            fitted = slope(levels, values)
            ok = abs(fitted - expected) <= consts.slope_tol
            passed &= ok
            rows.append(_row(family=name, d=d, p=p, regime="power", value=fitted, expected=expected, passed=ok))

        critical = 2.0 * d / (d - 1)
        levels = params["sphere_levels"]
        below = [spectral.zonal_lp_profile(d, n, 0.75 * critical) for n in levels]
        bounded = max(below) / min(below) <= 2.0
        rows.append(_row(family="zonal", d=d, p=0.75 * critical, regime="subcritical",
                         value=max(below) / min(below), expected=2.0, passed=bounded))
        at = [spectral.zonal_lp_profile(d, n, critical) / math.sqrt(math.log(n + 1)) for n in levels]
        logarithmic = all(_inside(v, consts.critical_log_band) for v in at)
        rows.append(_row(family="zonal", d=d, p=critical, regime="critical", value=max(at), expected=None,
                         passed=logarithmic))
        above = [spectral.zonal_lp_profile(d, n, p) for n in levels]
        expected = (d - 1) / 2.0 - d / p
        fitted = slope(levels, above)
        power = abs(fitted - expected) <= consts.slope_tol
        rows.append(_row(family="zonal", d=d, p=p, regime="supercritical", value=fitted, expected=expected,
                         passed=power))
        return CheckOutcome(passed=passed and bounded and logarithmic and power, rows=rows)

    @check
    def tilde_surrogates(self, params, seed) -> CheckOutcome:
        consts = self.constants.spectral
        d = params["d"]
        highest, zonal = spectral.SphereHighest(d), spectral.SphereZonal(d)
        critical = 2.0 * d / (d - 1)
        rows, passed = [], True
        for n in params["levels"]:
            for p in params["exponents"]:
                ratio = spectral.tilde_profiles(highest, n).lp_norm(p) / specfun.y_lp_closed_form(d, n, p)
                ok = _inside(ratio, consts.tilde_ratio_band)
                passed &= ok
                rows.append(_row(quantity="y_tilde", n=n, p=p, value=ratio, passed=ok))
                if p > critical:
                    ratio = spectral.tilde_profiles(zonal, n).lp_norm(p) / spectral.zonal_lp_profile(d, n, p)
                    ok = _inside(ratio, consts.tilde_ratio_band)
                    passed &= ok
                    rows.append(_row(quantity="z_tilde", n=n, p=p, value=ratio, passed=ok))
            envelope = spectral.y_envelope_ratio(d, n)
            ok = envelope <= consts.y_envelope_C * (1.0 + 1e-12)
            passed &= ok
            rows.append(_row(quantity="y_envelope", n=n, p=None, value=envelope, passed=ok))
        for n1, n2 in params["product_pairs"]:
            exact = spectral.y_product_l2(d, n1, n2)
            quadrature = spectral.y_product_l2_quadrature(d, n1, n2)
            ok = abs(exact / quadrature - 1.0) <= 1e-6
            multilinear = spectral.tilde_product_l2(d, n1, n2) / n2 ** ((d - 1) / 2.0)
            ok &= _inside(multilinear, consts.multilinear_band)
            passed &= ok
            rows.append(_row(quantity="product", n=n1, p=n2, value=exact / quadrature,
                             multilinear=multilinear, passed=ok))
        return CheckOutcome(passed=passed, rows=rows)

    @check
    def spectral_export(self, params, seed) -> CheckOutcome:
        rows = spectral.export_spectral_table(None, params["d"], params["levels"], params["r_points"])
        complete = len(rows) == len(params["levels"]) * params["r_points"]
        finite = all(math.isfinite(row["e"]) and row["e"] >= 0.0 for row in rows)
        columns = all(tuple(row) == spectral.SPECTRAL_TABLE_COLUMNS for row in rows)
        summary = [
            _row(n=n, rows=sum(1 for row in rows if row["n"] == n),
                 e_max=max(row["e"] for row in rows if row["n"] == n))
            for n in params["levels"]
        ]
        return CheckOutcome(passed=complete and finite and columns, rows=summary)

    # ------------------------------------------------------------------
    # randmat
    # ------------------------------------------------------------------

    @check
    def haar_identities(self, params, seed) -> CheckOutcome:
        rows, passed = [], True
        rng = np.random.default_rng(derive_seed(seed, "fixed-matrices"))
        for d in params["dims"]:
            a = rng.standard_normal((d, d))
            for ensemble in (randmat.HaarOrthogonal(), randmat.HaarUnitary()):
                moments = randmat.haar_trace_moments(
                    ensemble, d, a, params["samples"], derive_seed(seed, f"{ensemble.name}-d{d}"), self.threads
                )
                ok = moments.passed()
                passed &= ok
                rows.append(_row(ensemble=ensemble.name, d=d, first=moments.first_real.mean,
                                 second=moments.second.mean, target=moments.target, passed=ok))
            q = randmat.sample(randmat.HaarOrthogonal(), d, rng)
            orthogonal = float(np.abs(q.T @ q - np.eye(d)).max()) <= 1e-12
            passed &= orthogonal
            rows.append(_row(ensemble="haar-o", d=d, first=None, second=None, target=None, passed=orthogonal))
        ks = randmat.orthogonal_invariance_ks(5, params["samples"], derive_seed(seed, "ks"), threads=self.threads)
        rows.append(_row(ensemble="haar-o", d=5, first=ks.statistic, second=ks.pvalue, target=None,
                         passed=ks.passed))
        return CheckOutcome(passed=passed and ks.passed, rows=rows)

    @check
    def operator_norm_moments(self, params, seed) -> CheckOutcome:
        consts = self.constants.randmat
        ensemble = randmat.IIDEntries(randmat.EntryLaw("rademacher"))
        rows = []
        first = randmat.opnorm_profile(ensemble, params["dims"], 1.0, params["samples"], seed, self.threads)
        eighth = randmat.opnorm_profile(
            ensemble, params["dims"], 8.0, params["samples"], derive_seed(seed, "eighth"), self.threads
        )
        means = [estimate.mean for _, estimate in first]
        spread = max(means) / min(means) - 1.0
        spread_ok = spread <= consts.opnorm_spread
        eighth_ok = all(estimate.mean <= consts.moment8_C for _, estimate in eighth)
        for (d, one), (_, eight) in zip(first, eighth):
            rows.append(_row(quantity="opnorm", d=d, value=one.mean, stderr=one.stderr, eighth=eight.mean))
        q = params["q"]
        ratio = randmat.kk_moment_ratio(ensemble, 50, q, params["samples"], derive_seed(seed, "kk"), self.threads)
        ratio_ok = ratio.value <= consts.kk_K * math.sqrt(q)
        rows.append(_row(quantity="kk_ratio", d=50, value=ratio.value, stderr=ratio.stderr, eighth=None))
        sigma_ok = True
        for d in (5, 20):
            sigma = randmat.mc_sigma_expected_abs(
                ensemble, d, params["samples"], derive_seed(seed, f"sigma-d{d}"), self.threads
            )
            bound = randmat.sigma_lower_bound(ensemble.law)
            sigma_ok &= sigma.mean >= bound
            rows.append(_row(quantity="sigma", d=d, value=sigma.mean, stderr=sigma.stderr, eighth=bound))
        m = np.random.default_rng(derive_seed(seed, "abs")).standard_normal((6, 6))
        root = randmat.matrix_abs(m)
        abs_ok = float(np.abs(root @ root - m.T @ m).max()) <= 1e-10
        rows.append(_row(quantity="matrix_abs", d=6, value=float(abs_ok), stderr=0.0, eighth=None))
        return CheckOutcome(passed=spread_ok and eighth_ok and ratio_ok and sigma_ok and abs_ok, rows=rows)

    @check
    def heavy_tails(self, params, seed) -> CheckOutcome:
        consts = self.constants.randmat
        p = params["p"]
        law = randmat.EntryLaw("heavytail", p)
        rng = np.random.default_rng(derive_seed(seed, "moments"))
        draws = np.abs(randmat.heavytail_sample(p, rng, params["moment_samples"]))
        rows, passed = [], True
        for q in (0.5, 1.0):
            powered = draws ** q
            exact = randmat.heavytail_moment(p, q)
            z = abs(powered.mean() - exact) / (powered.std(ddof=1) / math.sqrt(powered.size))
            ok = z <= consts.zscore
            passed &= ok
            rows.append(_row(quantity=f"moment_q{q:g}", value=float(powered.mean()), target=exact, passed=ok))
        small, large = params["dims"]
        ensemble = randmat.IIDEntries(law)
        norms = randmat.opnorm_profile(ensemble, [small, large], 1.0, params["samples"], seed, self.threads)
        growth = norms[1][1].mean / norms[0][1].mean
        ok = growth >= consts.heavytail_growth_min
        passed &= ok
        rows.append(_row(quantity="opnorm_growth", value=growth, target=consts.heavytail_growth_min, passed=ok))
        entries = [
            randmat.max_entry_growth(law, d, params["samples"], derive_seed(seed, f"max-d{d}"), self.threads).mean
            for d in (small, large)
        ]
        ok = entries[1] / entries[0] >= consts.heavytail_growth_min
        passed &= ok
        rows.append(_row(quantity="max_entry_growth", value=entries[1] / entries[0],
                         target=consts.heavytail_growth_min, passed=ok))
        weights = randmat.random_sparse_weights(40, 0.2, rng)
        latala = randmat.latala_check(weights, params["samples"], derive_seed(seed, "latala"), self.threads)
        passed &= latala.passed
        rows.append(_row(quantity="latala", value=latala.estimate.mean, target=latala.constant * latala.bound,
                         passed=latala.passed))
        return CheckOutcome(passed=passed, rows=rows)

    # ------------------------------------------------------------------
    # series
    # ------------------------------------------------------------------

    def _spec(self, name: str, d: int, N: int, ensemble: randmat.Ensemble) -> series.RandomSeriesSpec:
        family = spectral.make_family(name, d)
        return series.RandomSeriesSpec.from_level_norms(family, series.default_level_norms(family, N), ensemble)

    @check
    def universality(self, params, seed) -> CheckOutcome:
        consts = self.constants.series
        ensembles = series.ensembles_from_names(randmat.STANDARD_ENSEMBLES)
        rows, passed = [], True
        for name, d in params["cases"]:
            for p in params["exponents"]:
                ratios = {}
                for N in params["truncations"]:
                    spec = self._spec(name, d, N, randmat.HaarOrthogonal())
                    table = series.universality_ratio(
                        spec, p, ensembles, params["samples"], derive_seed(seed, f"{name}-{d}-{p:g}-{N}"), self.threads
                    )
                    ok = table.passed and table.spread <= consts.universality_max_ratio
                    passed &= ok
                    for row in table.rows:
                        ratios.setdefault(row.ensemble, []).append(row.ratio)
                        rows.append(row.model_dump(by_alias=True, exclude={"note"}))
                for ensemble, values in ratios.items():
                    stable = all(abs(b / a - 1.0) <= consts.n_stability for a, b in zip(values, values[1:]))
                    passed &= stable
                    rows.append(_row(experiment="n_stability", family=name, d=d, ensemble=ensemble, p=p,
                                     ratio=values[-1] / values[0], band=[1 - consts.n_stability,
                                                                         1 + consts.n_stability], **{"pass": stable}))
        spec = self._spec("highest", 2, 5, randmat.Identity())
        rng = np.random.default_rng(derive_seed(seed, "identity"))
        draw = series.sample_series(spec, rng)
        rule = spec.grid()
        deterministic = spec.family.synthesize(spec.coefficients, rule)
        identity = float(np.abs(draw.values - deterministic).max()) <= 1e-12
        rows.append(_row(experiment="identity_draw", family="highest", d=2, ensemble="identity", p=2.0,
                         ratio=1.0, band=None, **{"pass": identity}))
        return CheckOutcome(passed=passed and identity, rows=rows)

    @check
    def kkmp_ratio(self, params, seed) -> CheckOutcome:
        consts = self.constants.series
        p, N = params["p"], params["N"]
        rows, passed = [], True
        for name, d in params["cases"]:
            for ensemble_name in params["ensembles"]:
                spec = self._spec(name, d, N, randmat.parse_ensemble(ensemble_name))
                ratio = series.kkmp_ratio(
                    spec, p, params["samples"], derive_seed(seed, f"{name}-{d}-{ensemble_name}"), self.threads
                )
                upper = consts.kkmp_K * math.sqrt(p)
                ok = 1.0 - consts.zscore * ratio.stderr <= ratio.value <= upper
                passed &= ok
                rows.append(_row(family=name, d=d, ensemble=ensemble_name, p=p, ratio=ratio.value,
                                 stderr=ratio.stderr, upper=upper, passed=ok))
        return CheckOutcome(passed=passed, rows=rows)

    @check
    def hs_identity(self, params, seed) -> CheckOutcome:
        rng = np.random.default_rng(derive_seed(seed, "matrices"))
        rows, passed = [], True
        for instance in range(params["instances"]):
            sizes = rng.choice([1, 2, 3, 5], size=int(rng.integers(1, 5)))
            matrices = [rng.standard_normal((k, k)) for k in sizes]
            result = series.hs_identity_check(
                matrices, randmat.HaarOrthogonal(), params["samples"], derive_seed(seed, f"instance-{instance}"),
                self.threads,
            )
            passed &= result.passed
            rows.append(_row(instance=instance, sizes=[int(k) for k in sizes], estimate=result.estimate.mean,
                             stderr=result.estimate.stderr, target=result.target, passed=result.passed))
        m = randmat.sample(randmat.HaarOrthogonal(), 4, rng)
        c = rng.standard_normal(4)
        phi = rng.standard_normal((4, 20))
        trace_ok = float(np.abs(series.trace_form(m, c, phi) - (m @ c) @ phi).max()) <= 1e-12
        rows.append(_row(instance=-1, sizes=[4], estimate=None, stderr=None, target=None, passed=trace_ok))
        return CheckOutcome(passed=passed and trace_ok, rows=rows)

    @check
    def contraction(self, params, seed) -> CheckOutcome:
        name, d = params["family"]
        rows, passed = [], True
        for ensemble_name in params["ensembles"]:
            spec = self._spec(name, d, params["N"], randmat.parse_ensemble(ensemble_name))
            result = series.contraction_check(
                spec, params["p"], None, params["samples"], derive_seed(seed, ensemble_name), self.threads
            )
            ok = result.passed
            if ensemble_name.endswith("haar-o"):
                ok &= abs(result.lhs - result.rhs) <= 1e-9 * result.rhs
            passed &= ok
            rows.append(_row(ensemble=ensemble_name, c=result.c, lhs=result.lhs, rhs=result.rhs,
                             lhs_stderr=result.lhs_stderr, rhs_stderr=result.rhs_stderr, passed=ok))
        return CheckOutcome(passed=passed, rows=rows)

    @check
    def salem_zygmund(self, params, seed) -> CheckOutcome:
        band = self.constants.series.salem_zygmund_band
        rows, passed, flags = [], True, []
        for k in params["exponents"]:
            N = 2 ** k
            result = series.torus_salem_zygmund(
                N, params["samples"], seed=derive_seed(seed, f"N{N}"), threads=self.threads
            )
            ok = _inside(result.estimate.mean, band) and result.min_sup >= math.sqrt(N) * (1.0 - 1e-12)
            passed &= ok
            flags.extend(result.flags)
            rows.append(_row(N=N, ratio=result.estimate.mean, stderr=result.estimate.stderr,
                             min_sup=result.min_sup, grid_size=result.grid_size, passed=ok))
        return CheckOutcome(passed=passed, rows=rows, flags=flags)

    @check
    def heavytail_divergence(self, params, seed) -> CheckOutcome:
        p, N_list = params["p"], params["N_list"]
        heavy = series.heavytail_divergence_demo(
            p, N_list, derive_seed(seed, "heavytail"), params["trajectories"], "heavytail", self.threads
        )
        bounded = series.heavytail_divergence_demo(
            p, N_list, derive_seed(seed, "rademacher"), params["rademacher_trajectories"], "rademacher", self.threads
        )
        grows = heavy[-1].median_running_max > heavy[0].median_running_max
        monotone = all(b.running_max >= a.running_max for a, b in zip(heavy, heavy[1:]))
        windows = [row.median_window_max for row in bounded]
        vanishes = all(b < a for a, b in zip(windows, windows[1:]))
        rows = [dict(law="heavytail", **row.model_dump()) for row in heavy]
        rows += [dict(law="rademacher", **row.model_dump()) for row in bounded]
        return CheckOutcome(passed=grows and monotone and vanishes, rows=rows)

    # ------------------------------------------------------------------
    # plp
    # ------------------------------------------------------------------

    @check
    def closed_forms(self, params, seed) -> CheckOutcome:
        consts = self.constants.plp
        d, p = params["d"], params["p"]
        rng = np.random.default_rng(seed)
        bands = {"highest": consts.y_band, "zonal": consts.z_band, "hermite": consts.hermite_band}
        rows, passed = [], True
        for instance in range(params["instances"]):
            levels = int(rng.integers(1, params["max_levels"] + 1))
            norms = rng.random(levels) * (rng.random(levels) < 0.7)
            norms[int(rng.integers(levels))] = 1.0
            for name, band in bands.items():
                family = spectral.make_family(name, d)
                row = plp.closed_form_ratio(family, norms, p)
                ok = _inside(row.ratio, band)
                passed &= ok
                rows.append(dict(instance=instance, **row.model_dump(), passed=ok))
        zonal = spectral.SphereZonal(d)
        for beta in params["betas"]:
            sequence = plp.PowerLogSeq(sigma=d * (0.5 - 1.0 / p), tau=beta / p, start=2)
            member = plp.plp_membership(zonal, sequence, p)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", DivergenceWarning)
                value = plp.z_closed_form(sequence, p, d)
            ok = member == (beta > 1.0) and (value is not None and math.isfinite(value)) == member
            passed &= ok
            rows.append(dict(instance=-1, family="zonal-log", d=d, p=p, n_max=0, closed_form=value,
                             quadrature=None, ratio=beta, passed=ok))
        y_value = plp.y_closed_form(plp.GeometricSeq(0.5), p, d)
        y_ok = y_value is not None and math.isfinite(y_value)
        rows.append(dict(instance=-1, family="highest-geometric", d=d, p=p, n_max=0, closed_form=y_value,
                         quadrature=None, ratio=None, passed=y_ok))
        return CheckOutcome(passed=passed and y_ok, rows=rows)

    @check
    def critical_exponents(self, params, seed) -> CheckOutcome:
        d = params["d"]
        zonal, highest = spectral.SphereZonal(d), spectral.SphereHighest(d)
        rows, passed = [], True
        for p0 in params["p0"]:
            for beta in params["betas"]:
                sequence = plp.PowerLogSeq(sigma=d * (0.5 - 1.0 / p0), tau=beta / p0, start=2)
                found = plp.critical_exponent(zonal, sequence)
                ok = abs(found - p0) <= 1e-2
                passed &= ok
                rows.append(_row(family="zonal", sequence=f"log(p0={p0:g}, beta={beta:g})", p_c=found,
                                 expected=p0, passed=ok))
        for family in (highest, zonal):
            found = plp.critical_exponent(family, plp.GeometricSeq(0.5))
            ok = math.isinf(found)
            passed &= ok
            rows.append(_row(family=spectral.family_name(family), sequence="2^-n", p_c=found, expected=math.inf,
                             passed=ok))
        slow = plp.PowerLogSeq(sigma=0.5, tau=1.0, start=2)
        rejected = plp.l2_membership(slow) and not any(
            plp.plp_membership(highest, slow, p) for p in (2.5, 3.0, 4.0, 8.0, 16.0)
        )
        found = plp.critical_exponent(highest, slow)
        rejected &= found == 2.0
        rows.append(_row(family="highest", sequence="1/(sqrt(n) ln n)", p_c=found, expected=2.0, passed=rejected))
        return CheckOutcome(passed=passed and rejected, rows=rows)

    @check
    def interpolation(self, params, seed) -> CheckOutcome:
        p1, p2 = params["p1"], params["p2"]
        rows = []
        line = measure.line_rule(0.0, 3.0, panels=8, breakpoints=(1.0,))
        indicator = measure.SampledFunction(line, (line.coords["x"] <= 1.0).astype(float))
        q_indicator = plp.interpolation_defect(indicator, p1, p2)
        indicator_ok = abs(q_indicator - 1.0) <= 1e-6
        rows.append(_row(profile="indicator", defect=q_indicator, target=1.0, passed=indicator_ok))

        wide = measure.line_rule(-12.0, 12.0, panels=48)
        gaussian = measure.SampledFunction(wide, np.exp(-wide.coords["x"] ** 2))

        def log_quotient(p: float) -> float:
            t1, t2 = plp.thetas(p1, p, p2)
            return (
                t1 * math.log(plp.gaussian_lp_norm(p1))
                + t2 * math.log(plp.gaussian_lp_norm(p2))
                - math.log(plp.gaussian_lp_norm(p))
            )

        best = minimize_scalar(lambda p: -log_quotient(p), bounds=(p1, p2), method="bounded",
                               options={"xatol": 1e-10})
        oracle = max(math.exp(-best.fun), 1.0)
        q_gaussian = plp.interpolation_defect(gaussian, p1, p2)
        gaussian_ok = abs(q_gaussian - oracle) <= 1e-4
        rows.append(_row(profile="gaussian", defect=q_gaussian, target=oracle, passed=gaussian_ok))
        middle = 0.5 * (p1 + p2)
        lower, actual = plp.interpolation_lower_bound(gaussian, p1, p2, middle)
        lower_ok = lower <= actual * (1.0 + 1e-12)
        rows.append(_row(profile="gaussian-lower-bound", defect=lower, target=actual, passed=lower_ok))

        rng = np.random.default_rng(seed)
        profile_rule = measure.line_rule(-10.0, 10.0, panels=40)
        x = profile_rule.coords["x"]
        witness_ok = True
        for index in range(params["profiles"]):
            bumps = int(rng.integers(1, 4))
            values = sum(
                rng.uniform(-1.0, 1.0) * np.exp(-((x - rng.uniform(-4.0, 4.0)) ** 2) / rng.uniform(0.2, 3.0))
                for _ in range(bumps)
            )
            phi = measure.SampledFunction(profile_rule, values)
            result = plp.holder_witness(phi, p1, p2)
            ok = result.passed(1e-6)
            witness_ok &= ok
            rows.append(_row(profile=f"random-{index}", defect=result.defect, target=result.bound, passed=ok))
        return CheckOutcome(passed=indicator_ok and gaussian_ok and lower_ok and witness_ok, rows=rows)

    @check
    def norms_and_duality(self, params, seed) -> CheckOutcome:
        consts = self.constants.plp
        d, p, N = params["d"], params["p"], params["N"]
        highest, zonal, oscillator = (spectral.make_family(name, d) for name in ("highest", "zonal", "hermite"))
        rows = []
        known = plp.sobolev_norm(highest, [1.0, 0.0, 0.0], 1.0)
        sobolev_ok = abs(known - 2.0) <= 1e-12
        sobolev_ok &= plp.sobolev_membership(highest, plp.PowerLogSeq(1.0), 0.4)
        sobolev_ok &= not plp.sobolev_membership(highest, plp.PowerLogSeq(1.0), 0.6)
        rows.append(_row(quantity="sobolev", family="highest", value=known, target=2.0, passed=sobolev_ok))

        rng = np.random.default_rng(seed)
        duality_ok = inclusion_ok = True
        for family in (highest, zonal, oscillator):
            levels = N if family is not oscillator else N // 2
            u, w = rng.random(levels), rng.random(levels)
            result = plp.duality_pairing(family, u, w, p)
            duality_ok &= result.passed
            rows.append(_row(quantity="duality", family=spectral.family_name(family), value=result.middle,
                             target=result.bound, passed=result.passed))
            if family is not zonal:
                small, large = plp.plp_norm_quadrature(family, u, 2.0), plp.plp_norm_quadrature(family, u, p)
                ratio = small / large if family is highest else large / small
                ok = ratio <= consts.inclusion_C
                inclusion_ok &= ok
                rows.append(_row(quantity="inclusion", family=spectral.family_name(family), value=ratio,
                                 target=consts.inclusion_C, passed=ok))

        sphere = plp.hypothesis_checks(highest, p, N)
        stable = sphere.weak_stability <= consts.hypothesis_stability
        rows.append(_row(quantity="weak_stability", family="highest", value=sphere.weak_stability,
                         target=consts.hypothesis_stability, passed=stable))
        supercritical = plp.hypothesis_checks(zonal, 6.0, N)
        grows = supercritical.product_growth >= consts.product_growth_min
        rows.append(_row(quantity="product_growth", family="zonal", value=supercritical.product_growth,
                         target=consts.product_growth_min, passed=grows))
        harmonic = plp.hypothesis_checks(oscillator, p, N // 2)
        envelope = bool(harmonic.envelope_ok)
        rows.append(_row(quantity="envelope", family="hermite", value=harmonic.weak_N, target=None,
                         passed=envelope))
        return CheckOutcome(
            passed=sobolev_ok and duality_ok and inclusion_ok and stable and grows and envelope, rows=rows
        )

    @check
    def embedding_sweep(self, params, seed) -> CheckOutcome:
        rows, passed = [], True
        for name, d, p in params["cases"]:
            family = spectral.make_family(name, d)
            sweep = plp.embedding_sweep(family, p, params["n_max"], seed=derive_seed(seed, f"{name}-{d}"))
            passed &= all(row.passed for row in sweep)
            rows.extend(row.model_dump(by_alias=True) for row in sweep)
        return CheckOutcome(passed=passed, rows=rows)

    @check
    def counterexample(self, params, seed) -> CheckOutcome:
        rows, passed = [], True
        for p in params["exponents"]:
            for N in (1, 2, 7, params["N_max"]):
                shifted, plain = plp.r_boundedness_counterexample(p, N)
                ok = abs(shifted / N ** (p / 2.0) - 1.0) <= 1e-12 and abs(plain / N - 1.0) <= 1e-12
                passed &= ok
                rows.append(_row(p=p, N=N, shifted=shifted, plain=plain, passed=ok))
        return CheckOutcome(passed=passed, rows=rows)

    # ------------------------------------------------------------------
    # cli
    # ------------------------------------------------------------------

    @check
    def report_determinism(self, params, seed) -> CheckOutcome:
        from ..main import run

        argv = list(params["argv"]) + ["--seed", str(seed)]
        payloads, codes = [], []
        with tempfile.TemporaryDirectory() as workdir:
            for threads in (1, 4):
                out = os.path.join(workdir, f"report-{threads}.json")
                codes.append(run(argv + ["--threads", str(threads), "--out", out]))
                with open(out, "rb") as handle:
                    payloads.append(handle.read())
        identical = payloads[0] == payloads[1] and codes[0] == codes[1]
        rows = [_row(threads=threads, exit_code=code, size=len(data))
                for threads, code, data in zip((1, 4), codes, payloads)]
        return CheckOutcome(passed=identical and codes[0] in (0, 1), rows=rows)
