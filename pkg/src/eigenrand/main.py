#!/usr/bin/env python
"""
eigenrand command line.

    eigenrand spectral-table --d 2 --n 5,10,50 --out fig.csv
    eigenrand randmat-moments --ensemble iid-rademacher --d 20,50,100 --samples 400 --seed 1
    eigenrand series-mc --family zonal --d 2 --p 5 --N 40 --ensemble haar-o --samples 400 --seed 7
    eigenrand plp-sweep --family highest --d 2 --p 6
    eigenrand verify --suite all --seed 42

Exit codes: 0 success, 1 failed acceptance band or flagged report, 2 usage error.
"""
import argparse
import json
import logging
import math
import os
import re
import sys
import warnings
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from . import __version__, plp, randmat, series, spectral
from .constants import get_constants
from .errors import DomainError, EigenrandError, warning_flags
from .phoenix_config import cleanup_phoenix, experiment_span, setup_phoenix_observability
from .tools.montecarlo import derive_seed
from .tools.tracking_tools import PerformanceTracker, setup_detailed_logging

# Load environment variables from .env file
try:
    from dotenv import load_dotenv

    load_dotenv()
except ImportError:
    # Manual .env loading as fallback
    if os.path.exists(".env"):
        with open(".env", "r") as f:
            for line in f:
                if line.strip() and not line.startswith("#") and "=" in line:
                    key, value = line.strip().split("=", 1)
                    os.environ.setdefault(key, value)

logger = logging.getLogger("eigenrand.main")

SCHEMA_VERSION = 1
SUBCOMMANDS = ("spectral-table", "randmat-moments", "series-mc", "plp-sweep", "verify")
EXECUTION_ONLY = {"threads", "out"}


def create_filename(experiment: str, label: str, extension: str = "json") -> str:
    """
    Create a safe report filename from the experiment name and a label.

    Args:
        experiment: The subcommand
        label: Distinguishing label (family, suite, seed)
        extension: File extension (default: json)
    """
    parts = []
    for text in (experiment, label):
        safe = re.sub(r"[^\w\s.-]", "", str(text).lower())
        safe = re.sub(r"[-\s]+", "-", safe).strip("-")
        if len(safe) > 50:
            safe = safe[:50].rstrip("-")
        if safe:
            parts.append(safe)
    return f"{'-'.join(parts)}.{extension}"


class RunConfig(BaseModel):
    """Resolved configuration of one CLI run."""

    subcommand: str
    family: Optional[str] = Field(default=None, description="hermite, highest, zonal or torus")
    d: List[int] = Field(default_factory=list, description="dimension(s)")
    n: List[int] = Field(default_factory=list, description="levels for spectral-table")
    N: Optional[int] = Field(default=None, description="truncation level")
    p: Optional[float] = None
    q: Optional[float] = None
    ensemble: List[str] = Field(default_factory=list)
    samples: int = 200
    seed: Optional[int] = None
    suite: str = "all"
    scale: str = Field(default="desk", description="verify: desk or acceptance parameter sizes")
    n_max: int = 4096
    r_points: int = 200
    format: str = "json"
    threads: Optional[int] = Field(default=None, description="worker count; execution only")
    out: Optional[str] = Field(default=None, description="output path; execution only")

    @field_validator("subcommand")
    @classmethod
    def known_subcommand(cls, value: str) -> str:
        if value not in SUBCOMMANDS:
            raise ValueError(f"unknown subcommand {value!r}")
        return value

    @field_validator("format")
    @classmethod
    def known_format(cls, value: str) -> str:
        if value not in ("csv", "json"):
            raise ValueError("format must be csv or json")
        return value

    @model_validator(mode="after")
    def check_requirements(self) -> "RunConfig":
        if self.stochastic and self.seed is None:
            raise ValueError(f"{self.subcommand} is stochastic: --seed is required")
        if self.format == "csv" and self.subcommand not in ("spectral-table", "plp-sweep"):
            raise ValueError(f"{self.subcommand} writes JSON reports only")
        if self.family is not None and self.family not in spectral.FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {sorted(spectral.FAMILIES)}")
        needs = {
            "spectral-table": ("d", "n"),
            "randmat-moments": ("d", "ensemble"),
            "series-mc": ("family", "d", "p", "N"),
            "plp-sweep": ("family", "d", "p"),
        }.get(self.subcommand, ())
        missing = [name for name in needs if getattr(self, name) in (None, [])]
        if missing:
            raise ValueError(f"{self.subcommand} needs " + ", ".join(f"--{m}" for m in missing))
        return self

    @model_validator(mode="after")
    def check_domains(self) -> "RunConfig":
        """Argument domains are settled here so that a DomainError raised later is a numerical failure."""
        if any(d < 1 for d in self.d) or any(n < 0 for n in self.n):
            raise ValueError("--d must be >= 1 and --n >= 0")
        if self.samples < 1 or (self.N is not None and self.N < 1):
            raise ValueError("--samples and --N must be >= 1")
        if (self.p is not None and self.p <= 0) or (self.q is not None and self.q <= 0):
            raise ValueError("--p and --q must be positive")
        if self.subcommand == "verify":
            from .suites import SUITES

            if self.suite != "all" and self.suite not in SUITES:
                raise ValueError(f"unknown suite {self.suite!r}; expected all or one of {SUITES}")
        if self.scale not in ("desk", "acceptance"):
            raise ValueError(f"unknown scale {self.scale!r}; expected desk or acceptance")
        try:
            for name in self.ensemble:
                randmat.parse_ensemble(name)
            if self.family is not None:
                for d in self.d:
                    family = spectral.make_family(self.family, d)
                    if self.subcommand == "plp-sweep":
                        plp.check_sweep_arguments(family, self.p, self.n_max)
        except DomainError as exc:
            raise ValueError(str(exc)) from None
        return self

    @property
    def stochastic(self) -> bool:
        if self.subcommand in ("randmat-moments", "series-mc", "verify"):
            return True
        return self.subcommand == "plp-sweep" and self.family == "hermite"

    def report_config(self) -> Dict[str, Any]:
        return self.model_dump(exclude=EXECUTION_ONLY)


def _int_list(text: str) -> List[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def _str_list(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eigenrand", description="Spectral functions, random series and PL^p norms")
    parser.add_argument("--version", action="version", version=f"eigenrand {__version__}")
    commands = parser.add_subparsers(dest="subcommand", required=True)

    def common(sub, stochastic: bool = True):
        sub.add_argument("--seed", type=int, default=None, help="master seed" + (" (required)" if stochastic else ""))
        sub.add_argument("--threads", type=int, default=None, help="worker count (default: EIGENRAND_THREADS or cpus)")
        sub.add_argument("--out", default=None, help="output path (default: EIGENRAND_OUTPUT_DIR/<name>)")

    sub = commands.add_parser("spectral-table", help="oscillator spectral function rows e_d(n, r)")
    sub.add_argument("--d", type=_int_list, required=True)
    sub.add_argument("--n", type=_int_list, required=True, help="comma-separated levels")
    sub.add_argument("--r-points", dest="r_points", type=int, default=200)
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    common(sub, stochastic=False)

    sub = commands.add_parser("randmat-moments", help="operator-norm moments across matrix sizes")
    sub.add_argument("--ensemble", type=_str_list, required=True)
    sub.add_argument("--d", type=_int_list, required=True, help="comma-separated sizes")
    sub.add_argument("--p", type=float, default=1.0, help="moment order of the operator norm")
    sub.add_argument("--q", type=float, default=None, help="order of the moment ratio E^{1/q}/E")
    sub.add_argument("--samples", type=int, default=400)
    common(sub)

    sub = commands.add_parser("series-mc", help="universality ratios of a randomized series")
    sub.add_argument("--family", required=True)
    sub.add_argument("--d", type=_int_list, required=True)
    sub.add_argument("--p", type=float, required=True)
    sub.add_argument("--N", type=int, required=True)
    sub.add_argument("--ensemble", type=_str_list, default=list(randmat.STANDARD_ENSEMBLES))
    sub.add_argument("--samples", type=int, default=200)
    common(sub)

    sub = commands.add_parser("plp-sweep", help="Sobolev embedding sweep around the critical exponent")
    sub.add_argument("--family", required=True)
    sub.add_argument("--d", type=_int_list, required=True)
    sub.add_argument("--p", type=float, required=True)
    sub.add_argument("--n-max", dest="n_max", type=int, default=4096)
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    common(sub, stochastic=False)

    sub = commands.add_parser("verify", help="run verification checks")
    sub.add_argument("--suite", default="all")
    sub.add_argument("--scale", choices=("desk", "acceptance"), default="desk",
                     help="parameter sizes: desk (default) or the full acceptance scale")
    common(sub)
    return parser


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------


def _spectral_table(config: RunConfig, path: Optional[str]) -> Dict[str, Any]:
    rows = []
    for d in config.d:
        rows.extend(spectral.export_spectral_table(None, d, config.n, config.r_points))
    if path and config.format == "csv":
        spectral.write_spectral_csv(rows, path)
    passed = all(math.isfinite(row["e"]) for row in rows)
    return {"rows": rows, "passed": passed}


def _randmat_moments(config: RunConfig, path: Optional[str]) -> Dict[str, Any]:
    consts = get_constants().randmat
    rows, passed = [], True
    for name in config.ensemble:
        ensemble = randmat.parse_ensemble(name)
        seed = derive_seed(config.seed, name)
        profile = randmat.opnorm_profile(ensemble, config.d, config.p, config.samples, seed, config.threads)
        for d, estimate in profile:
            row = {
                "ensemble": name, "d": d, "p": config.p, "moment": estimate.mean,
                "stderr": estimate.stderr, "samples": estimate.samples, "seed": estimate.seed,
            }
            if config.q is not None:
                ratio = randmat.kk_moment_ratio(
                    ensemble, d, config.q, config.samples, derive_seed(seed, f"kk-d{d}"), config.threads
                )
                row.update(ratio=ratio.value, ratio_stderr=ratio.stderr, ratio_bound=consts.kk_K * math.sqrt(config.q))
                passed &= ratio.value <= consts.kk_K * math.sqrt(config.q)
            rows.append(row)
        roots = [estimate.mean ** (1.0 / config.p) for _, estimate in profile]
        spread = max(roots) / min(roots) - 1.0
        # Only entry laws with a finite fourth moment keep the norm bounded in d.
        banded = math.isfinite(ensemble.entry_moment(4.0))
        ok = spread <= consts.opnorm_spread if banded else True
        passed &= ok
        rows.append({"ensemble": name, "d": None, "p": config.p, "spread": spread,
                     "band": [0.0, consts.opnorm_spread] if banded else None, "pass": ok})
    return {"rows": rows, "passed": passed}


def _series_mc(config: RunConfig, path: Optional[str]) -> Dict[str, Any]:
    rows, passed = [], True
    for d in config.d:
        family = spectral.make_family(config.family, d)
        spec = series.RandomSeriesSpec.from_level_norms(
            family, series.default_level_norms(family, config.N), randmat.HaarOrthogonal()
        )
        table = series.universality_ratio(
            spec, config.p, series.ensembles_from_names(config.ensemble), config.samples,
            derive_seed(config.seed, f"{config.family}-{d}"), config.threads,
        )
        rows.extend(row.model_dump(by_alias=True) for row in table.rows)
        rows.append({"experiment": "spread", "family": config.family, "d": d, "ratio": table.spread,
                     "band": [1.0, get_constants().series.universality_max_ratio], "pass": table.passed})
        passed &= table.passed
    return {"rows": rows, "passed": passed}


def _plp_sweep(config: RunConfig, path: Optional[str]) -> Dict[str, Any]:
    rows = []
    for d in config.d:
        family = spectral.make_family(config.family, d)
        seed = derive_seed(config.seed, f"sweep-{d}") if config.seed is not None else 0
        rows.extend(plp.embedding_sweep(family, config.p, config.n_max, seed=seed))
    if path and config.format == "csv":
        plp.write_sweep_csv(rows, path)
    return {"rows": [row.model_dump(by_alias=True) for row in rows], "passed": all(row.passed for row in rows)}


def _verify(config: RunConfig, path: Optional[str]) -> Dict[str, Any]:
    from .suites import VerificationSuite

    report = VerificationSuite(config.seed, config.threads, config.scale).run(config.suite)
    flags = [f"{check.name}: {flag}" for check in report.checks for flag in check.flags]
    return {
        "rows": [check.model_dump() for check in report.checks],
        "passed": report.passed,
        "flags": flags,
        "coverage": report.coverage,
        "uncovered": report.uncovered,
    }


EXPERIMENTS = {
    "spectral-table": _spectral_table,
    "randmat-moments": _randmat_moments,
    "series-mc": _series_mc,
    "plp-sweep": _plp_sweep,
    "verify": _verify,
}


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def _jsonable(value: Any) -> Any:
    """Non-finite floats become the strings 'inf', '-inf' and 'nan'."""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "item") and callable(value.item):
        return _jsonable(value.item())
    return value


def write_report(report: Dict[str, Any], path: str):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    text = json.dumps(_jsonable(report), indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text + "\n")


def _output_path(config: RunConfig) -> str:
    if config.out:
        return config.out
    if config.subcommand == "verify":
        label = config.suite if config.scale == "desk" else f"{config.suite}-{config.scale}"
    else:
        label = config.family or "-".join(config.ensemble) or "table"
    if config.seed is not None:
        label = f"{label}-seed{config.seed}"
    extension = config.format if config.subcommand in ("spectral-table", "plp-sweep") else "json"
    return os.path.join(os.getenv("EIGENRAND_OUTPUT_DIR", "output"), create_filename(config.subcommand, label, extension))


def run(argv: Optional[List[str]] = None, tracker: Optional[PerformanceTracker] = None) -> int:
    """Parse `argv`, run one experiment and write its report; returns the exit code."""
    parser = build_parser()
    try:
        namespace = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        config = RunConfig(**{k: v for k, v in vars(namespace).items() if v is not None})
    except ValidationError as exc:
        parser.print_usage(sys.stderr)
        for error in exc.errors():
            print(f"eigenrand: error: {error['msg']}", file=sys.stderr)
        return 2

    path = _output_path(config)
    if tracker:
        tracker.start_step(config.subcommand, f"seed={config.seed}")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            with experiment_span(f"experiment.{config.subcommand}", seed=config.seed or 0):
                result = EXPERIMENTS[config.subcommand](config, path)
        except EigenrandError as exc:
            logger.error(f"❌ {config.subcommand} failed: {type(exc).__name__}: {exc}")
            result = {"rows": [], "passed": False, "flags": [f"{type(exc).__name__}: {exc}"]}

    flags = sorted(set(result.get("flags", [])) | set(warning_flags(caught)))
    passed = bool(result["passed"])
    report = {
        "schema_version": SCHEMA_VERSION,
        "experiment": config.subcommand,
        "config": config.report_config(),
        "rows": result["rows"],
        "flags": flags,
        "passed": passed,
    }
    if "coverage" in result:
        report["coverage"] = result["coverage"]
        report["uncovered"] = result["uncovered"]
    if config.format == "json" or config.subcommand not in ("spectral-table", "plp-sweep"):
        write_report(report, path)
    logger.info(f"📁 Report written to {path}")
    if tracker:
        tracker.end_step(config.subcommand, len(report["rows"]), passed and not flags)
    if flags:
        logger.warning(f"⚠️  {len(flags)} numerical flag(s) raised")
    return 0 if passed and not flags else 1


def main(argv: Optional[List[str]] = None) -> int:
    setup_detailed_logging()
    tracker = PerformanceTracker()
    phoenix_enabled = setup_phoenix_observability()
    try:
        code = run(argv if argv is not None else sys.argv[1:], tracker)
        tracker.save_metrics("eigenrand_run_metrics.json")
        return code
    finally:
        if phoenix_enabled:
            cleanup_phoenix()


if __name__ == "__main__":
    sys.exit(main())
