#!/usr/bin/env python
"""
Re-measure the frozen regression constants.

Runs the deterministic sweeps behind each fitted constant, applies a safety
margin, and writes a candidate YAML next to the other outputs. The frozen file
in src/eigenrand/config/constants.yaml is never touched; copy values over by
hand after review, or point EIGENRAND_CONSTANTS at the candidate.
"""
import argparse
import json
import math
import os
import sys
from datetime import datetime
from pathlib import Path

import numpy as np
import yaml

sys.path.insert(0, str(Path(__file__).parent / "src"))

from eigenrand import specfun, spectral  # noqa: E402
from eigenrand.constants import get_constants  # noqa: E402
from eigenrand.plp import closed_form_ratio  # noqa: E402
from eigenrand.tools.tracking_tools import PerformanceTracker, setup_detailed_logging  # noqa: E402

MARGIN = 1.5


def fit_envelope_C(gamma: float, levels=range(0, 501, 10)) -> float:
    worst = 0.0
    for n in levels:
        turning = math.sqrt(2 * n + 1)
        x = np.linspace(turning, 3.0 * turning + 6.0, 400)
        h = np.abs(specfun.hermite_table(n, x)[n])
        worst = max(worst, float((h * np.exp(0.5 * gamma * x * x)).max()))
    return worst


def fit_muckenhoupt_C(levels=(20, 50, 100, 200, 300), grid=400) -> float:
    worst = 0.0
    for n in levels:
        big_n = 2 * n + 1
        x = np.linspace(0.0, math.sqrt(big_n) - big_n ** (-1.0 / 6.0), grid)
        error = np.abs(specfun.hermite_h(n, x) - specfun.muckenhoupt_main(n, x))
        worst = max(worst, float((error / (math.sqrt(big_n) * (big_n - x * x) ** -1.75)).max()))
    return worst


def fit_squared_law_C(beta: float, levels=(20, 50, 100, 200, 300), grid=400) -> float:
    worst = 0.0
    for n in levels:
        big_n = 2 * n + 1
        x = np.linspace(0.0, beta * math.sqrt(big_n), grid)
        error = np.abs(specfun.hermite_h(n, x) ** 2 - specfun.muckenhoupt_main(n, x) ** 2).max()
        worst = max(worst, float(error * big_n ** 1.5))
    return worst


def fit_jacobi_envelope_C(alphas=(0.0, 0.5, 1.0), n_max=60) -> float:
    worst = 0.0
    for alpha in alphas:
        c = specfun.jacobi_band_constant(alpha, n_max)
        for n in range(1, n_max + 1):
            theta = np.linspace(c / n, math.pi - c / n, 200)
            values = np.abs(specfun.jacobi_p(n, alpha, np.cos(theta)))
            worst = max(worst, float((values * math.sqrt(n) * np.sin(theta) ** (alpha + 0.5)).max()))
    return worst


def fit_concentration(dims=(2, 3), levels=(50, 100, 200, 400)):
    lo, hi, tail = math.inf, 0.0, 0.0
    for d in dims:
        for n in levels:
            report = spectral.osc_concentration_report(d, n)
            lo, hi, tail = min(lo, report.min_ratio), max(hi, report.max_ratio), max(tail, report.tail_max)
    return lo, hi, tail


def fit_y_envelope_C(dims=(2, 3), levels=(5, 20, 80, 320)) -> float:
    return max(spectral.y_envelope_ratio(d, n) for d in dims for n in levels)


def fit_closed_form_bands(d=2, p=6.0, instances=20, max_levels=30, seed=0):
    rng = np.random.default_rng(seed)
    ratios = {"highest": [], "zonal": [], "hermite": []}
    for _ in range(instances):
        levels = int(rng.integers(1, max_levels + 1))
        norms = rng.random(levels) * (rng.random(levels) < 0.7)
        norms[int(rng.integers(levels))] = 1.0
        for name in ratios:
            ratios[name].append(closed_form_ratio(spectral.make_family(name, d), norms, p).ratio)
    return {name: (min(values), max(values)) for name, values in ratios.items()}


def main():
    parser = argparse.ArgumentParser(description="Re-measure eigenrand's frozen constants")
    parser.add_argument("--out", default=None, help="candidate YAML path")
    args = parser.parse_args()

    setup_detailed_logging()
    tracker = PerformanceTracker()
    frozen = get_constants()
    candidate = json.loads(frozen.model_dump_json())

    print("🔧 Fitting eigenrand constants")
    print("=" * 60)

    tracker.start_step("specfun", "Hermite and Jacobi envelopes")
    gamma = frozen.specfun.envelope_gamma
    candidate["specfun"]["envelope_C"] = round(MARGIN * fit_envelope_C(gamma), 3)
    candidate["specfun"]["muckenhoupt_C"] = round(MARGIN * fit_muckenhoupt_C(), 3)
    candidate["specfun"]["squared_law_C"] = round(MARGIN * fit_squared_law_C(frozen.specfun.squared_law_beta), 3)
    candidate["specfun"]["jacobi_envelope_C"] = round(MARGIN * fit_jacobi_envelope_C(), 3)
    tracker.end_step("specfun")

    tracker.start_step("spectral", "oscillator concentration and the Y_n envelope")
    lo, hi, tail = fit_concentration()
    candidate["spectral"]["concentration_band"] = [round(lo / MARGIN, 4), round(hi * MARGIN, 4)]
    candidate["spectral"]["tail_bound"] = round(MARGIN * tail, 3)
    candidate["spectral"]["y_envelope_C"] = round(MARGIN * fit_y_envelope_C(), 3)
    tracker.end_step("spectral")

    tracker.start_step("plp", "closed-form equivalence bands")
    keys = {"highest": "y_band", "zonal": "z_band", "hermite": "hermite_band"}
    for name, (low, high) in fit_closed_form_bands().items():
        candidate["plp"][keys[name]] = [round(low / MARGIN, 4), round(high * MARGIN, 4)]
    tracker.end_step("plp")

    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    out = args.out or os.path.join(os.getenv("EIGENRAND_OUTPUT_DIR", "output"), f"constants_candidate_{timestamp}.yaml")
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    with open(out, "w", encoding="utf-8") as handle:
        handle.write("# Candidate constants from fit_constants.py; review before freezing.\n")
        yaml.safe_dump(candidate, handle, sort_keys=False, default_flow_style=None)

    print(f"\n📁 Candidate constants written to: {out}")
    tracker.save_metrics(f"fit_constants_{timestamp}_metrics.json")
    return 0


if __name__ == "__main__":
    sys.exit(main())
