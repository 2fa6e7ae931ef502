"""
Frozen constants loader.

The constants file holds every regression constant and acceptance band used
by the library and the verification suite. It is parsed once into pydantic
models so a typo in the YAML fails loudly at load time.
"""
import os
from functools import lru_cache
from pathlib import Path
from typing import Optional, Tuple

import yaml
from pydantic import BaseModel, Field

DEFAULT_CONSTANTS_PATH = Path(__file__).parent / "config" / "constants.yaml"

Band = Tuple[float, float]


class SpecfunConstants(BaseModel):
    envelope_C: float = Field(description="Hermite envelope constant beyond the turning point")
    envelope_gamma: float = Field(description="Gaussian rate of the Hermite envelope")
    muckenhoupt_C: float
    squared_law_beta: float
    squared_law_C: float
    origin_band: Band
    y_const_band: Band
    zonal_norm_band: Band
    zonal_cap_C: float
    jacobi_envelope_C: float
    band_constant_min: float
    band_constant_grid: int


class MeasureConstants(BaseModel):
    rel_tol: float
    max_nodes: int
    cap_shell_band: Band
    radial_margin: float


class SpectralConstants(BaseModel):
    concentration_alpha: float
    concentration_C0: float
    concentration_n0: int
    concentration_band: Band
    tail_gamma: float
    tail_bound: float
    origin_band: Band
    slope_tol: float
    tilde_ratio_band: Band
    multilinear_band: Band
    y_envelope_C: float = Field(description="Gaussian envelope constant of the highest-weight harmonics")
    critical_log_band: Band


class RandmatConstants(BaseModel):
    opnorm_spread: float
    kk_K: float
    moment8_C: float
    sigma_C: float
    latala_C: float
    ks_alpha: float
    heavytail_growth_min: float
    zscore: float


class SeriesConstants(BaseModel):
    universality_max_ratio: float
    universality_band: Band
    n_stability: float
    kkmp_K: float
    salem_zygmund_band: Band
    zscore: float


class PLpConstants(BaseModel):
    y_band: Band
    z_band: Band
    hermite_band: Band
    inclusion_C: float
    critical_tol: float
    critical_p_max: float
    defect_grid: int
    embedding_ratio_max: float
    embedding_eta: float
    hypothesis_stability: float
    hypothesis_envelope_C: float
    product_growth_min: float


class FrozenConstants(BaseModel):
    specfun: SpecfunConstants
    measure: MeasureConstants
    spectral: SpectralConstants
    randmat: RandmatConstants
    series: SeriesConstants
    plp: PLpConstants


def load_constants(path: Optional[Path] = None) -> FrozenConstants:
    """Parse a constants YAML file into a validated model."""
    path = Path(path) if path is not None else DEFAULT_CONSTANTS_PATH
    with open(path, "r", encoding="utf-8") as f:
        raw = yaml.safe_load(f)
    return FrozenConstants(**raw)


@lru_cache(maxsize=1)
def get_constants() -> FrozenConstants:
    """
    Return the process-wide frozen constants.

    EIGENRAND_CONSTANTS, when set, points at an alternative YAML file.
    """
    override = os.getenv("EIGENRAND_CONSTANTS")
    return load_constants(Path(override) if override else None)
