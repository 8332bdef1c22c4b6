"""Wavelet peeling denoising: critical constants, stochastic iteration, benchmarks."""

from .detmap import (
    CriticalSolution,
    ReducedMap,
    Regime,
    SupercriticalStructure,
    classify_regime,
    critical_constant,
    fm_bound,
    g_derivative,
    g_value,
    g_value_scaled,
    iteration_count,
    supercritical_structure,
)
from .ggd import GgdParams, estimate_params, make_params, sample
from .peeling import (
    EnergyDrop,
    ExactFixedPoint,
    FixedIterations,
    PeelingConfig,
    PeelingTrace,
    apply_threshold,
    empirical_g,
    run_peeling,
    threshold_catalog,
)
from .specfun import ln_gamma, reg_lower_inc_gamma
from .wavelet import WaveletCoeffs, dwt, flatten, get_filter, idwt, unflatten

__version__ = "0.1.0"
