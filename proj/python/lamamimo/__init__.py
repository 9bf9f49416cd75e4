"""LAMA large-MIMO data detection.

AMP-based detector for finite constellations, its complex state-evolution
analysis, exact-recovery / optimality thresholds, and a seeded Monte-Carlo
simulation harness.  The heavy lifting lives in the compiled `_core` module.
"""

from ._core import (  # noqa: F401
    Constellation,
    Field,
    FixedPointReport,
    LamaConfig,
    LamaResult,
    LamaState,
    PsiRoute,
    QuadratureSpec,
    Regime,
    RegimeReport,
    SEParams,
    SEState,
    SETrace,
    SerMethod,
    StopRule,
    ThresholdReport,
    ThresholdValue,
    VarianceMode,
    achievable_rate,
    awgn_ser,
    awgn_snr_db_for_ser,
    classify_regime,
    ert,
    fixed_points,
    g_function,
    hard_decision,
    lama_init,
    lama_run,
    lama_step,
    matched_filter,
    mmse_detect,
    mrt,
    n0_from_snr_db,
    n0_max,
    n0_min,
    posterior_mean,
    posterior_variance,
    psi,
    phi,
    se_initial_state,
    se_run,
    se_step,
    snr_db_from_n0,
    standard_constellation_names,
    threshold_report,
    variance_identity_check,
    weights,
    __version__,
)

__all__ = [n for n in dir() if not n.startswith("_")] + ["__version__"]
