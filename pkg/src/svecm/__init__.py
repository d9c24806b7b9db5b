"""Structural vector error correction toolkit.

Library layout mirrors the empirical chain: ``dataset`` ingests and builds
the five-variable system, ``unitroot`` and ``cointegration`` establish
integration and rank, ``vecm`` estimates the reduced form, ``svec``
identifies structural shocks under short- and long-run zero restrictions,
``dynamics`` derives impulse responses and variance decompositions, and
``wsps`` simulates a wage-setting/price-setting economy whose known
structure serves as the validation oracle.  ``cli`` drives the whole
pipeline from a config file.
"""

__version__ = "0.1.0"

from .cointegration import (
    BetaRestriction,
    RankTestResult,
    SlTestResult,
    decide_rank,
    johansen,
    rank_tests,
    select_lag,
    sl_critical_values,
    sl_test,
    test_beta_restriction,
    trace_critical_values,
)
from .dataset import SYSTEM_COLUMNS, TimePanel, build_system, load_csv, save_csv
from .dynamics import FevdResult, IrfResult, fevd, irf, ma_coefficients
from .svec import (
    BootstrapTvalues,
    IdentificationReport,
    RestrictionPattern,
    SvecModel,
    bootstrap_tvalues,
    check_identification,
    count_restrictions,
    default_pattern,
    identify,
    long_run_multiplier,
    with_tvalues,
)
from .unitroot import AdfResult, adf_critical_values, adf_test, integration_order
from .vecm import VecmModel, fit_vecm, level_var_path, to_level_var, vecm_path
from .wsps import (
    DEFAULT_SIGMAS,
    SHOCK_NAMES,
    ShockSequence,
    WsPsParams,
    analytic_fevd_u,
    raw_series,
    reconstruct_output_wage,
    simulate,
    standard_normals,
    true_impact_matrices,
)

__all__ = [
    "AdfResult",
    "BetaRestriction",
    "BootstrapTvalues",
    "DEFAULT_SIGMAS",
    "FevdResult",
    "IdentificationReport",
    "IrfResult",
    "RankTestResult",
    "RestrictionPattern",
    "SHOCK_NAMES",
    "SYSTEM_COLUMNS",
    "ShockSequence",
    "SlTestResult",
    "SvecModel",
    "TimePanel",
    "VecmModel",
    "WsPsParams",
    "adf_critical_values",
    "adf_test",
    "analytic_fevd_u",
    "bootstrap_tvalues",
    "build_system",
    "check_identification",
    "count_restrictions",
    "decide_rank",
    "default_pattern",
    "fevd",
    "fit_vecm",
    "identify",
    "integration_order",
    "irf",
    "johansen",
    "level_var_path",
    "load_csv",
    "long_run_multiplier",
    "ma_coefficients",
    "rank_tests",
    "raw_series",
    "reconstruct_output_wage",
    "save_csv",
    "select_lag",
    "simulate",
    "sl_critical_values",
    "sl_test",
    "standard_normals",
    "test_beta_restriction",
    "to_level_var",
    "trace_critical_values",
    "true_impact_matrices",
    "vecm_path",
    "with_tvalues",
]
