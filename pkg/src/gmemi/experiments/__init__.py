"""Experiment harness: signals, model roster, sweeps and penalty curves."""

from .config import (
    CONFIG_KEYS,
    SCENARIOS,
    ConfigError,
    TrialConfig,
    default_params,
    load_config,
    parse_config_text,
    scenario_defaults,
)
from .curves import CURVE_FIELDS, penalty_curve, write_curve_csv
from .models import MODELS, ModelInfo, build_problem, model_info, parse_constraint
from .signals import empirical_snr_db, gen_block_sparse, gen_measurements, gen_piecewise_linear, nmse
from .sweep import (
    AGGREGATE_FIELDS,
    DETAIL_FIELDS,
    TrialRecord,
    aggregate,
    cell_summary,
    make_trial_data,
    run_sweep,
    run_trial,
    tune_cell,
    write_aggregate_csv,
    write_detail_csv,
)

__all__ = [
    "CONFIG_KEYS", "SCENARIOS", "ConfigError", "TrialConfig", "default_params", "load_config",
    "parse_config_text", "scenario_defaults", "CURVE_FIELDS", "penalty_curve", "write_curve_csv", "MODELS",
    "ModelInfo", "build_problem", "model_info", "parse_constraint", "empirical_snr_db",
    "gen_block_sparse", "gen_measurements", "gen_piecewise_linear", "nmse", "AGGREGATE_FIELDS",
    "DETAIL_FIELDS", "TrialRecord", "aggregate", "cell_summary", "make_trial_data", "run_sweep",
    "run_trial", "tune_cell", "write_aggregate_csv", "write_detail_csv",
]
