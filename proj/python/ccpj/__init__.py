"""Tripod crawler simulator: stroke model, leg mechanics, gait simulation,
calibration and gait search. SI units throughout (m, s, rad, kg, A)."""

from ._ccpj import (
    Config,
    ConfigError,
    DataError,
    Error,
    InfeasibleConfinement,
    ValidationError,
    bend_curve,
    calibrate,
    cantilever_deployment,
    compaction_ratio,
    cycle_speed,
    invert_beta,
    max_feasible_current,
    optimize_period,
    run_cli,
    simulate,
    sit_advance,
    stand_advance,
    static_load_check,
    stiffness_at,
    sweep_period,
    weight_bearing_ratio,
)

__all__ = [
    "Config",
    "ConfigError",
    "DataError",
    "Error",
    "InfeasibleConfinement",
    "ValidationError",
    "bend_curve",
    "calibrate",
    "cantilever_deployment",
    "compaction_ratio",
    "cycle_speed",
    "invert_beta",
    "max_feasible_current",
    "optimize_period",
    "run_cli",
    "simulate",
    "sit_advance",
    "stand_advance",
    "static_load_check",
    "stiffness_at",
    "sweep_period",
    "weight_bearing_ratio",
]
