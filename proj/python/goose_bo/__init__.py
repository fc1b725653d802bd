"""Safe contextual Bayesian optimization of motion controller gains."""

from ._goose import (
    GP,
    ConfigError,
    ContractViolation,
    constraint,
    cost,
    load_artifact,
    recovery_iterations,
    report,
    run,
    simulate,
    validate_config,
)

__all__ = [
    "GP",
    "ConfigError",
    "ContractViolation",
    "constraint",
    "cost",
    "load_artifact",
    "recovery_iterations",
    "report",
    "run",
    "simulate",
    "validate_config",
]
