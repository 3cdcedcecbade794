"""Python bindings for the hapc gait-assistance simulator."""

from ._hapc import (
    ConfigError,
    DivergenceError,
    IdentificationError,
    compare,
    dead_band,
    default_config,
    excitation,
    identify,
    nearest_reference,
    run,
    simulate_session,
    table1_row,
)

__all__ = [
    "ConfigError",
    "DivergenceError",
    "IdentificationError",
    "compare",
    "dead_band",
    "default_config",
    "excitation",
    "identify",
    "nearest_reference",
    "run",
    "simulate_session",
    "table1_row",
]
