"""Stationary currents through a tight-binding chain between two damped ring contacts."""

from ._core import (
    ConfigError,
    NumericalError,
    __version__,
    chain_levels,
    find_peaks,
    parse_grid,
    stationary,
    sweep_csv,
    transporting_purity,
)

__all__ = [
    "ConfigError",
    "NumericalError",
    "__version__",
    "chain_levels",
    "find_peaks",
    "parse_grid",
    "stationary",
    "sweep_csv",
    "transporting_purity",
]
