"""Monotone finite-difference schemes for periodic HJB equations."""

import json as _json

from ._hjbcore import (
    ConfigError,
    NumericalError,
    bz_decompose,
    cfl_check,
    fit_order,
    kushner_stencil,
    run_cli,
)
from ._hjbcore import solve as _solve

__all__ = [
    "ConfigError",
    "NumericalError",
    "bz_decompose",
    "cfl_check",
    "fit_order",
    "kushner_stencil",
    "run_cli",
    "solve",
]


def solve(config, nx, time_steps, theta=1.0, stencil="kushner"):
    """Solve a problem given as JSON text or a dict."""
    if not isinstance(config, str):
        config = _json.dumps(config)
    return _solve(config, nx, time_steps, theta, stencil)
