"""Dominated splittings along orbits of torus endomorphisms."""

from ._core import (
    MAX_DIM,
    ConfigError,
    Error,
    __version__,
    angle_between,
    check_config,
    conorm_restricted,
    grassmann_distance,
    kernel,
    minimal_mixing_length,
    norm_restricted,
    run,
    run_text,
    singular_values,
    svd,
)

__all__ = [
    "MAX_DIM",
    "ConfigError",
    "Error",
    "__version__",
    "angle_between",
    "check_config",
    "conorm_restricted",
    "grassmann_distance",
    "kernel",
    "minimal_mixing_length",
    "norm_restricted",
    "run",
    "run_text",
    "singular_values",
    "svd",
]
