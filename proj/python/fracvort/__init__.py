"""Fractional-noise vorticity toolkit: fBm generation, the spectral solver,
Young-integral checks and the quadratic-variation Hurst estimator."""

from ._core import (
    CapacityError,
    ConfigError,
    DomainError,
    FormatError,
    fbm_covariance,
    generate_path,
    heat_semigroup,
    hurst_estimate,
    manifest,
    prop15_monte_carlo,
    quadratic_variation,
    run_experiment,
    simulate,
    sobolev_norm,
)

__all__ = [
    "CapacityError",
    "ConfigError",
    "DomainError",
    "FormatError",
    "fbm_covariance",
    "generate_path",
    "heat_semigroup",
    "hurst_estimate",
    "manifest",
    "prop15_monte_carlo",
    "quadratic_variation",
    "run_experiment",
    "simulate",
    "sobolev_norm",
]
