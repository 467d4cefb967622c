"""Kriging-enriched regression tree ensembles (treeging) and baselines."""

from ._treeging import (
    Dataset,
    FittedModel,
    SphericalParams,
    TreegingError,
    cross_validate,
    fit,
    load_csv,
    r_squared,
    simulate_spacetime,
    simulate_spatial,
    spherical_covariance,
    spherical_variogram,
)

MODELS = ("treeging", "rf", "kriging", "kriging-ensemble")

__all__ = [
    "MODELS",
    "Dataset",
    "FittedModel",
    "SphericalParams",
    "TreegingError",
    "cross_validate",
    "fit",
    "load_csv",
    "r_squared",
    "simulate_spacetime",
    "simulate_spatial",
    "spherical_covariance",
    "spherical_variogram",
]
