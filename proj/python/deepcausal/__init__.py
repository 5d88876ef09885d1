"""Matching-based treatment effect estimation on learned embeddings."""

from ._core import (
    CONFIG_VERSION,
    Embedder,
    NumericalError,
    PropensityModel,
    ValidationError,
    default_config,
    estimate_effects,
    fit_autoencoder,
    fit_identity,
    fit_lle,
    fit_pca,
    fit_propensity,
    gen_propensity_pairs,
    gen_swiss_roll,
    gradient_check,
    holdout_accuracy,
    kmeans,
    nearest_opposite,
    propensity_match,
    propensity_net_param_count,
    run_experiment,
    silhouette,
)

__all__ = [
    "CONFIG_VERSION",
    "Embedder",
    "NumericalError",
    "PropensityModel",
    "ValidationError",
    "default_config",
    "estimate_effects",
    "fit_autoencoder",
    "fit_identity",
    "fit_lle",
    "fit_pca",
    "fit_propensity",
    "gen_propensity_pairs",
    "gen_swiss_roll",
    "gradient_check",
    "holdout_accuracy",
    "kmeans",
    "nearest_opposite",
    "propensity_match",
    "propensity_net_param_count",
    "run_experiment",
    "silhouette",
]
