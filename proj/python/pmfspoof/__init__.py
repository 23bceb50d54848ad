"""PMF-based spoofing countermeasure (C++ core)."""

from ._core import (
    ConfigError,
    DataError,
    DiffusionModel,
    LogisticModel,
    NumericError,
    center_frequencies,
    compute_eer,
    estimate_pmf,
    filter,
    fit_diffusion,
    measures,
    read_wav,
    run_stage,
    select_epsilon,
    similarity,
    synthesize,
    train_logistic,
)

__all__ = [
    "ConfigError",
    "DataError",
    "DiffusionModel",
    "LogisticModel",
    "NumericError",
    "center_frequencies",
    "compute_eer",
    "estimate_pmf",
    "filter",
    "fit_diffusion",
    "measures",
    "read_wav",
    "run_stage",
    "select_epsilon",
    "similarity",
    "synthesize",
    "train_logistic",
]
