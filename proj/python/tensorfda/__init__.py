"""Functional classification with data-driven knots and topology transforms."""

from ._core import (
    Boundary,
    ConfigError,
    Error,
    FormatError,
    HilbertMap,
    OrthonormalBasis,
    VersionError,
    classify,
    default_config,
    gradient_image,
    hilbert_sequence,
    read_csv_curves,
    run_pipeline,
)

__all__ = [
    "Boundary",
    "ConfigError",
    "Error",
    "FormatError",
    "HilbertMap",
    "OrthonormalBasis",
    "VersionError",
    "classify",
    "default_config",
    "gradient_image",
    "hilbert_sequence",
    "read_csv_curves",
    "run_pipeline",
]
