"""bacon_shor_ft."""

from bacon_shor_ft.noise import (
    BaconShorError,
    BiasUndefinedError,
    InvalidConfigError,
    LocationClass,
    NoiseParams,
    RateKind,
    rate_of,
)

__all__ = (
    "__version__",
    "BaconShorError",
    "BiasUndefinedError",
    "InvalidConfigError",
    "LocationClass",
    "NoiseParams",
    "RateKind",
    "rate_of",
)

__version__ = "0.2.0"
