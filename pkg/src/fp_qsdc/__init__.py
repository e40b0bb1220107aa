"""Secrecy-rate toolkit for passively sourced quantum secure direct communication."""

from .backend import BACKEND
from .params import (ChannelSpec, Config, ConfigError, SourceParams, SweepSpec,
                     SystemParams, attenuation_to_km, derive_channel,
                     km_to_attenuation, load_config)
from .security import QUAD_DEFAULT, QUAD_FAST, SecrecyReport, evaluate_point

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ChannelSpec",
    "Config",
    "ConfigError",
    "QUAD_DEFAULT",
    "QUAD_FAST",
    "SecrecyReport",
    "SourceParams",
    "SweepSpec",
    "SystemParams",
    "attenuation_to_km",
    "derive_channel",
    "evaluate_point",
    "km_to_attenuation",
    "load_config",
    "__version__",
]
