# Shared module for leakbench services

from .errors import (
    ConfigError,
    EmptyInput,
    LeakbenchError,
    NonStochasticMatrix,
    SampleParseError,
    UnsupportedMitigation,
)
from .logger import log

__all__ = [
    "log",
    "LeakbenchError",
    "ConfigError",
    "UnsupportedMitigation",
    "EmptyInput",
    "NonStochasticMatrix",
    "SampleParseError",
]
