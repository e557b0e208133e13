"""Relaxation-crossing engine for open fermionic systems.

The compiled core lives in ``qmpemba._core``; this package re-exports its
submodules and the error hierarchy so that ``import qmpemba`` is enough
for everyday use.
"""

from ._core import (
    ConfigFileError,
    DegenerateDifferenceError,
    DivisionBlockedError,
    EngineError,
    GridMismatchError,
    InvalidStepError,
    NonPositiveTemperatureError,
    NotADensityMatrixError,
    NotFoundError,
    OutOfDomainError,
    __version__,
    dot,
    obs,
    scan,
    twosite,
)

__all__ = [
    "ConfigFileError",
    "DegenerateDifferenceError",
    "DivisionBlockedError",
    "EngineError",
    "GridMismatchError",
    "InvalidStepError",
    "NonPositiveTemperatureError",
    "NotADensityMatrixError",
    "NotFoundError",
    "OutOfDomainError",
    "__version__",
    "dot",
    "obs",
    "scan",
    "twosite",
]
