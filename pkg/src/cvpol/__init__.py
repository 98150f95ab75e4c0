"""Continuous-variable polarization states: Stokes statistics, squeezed sources and channel capacity."""

from cvpol._backend import BACKEND
from cvpol.polstate import NoiseCovariance, PolarizationState, StateError, coherent_state
from cvpol.stokes import (
    NoiseEllipsoid,
    StokesStatistics,
    poincare_ellipsoid,
    stokes_means,
    stokes_statistics,
    stokes_variances_general,
    stokes_variances_uncorrelated,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "NoiseCovariance",
    "NoiseEllipsoid",
    "PolarizationState",
    "StateError",
    "StokesStatistics",
    "coherent_state",
    "poincare_ellipsoid",
    "stokes_means",
    "stokes_statistics",
    "stokes_variances_general",
    "stokes_variances_uncorrelated",
]
