"""Structurally damped wave equations: exact multipliers, linear and
pseudospectral solvers, decay analysis and inequality checks."""

from .symbols import (
    BandCutoffs,
    CharRoots,
    DampingParams,
    ProfileSymbols,
    PropagatorValue,
    band_weights,
    characteristic_roots,
    profile_symbol,
    propagator,
)

__version__ = "0.1.0"

__all__ = [
    "BandCutoffs",
    "CharRoots",
    "DampingParams",
    "ProfileSymbols",
    "PropagatorValue",
    "band_weights",
    "characteristic_roots",
    "profile_symbol",
    "propagator",
]
