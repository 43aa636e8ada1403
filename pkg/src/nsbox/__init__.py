"""Simulation toolkit for non-signaling oracles that reproduce PR-box correlations.

The oracles are small quantum (or stochastic classical) circuits that parties
query with restricted inputs.  The package builds those circuits, measures the
resulting states, checks no-signaling and scores CHSH, and models finite-count
experimental data.
"""

from nsbox.errors import (
    ArgumentError,
    CapacityError,
    InsufficientDataError,
    PreconditionError,
)

__version__ = "0.1.0"

__all__ = [
    "ArgumentError",
    "CapacityError",
    "InsufficientDataError",
    "PreconditionError",
    "__version__",
]
