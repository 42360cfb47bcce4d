"""Hyperfine-bath decoherence of a deterministic electron-spin teleportation protocol.

Builds the single-qubit channels induced by a nuclear spin bath, runs the
three-qubit teleportation pipeline, and optimizes pulse durations for the
Bloch-averaged gate and teleportation fidelities.
"""

from .errors import ConsistencyError, DomainError
from .units import PhysicalConfig, lambda_from_field, time_convert

__version__ = "0.1.0"

__all__ = [
    "ConsistencyError",
    "DomainError",
    "PhysicalConfig",
    "lambda_from_field",
    "time_convert",
]
