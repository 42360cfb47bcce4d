"""Physical constants and conversion to the dimensionless (A = hbar = 1) variables."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

HBAR_EV_S = 6.582119569e-16
MU_B_EV_PER_T = 5.788e-5
A_EV = 1e-10
N_BATH = 10**6


@dataclass(frozen=True)
class PhysicalConfig:
    """Experimental knobs and constants.

    Defaults are the GaAs values used throughout: a bath of 10^6 nuclear
    spins and hyperfine constant 1e-10 eV. The electron g-factor is taken
    as 2 (H0 = 2 mu_B B0).
    """

    B0_mT: float = 1.0
    N: int = N_BATH
    A_eV: float = A_EV
    mu_B_eV_per_T: float = MU_B_EV_PER_T
    hbar_eV_s: float = HBAR_EV_S

    def __post_init__(self):
        if self.N < 1 or int(self.N) != self.N:
            raise DomainError(f"bath size N must be a positive integer, got {self.N}")
        if not self.A_eV > 0:
            raise DomainError(f"hyperfine constant must be positive, got {self.A_eV}")
        if not self.B0_mT >= 0:
            raise DomainError(f"field must be non-negative, got {self.B0_mT} mT")
        if not (self.mu_B_eV_per_T > 0 and self.hbar_eV_s > 0):
            raise DomainError("physical constants must be positive")

    @property
    def lam(self) -> float:
        return lambda_from_field(self)

    @property
    def ns_per_unit(self) -> float:
        """Nanoseconds per unit of dimensionless time (hbar / A)."""
        return self.hbar_eV_s / self.A_eV * 1e9


def lambda_from_field(cfg: PhysicalConfig) -> float:
    """Dimensionless field lambda = 2 mu_B B0 / A."""
    return 2.0 * cfg.mu_B_eV_per_T * (cfg.B0_mT * 1e-3) / cfg.A_eV


def time_convert(value, direction: str, cfg: PhysicalConfig | None = None):
    """Convert a duration between dimensionless units and nanoseconds.

    ``direction`` is ``"to_ns"`` or ``"to_dimensionless"``. Works on scalars
    and numpy arrays.
    """
    cfg = cfg or PhysicalConfig()
    if np.any(np.asarray(value) < 0):
        raise DomainError("durations must be non-negative")
    if direction == "to_ns":
        return value * cfg.ns_per_unit
    if direction == "to_dimensionless":
        return value / cfg.ns_per_unit
    raise DomainError(f"unknown direction {direction!r}")


def to_ns(t, cfg: PhysicalConfig | None = None):
    return time_convert(t, "to_ns", cfg)


def from_ns(t_ns, cfg: PhysicalConfig | None = None):
    return time_convert(t_ns, "to_dimensionless", cfg)
