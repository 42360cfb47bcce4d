"""The teleportation sequence: prepare, sqrt(SWAP), decohered rotation,
sqrt(SWAP), measure A1A2, decohered recovery on B.

Qubit order is A1, A2, B. Both sqrt(SWAP) steps and the measurement are
ideal and instantaneous; only the ESR rotations see the nuclear bath.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qcore
from .decoherence import channel_params, make_channel, zero_field_params
from .errors import ConsistencyError

OUTCOMES = ((0, 0), (0, 1), (1, 0), (1, 1))
DEGENERATE_P = 1e-14


@dataclass(frozen=True)
class RecoveryPlan:
    """Bob's correction for outcome ``jk``.

    ``pulses`` lists (axis, sign) in the order they are applied, i.e. the
    operator product read right to left. ``phase`` is the global phase that
    makes ``unitary()`` equal the tabulated U_jk.
    """

    jk: tuple
    pulses: tuple
    phase: complex

    def unitary(self):
        U = np.eye(2, dtype=complex)
        for axis, sign in self.pulses:
            phi_axis = 0.0 if axis == "x" else np.pi / 2
            U = qcore.rotation(sign * np.pi / 2, phi_axis) @ U
        return self.phase * U


RECOVERY_PLANS = {
    (0, 0): RecoveryPlan((0, 0), (("x", -1), ("y", 1), ("x", 1)), np.exp(-1j * np.pi / 4)),
    (0, 1): RecoveryPlan((0, 1), (("x", 1), ("y", 1), ("x", 1)), -np.exp(1j * np.pi / 4)),
    (1, 0): RecoveryPlan((1, 0), (("x", 1), ("y", -1), ("x", 1)), np.exp(1j * np.pi / 4)),
    (1, 1): RecoveryPlan((1, 1), (("x", 1), ("y", 1), ("x", -1)), -np.exp(-1j * np.pi / 4)),
}


def recovery_unitary(jk):
    return RECOVERY_PLANS[tuple(jk)].unitary()


@dataclass(frozen=True)
class Outcome:
    jk: tuple
    p: float
    sigma: np.ndarray
    degenerate: bool = False

    @property
    def branch(self):
        """Unnormalized conditional state p * sigma."""
        return self.p * self.sigma


@dataclass(frozen=True)
class MeasurementRecord:
    outcomes: tuple

    def __getitem__(self, jk):
        for o in self.outcomes:
            if o.jk == tuple(jk):
                return o
        raise KeyError(jk)

    def __iter__(self):
        return iter(self.outcomes)

    @property
    def total_probability(self):
        return sum(o.p for o in self.outcomes)


def measure(gamma3) -> MeasurementRecord:
    """Project A1A2 onto |jk> and return Bob's conditional states."""
    gamma3 = np.asarray(gamma3, dtype=complex)
    outcomes = []
    for jk, M in qcore.measurement_projectors().items():
        reduced = qcore.partial_trace(M @ gamma3 @ M, keep=[2])
        p = float(np.trace(reduced).real)
        if p < DEGENERATE_P:
            outcomes.append(Outcome(jk, p, np.eye(2, dtype=complex) / 2, degenerate=True))
        else:
            outcomes.append(Outcome(jk, p, reduced / p))
    record = MeasurementRecord(tuple(outcomes))
    if abs(record.total_probability - 1) > 1e-9:
        raise ConsistencyError(f"outcome probabilities sum to {record.total_probability}")
    return record


def _initial_density(rho_a1):
    return np.kron(rho_a1, qcore.density(qcore.bell_singlet()))


def _swap_step(rho):
    return qcore.apply_unitary(rho, qcore.sqrt_swap(), [0, 1])


def step2_channels(t1, lam, N):
    """The x-field map on A1 and the zero-field map on A2 and B, all for duration t1."""
    ch_x = make_channel("x", channel_params(t1, lam, N))
    ch_z = make_channel("z", zero_field_params(t1, N))
    return ch_x, ch_z


def noisy_step2(rho, t1, lam, N):
    ch_x, ch_z = step2_channels(t1, lam, N)
    rho = qcore.apply_channel(rho, ch_x, 0)
    rho = qcore.apply_channel(rho, ch_z, 1)
    return qcore.apply_channel(rho, ch_z, 2)


def ideal_step2(rho):
    return qcore.apply_unitary(rho, qcore.rotation(-np.pi, 0.0), [0])


@dataclass(frozen=True)
class IdealRun:
    gamma0: np.ndarray
    gamma1: np.ndarray
    gamma2: np.ndarray
    gamma3: np.ndarray
    record: MeasurementRecord


@dataclass(frozen=True)
class NoisyRun:
    gamma1: np.ndarray
    gamma2: np.ndarray
    gamma3: np.ndarray
    record: MeasurementRecord


def run_ideal(theta, phi) -> IdealRun:
    """Pure-state pipeline with the ideal rotation R(-pi) in step 2."""
    psi = qcore.bloch_state(theta, phi)
    g0 = np.kron(psi, qcore.bell_singlet())
    g1 = np.kron(qcore.sqrt_swap(), qcore.I2) @ g0
    g2 = np.kron(qcore.rotation(-np.pi, 0.0), np.eye(4)) @ g1
    g3 = np.kron(qcore.sqrt_swap(), qcore.I2) @ g2
    return IdealRun(g0, g1, g2, g3, measure(qcore.density(g3)))


def run_density(rho_a1, t1, lam, N=10**6, ideal=False) -> NoisyRun:
    """Pipeline for an arbitrary (possibly mixed) input state of A1."""
    g1 = _swap_step(_initial_density(np.asarray(rho_a1, dtype=complex)))
    g2 = ideal_step2(g1) if ideal else noisy_step2(g1, t1, lam, N)
    g3 = _swap_step(g2)
    return NoisyRun(g1, g2, g3, measure(g3))


def run_noisy(theta, phi, t1, lam, N=10**6, ideal=False) -> NoisyRun:
    """Pipeline with the decohered rotation of duration ``t1`` in step 2.

    The x-field map itself performs the rotation; no separate rotation
    unitary is applied. ``ideal=True`` swaps in R(-pi) on A1 instead.
    """
    return run_density(qcore.density(qcore.bloch_state(theta, phi)), t1, lam, N, ideal)


def recovery_channels(jk, t2, lam, N=10**6, strict_paper_ey=False):
    """The three decohered pulses for outcome ``jk``, in application order."""
    params = channel_params(t2, lam, N)
    return [
        make_channel(axis, params, sign, strict_paper=strict_paper_ey)
        for axis, sign in RECOVERY_PLANS[tuple(jk)].pulses
    ]


def recover(sigma, jk, t2, lam, N=10**6, ideal=False, strict_paper_ey=False):
    """Apply Bob's correction for outcome ``jk``; each pulse lasts ``t2``."""
    sigma = np.asarray(sigma, dtype=complex)
    if ideal:
        U = recovery_unitary(jk)
        return U @ sigma @ U.conj().T
    if t2 == 0:
        return sigma.copy()
    for ch in recovery_channels(jk, t2, lam, N, strict_paper_ey):
        sigma = ch(sigma)
    return sigma
