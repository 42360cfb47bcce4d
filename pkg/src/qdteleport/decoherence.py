"""Hyperfine-bath channel parameters and the single-qubit maps they define.

With a^2 = N t^2 / 8 and b^2 = 2 lambda^2 / N the parameters depend on
(t, lambda, N) only through (a, b, lambda t = 2ab):

    W  = [1 - e^{-a^2} cos(2ab)] / (2 b^2) - sqrt(pi) / (8 b^3) * bracket(a, b)
    R1 = 2W + 2 e^{-a^2} [cos(2ab) - (a/b) sin(2ab)]
    R2 = 2 e^{-a^2} [(1/(2b^2) - 1) sin(2ab) - (a/b) cos(2ab)]

where ``bracket`` is :func:`qdteleport.cerf.bracket_scaled`. For b below
``SMALL_B`` the two 1/b^2 pieces of W cancel catastrophically, so W is
summed from its Taylor series in b^2 instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import cerf
from .errors import ConsistencyError, DomainError
from .qcore import QubitChannel, rotation_z

SMALL_B = 0.05
_SERIES_TERMS = 30
CP_TOL = 1e-9


@dataclass(frozen=True)
class ChannelParams:
    R1: float
    R2: float
    W: float
    t: float
    lam: float
    N: int


@dataclass(frozen=True)
class ZeroFieldParams:
    gamma: float
    Z: float
    t: float
    N: int


def _scaled_vars(t, lam, N):
    a = np.asarray(t, dtype=float) * math.sqrt(N) / (2.0 * math.sqrt(2.0))
    b = math.sqrt(2.0) * lam / math.sqrt(N)
    return a, b


def _w_series(a, b):
    """W from its power series in b; valid for small b (any a)."""
    # e^{-a^2} underflows long before the Hermite terms could overflow
    a = np.minimum(np.asarray(a, dtype=float), 40.0)
    ea = np.exp(-a * a)
    # Hermite polynomials H_0 .. H_{2K}
    K = _SERIES_TERMS
    H = [np.ones_like(a), 2 * a]
    for k in range(1, 2 * K):
        H.append(2 * a * H[k] - 2 * k * H[k - 1])
    total = np.zeros_like(a)
    b2 = b * b
    power = np.ones_like(a)
    double_fact = 1.0  # (2n+1)!!
    for n in range(1, K + 1):
        double_fact *= 2 * n + 1
        head = -((-1) ** n) * 2.0**n / (2.0 * double_fact)
        c_n = sum(
            H[2 * m] / (math.factorial(2 * m + 1) * math.factorial(n - m)) for m in range(n + 1)
        )
        c_n = (-1) ** n * c_n
        cos_coef = (-1) ** n * (2 * a) ** (2 * n) / math.factorial(2 * n)
        total = total + power * (head - 0.5 * ea * (cos_coef - c_n))
        power = power * b2
    return total


def _sin_minus_xcos(x):
    """sin x - x cos x without cancellation for small x."""
    x = np.asarray(x, dtype=float)
    out = np.sin(x) - x * np.cos(x)
    small = np.abs(x) < 0.3
    if np.any(small):
        xs = x[small] if x.ndim else x
        term = xs**3 / 3.0
        acc = term.copy() if np.ndim(term) else term
        x2 = xs * xs
        for k in range(2, 12):
            # coefficient (-1)^{k+1} 2k / (2k+1)!
            term = -term * x2 * (2 * k) / ((2 * k - 2) * (2 * k) * (2 * k + 1))
            acc = acc + term
        if x.ndim:
            out[small] = acc
        else:
            out = acc
    return out


def param_arrays(t, lam, N):
    """(R1, R2, W) as arrays broadcast over ``t``."""
    if not lam > 0:
        raise DomainError("lambda must be positive; use zero_field_params for B0 = 0")
    if N < 1:
        raise DomainError(f"bath size must be >= 1, got {N}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("time must be non-negative")
    a, b = _scaled_vars(t, lam, N)
    x = lam * t  # = 2ab
    ea = np.exp(-a * a)
    if b < SMALL_B:
        W = _w_series(a, b)
    else:
        W = (1.0 - ea * np.cos(x)) / (2.0 * b * b) - math.sqrt(math.pi) / (
            8.0 * b**3
        ) * cerf.bracket_scaled(a, b)
    a_over_b = N * t / (4.0 * lam)
    R1 = 2.0 * W + 2.0 * ea * (np.cos(x) - a_over_b * np.sin(x))
    # (1/(2b^2)) sin x - (a/b) cos x = (sin x - x cos x) / (2 b^2)
    R2 = 2.0 * ea * (_sin_minus_xcos(x) / (2.0 * b * b) - np.sin(x))
    return R1, R2, W


def channel_params(t, lam, N=10**6) -> ChannelParams:
    """R1, R2, W at dimensionless time ``t`` and field ``lam``."""
    R1, R2, W = param_arrays(t, lam, N)
    vals = [float(v) for v in (R1, R2, W)]
    if not all(np.isfinite(vals)):
        raise ConsistencyError(f"non-finite channel parameters at t={t}, lam={lam}")
    return ChannelParams(*vals, t=float(t), lam=float(lam), N=N)


def zero_field_arrays(t, N):
    """(gamma, Z) at zero field, broadcast over ``t``.

    gamma = 1/3 + (2/3)(1 - 2a^2) e^{-a^2},  Z = (1 - gamma) / 2.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("time must be non-negative")
    if N < 1:
        raise DomainError(f"bath size must be >= 1, got {N}")
    a2 = N * t * t / 8.0
    decay = (1.0 - 2.0 * a2) * np.exp(-a2)
    Z = (1.0 - decay) / 3.0
    gamma = Z + decay
    return gamma, Z


def zero_field_params(t, N=10**6) -> ZeroFieldParams:
    gamma, Z = zero_field_arrays(t, N)
    return ZeroFieldParams(float(gamma), float(Z), t=float(t), N=N)


# --- transfer matrices ------------------------------------------------------


def x_transfer(R1, R2, W):
    """Transfer matrices of the x-field map, shape (..., 4, 4)."""
    R1, R2, W = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (R1, R2, W)))
    T = np.empty(R1.shape + (4, 4), dtype=complex)
    p, m = (2 + R1) / 4, (2 - R1) / 4
    pc, mc = (2 + R1 - 4 * W) / 4, (2 - R1 - 4 * W) / 4
    r = 1j * R2 / 4
    # columns: images of |0><0|, |0><1|, |1><0|, |1><1|
    cols = [
        (p, -r, r, m),
        (-r, pc, mc, r),
        (r, mc, pc, -r),
        (m, r, -r, p),
    ]
    for c, col in enumerate(cols):
        for row, v in enumerate(col):
            T[..., row, c] = v
    return T


def y_transfer(R1, R2, W, strict_paper=False):
    """Transfer matrices of the y-field map.

    This is the x map conjugated by a z rotation through pi/2. With
    ``strict_paper`` the |1><0| -> |1><0| entry uses R2 in place of R1,
    reproducing a misprint in the published map; that variant is neither
    symmetric nor consistent with the exact bath dynamics.
    """
    R1, R2, W = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (R1, R2, W)))
    T = np.empty(R1.shape + (4, 4), dtype=complex)
    p, m = (2 + R1) / 4, (2 - R1) / 4
    pc, mc = (2 + R1 - 4 * W) / 4, (2 - R1 - 4 * W) / 4
    r = R2 / 4
    pc_typo = (2 + (R2 if strict_paper else R1) - 4 * W) / 4
    cols = [
        (p, -r, -r, m),
        (r, pc, -mc, -r),
        (r, -mc, pc_typo, -r),
        (m, r, r, p),
    ]
    for c, col in enumerate(cols):
        for row, v in enumerate(col):
            T[..., row, c] = v
    return T


def z_transfer(gamma, Z):
    gamma, Z = np.broadcast_arrays(np.asarray(gamma, dtype=float), np.asarray(Z, dtype=float))
    T = np.zeros(gamma.shape + (4, 4), dtype=complex)
    T[..., 0, 0] = 1 - Z
    T[..., 3, 0] = Z
    T[..., 1, 1] = gamma
    T[..., 2, 2] = gamma
    T[..., 0, 3] = Z
    T[..., 3, 3] = 1 - Z
    return T


def _sign_value(sign):
    if sign in (1, "+"):
        return 1
    if sign in (-1, "-"):
        return -1
    raise DomainError(f"sign must be '+' or '-', got {sign!r}")


def make_channel(axis, params, sign="+", strict_paper=False) -> QubitChannel:
    """Build the map for field direction ``axis`` from its parameters.

    ``sign='-'`` is the reversed-field variant: R2 -> -R2.
    """
    s = _sign_value(sign)
    if axis == "z":
        if not isinstance(params, ZeroFieldParams):
            raise DomainError("the z map takes ZeroFieldParams")
        T = z_transfer(params.gamma, params.Z)
    elif axis in ("x", "y"):
        if not isinstance(params, ChannelParams):
            raise DomainError(f"the {axis} map takes ChannelParams")
        if axis == "x":
            T = x_transfer(params.R1, s * params.R2, params.W)
        else:
            T = y_transfer(params.R1, s * params.R2, params.W, strict_paper)
    else:
        raise DomainError(f"unknown axis {axis!r}")
    ch = QubitChannel(T, axis, s)
    if ch.trace_defect() > 1e-12:
        raise ConsistencyError(f"{axis} map is not trace preserving")
    return ch


def z_quarter_turn():
    """V with V S_x V^dag = S_y: rotation about z by pi/2."""
    return rotation_z(np.pi / 2)


# --- complete positivity ----------------------------------------------------


def choi_matrix(channel: QubitChannel):
    """J = sum_ij |i><j| (x) E(|i><j|); the identity map has eigenvalues {2,0,0,0}."""
    T = channel.transfer
    J = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            unit = np.zeros((2, 2))
            unit[i, j] = 1.0
            J += np.kron(unit, T[:, 2 * i + j].reshape(2, 2))
    return J


@dataclass(frozen=True)
class CPReport:
    is_tp: bool
    choi_eigenvalues: tuple
    is_cp: bool


def cp_check(channel: QubitChannel, tol=CP_TOL) -> CPReport:
    J = choi_matrix(channel)
    eig = np.linalg.eigvalsh(0.5 * (J + J.conj().T))
    return CPReport(
        is_tp=channel.trace_defect() <= 1e-12,
        choi_eigenvalues=tuple(float(e) for e in eig),
        is_cp=bool(eig.min() >= -tol),
    )
