"""Exact central-spin oracle: one electron spin coupled uniformly to a small
bath of spin-1/2 nuclei in the maximally mixed state.

H = lam * S_axis + S . I  (units A = hbar = 1), and the channel is
E(rho) = tr_bath[U (rho (x) 1/2^N) U^dag] with U = exp(-iHt).

Two routes compute the same channel:

* ``dense``: the full 2^(N+1) dimensional Hamiltonian, averaged over the
  2^N computational bath states. Exact, but the eigendecomposition grows
  as 8^N.
* ``spin``: H only sees the total bath spin I, so the bath splits into
  irreducible spin-J sectors with known multiplicities; each sector is a
  2(2J+1) dimensional problem. Exact, and cheap for every N <= 12.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .decoherence import cp_check, x_transfer, y_transfer, z_quarter_turn, z_transfer
from .errors import DomainError
from .qcore import QubitChannel

MAX_BATH = 12
DENSE_LIMIT = 12

_SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
_SZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2
_S = {"x": _SX, "y": _SY, "z": _SZ}


@dataclass(frozen=True)
class CentralSpinModel:
    n_bath: int
    lam: float
    t: float
    axis: str = "x"

    def __post_init__(self):
        if not 0 <= self.n_bath <= MAX_BATH or int(self.n_bath) != self.n_bath:
            raise DomainError(f"bath size must be an integer in 0..{MAX_BATH}, got {self.n_bath}")
        if self.axis not in _S:
            raise DomainError(f"axis must be x, y or z, got {self.axis!r}")
        if self.t < 0 or self.lam < 0:
            raise DomainError("time and field must be non-negative")

    @property
    def dim(self):
        return 2 ** (self.n_bath + 1)


def spin_matrices(j):
    """(Jx, Jy, Jz) for spin j in the |j, m = j..-j> basis."""
    m = np.arange(j, -j - 1, -1)
    d = len(m)
    jp = np.zeros((d, d), dtype=complex)
    for k in range(1, d):
        jp[k - 1, k] = np.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    return (jp + jp.T) / 2, (jp - jp.T) / 2j, np.diag(m).astype(complex)


def sector_multiplicities(n):
    """{2J: number of spin-J irreps} in the coupling of n spin-1/2."""
    out = {}
    for two_j in range(n % 2, n + 1, 2):
        k = (n - two_j) // 2
        out[two_j] = comb(n, k) - (comb(n, k - 1) if k > 0 else 0)
    return out


def _channel_from_unitary(U, d_bath):
    """Transfer matrix of rho -> tr_bath[U (rho (x) 1/d) U^dag]."""
    U4 = U.reshape(2, d_bath, 2, d_bath)
    T = np.einsum("kbic,lbjc->klij", U4, U4.conj()) / d_bath
    return T.reshape(4, 4)


def _evolution(H, t):
    w, v = np.linalg.eigh(H)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def _sector_channel(two_j, lam, t, axis):
    jx, jy, jz = spin_matrices(two_j / 2)
    d = jx.shape[0]
    H = lam * np.kron(_S[axis], np.eye(d))
    for s, J in ((_SX, jx), (_SY, jy), (_SZ, jz)):
        H = H + np.kron(s, J)
    return _channel_from_unitary(_evolution(H, t), d)


def _spin_route(model):
    if model.n_bath == 0:
        return _sector_channel(0, model.lam, model.t, model.axis)
    T = np.zeros((4, 4), dtype=complex)
    for two_j, mult in sector_multiplicities(model.n_bath).items():
        weight = mult * (two_j + 1) / 2**model.n_bath
        T += weight * _sector_channel(two_j, model.lam, model.t, model.axis)
    return T


def bath_operator(op, k, n):
    """``op`` on bath spin k (0-based) of n, identity elsewhere."""
    return np.kron(np.kron(np.eye(2**k), op), np.eye(2 ** (n - k - 1)))


def dense_hamiltonian(model):
    n = model.n_bath
    db = 2**n
    H = model.lam * np.kron(_S[model.axis], np.eye(db))
    for s in (_SX, _SY, _SZ):
        total = np.zeros((db, db), dtype=complex)
        for k in range(n):
            total += bath_operator(s, k, n)
        H = H + np.kron(s, total)
    return H


def _dense_route(model):
    U = _evolution(dense_hamiltonian(model), model.t)
    # the 1/2^N bath average over computational states is the trace in the einsum
    return _channel_from_unitary(U, 2**model.n_bath)


def exact_channel(model: CentralSpinModel, method="spin") -> QubitChannel:
    """Process-tomography channel of the central spin."""
    if method == "spin":
        T = _spin_route(model)
    elif method == "dense":
        if model.n_bath > DENSE_LIMIT:
            raise DomainError(f"dense route limited to {DENSE_LIMIT} bath spins")
        T = _dense_route(model)
    else:
        raise DomainError(f"unknown method {method!r}")
    return QubitChannel(T, model.axis, 1)


# --- comparison against the analytic maps ---------------------------------------

Z_PATTERN = np.zeros((4, 4), dtype=bool)
for _r, _c in ((0, 0), (3, 0), (1, 1), (2, 2), (0, 3), (3, 3)):
    Z_PATTERN[_r, _c] = True


def _basis(axis):
    """Analytic template T(params) = T0 + sum_k p_k B_k, linear in the parameters."""
    if axis == "z":
        T0 = z_transfer(0.0, 0.0)
        return T0, [z_transfer(1.0, 0.0) - T0, z_transfer(0.0, 1.0) - T0], ("gamma", "Z")
    build = x_transfer if axis == "x" else y_transfer
    T0 = build(0.0, 0.0, 0.0)
    units = [build(*e) - T0 for e in ((1.0, 0, 0), (0, 1.0, 0), (0, 0, 1.0))]
    return T0, units, ("R1", "R2", "W")


def fit_params(channel: QubitChannel, axis):
    """Least-squares fit of the analytic map for ``axis`` to a channel.

    Returns (params dict, max entrywise residual of the fit).
    """
    T0, units, names = _basis(axis)
    A = np.stack([u.reshape(-1) for u in units], axis=1)
    rhs = (channel.transfer - T0).reshape(-1)
    A_ri = np.concatenate([A.real, A.imag])
    rhs_ri = np.concatenate([rhs.real, rhs.imag])
    coef, *_ = np.linalg.lstsq(A_ri, rhs_ri, rcond=None)
    fitted = T0 + sum(c * u for c, u in zip(coef, units))
    residual = float(np.abs(fitted - channel.transfer).max())
    return dict(zip(names, (float(c) for c in coef))), residual


def structure_report(exact: QubitChannel, axis, partner: QubitChannel | None = None):
    """Compare an exact channel with the analytic map family for ``axis``.

    ``partner`` is the exact y channel (when ``exact`` is the x channel) and
    enables the z-conjugation check y = V x V^dag.
    """
    T = exact.transfer
    report = {"axis": axis}
    if axis == "z":
        off = np.abs(T[~Z_PATTERN])
        report["off_pattern_max"] = float(off.max())
        report["pattern_ok"] = bool(off.max() <= 1e-10)
    params, residual = fit_params(exact, axis)
    report["fitted"] = params
    report["template_residual"] = residual
    report["template_ok"] = residual <= 1e-10
    cp = cp_check(exact)
    report["choi_min_eigenvalue"] = min(cp.choi_eigenvalues)
    report["trace_defect"] = exact.trace_defect()
    if partner is not None:
        conj = exact.conjugated(z_quarter_turn())
        dev = float(np.abs(conj.transfer - partner.transfer).max())
        report["z_conjugation_deviation"] = dev
        report["z_conjugation_ok"] = dev <= 1e-12
    return report


def rotation_channel(lam, t, axis="x"):
    """The bath-free channel: rotation by lam*t about ``axis``."""
    return exact_channel(CentralSpinModel(0, lam, t, axis))
