"""Dense linear algebra for one to three qubits.

States are plain numpy arrays: kets are 1-D, density matrices 2-D. Qubit 0
is the leftmost tensor factor and basis indices are big-endian bit strings,
so for the protocol A1 = 0, A2 = 1, B = 2 and ``|jk>_{A1A2} |m>_B`` has
index ``4j + 2k + m``.

Single-qubit maps are stored as 4x4 transfer matrices on the row-major
vectorization ``vec(rho) = (rho00, rho01, rho10, rho11)``; column ``c`` of
the matrix is the image of the c-th matrix unit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DomainError

ATOL = 1e-12
MAX_QUBITS = 3

I2 = np.eye(2, dtype=complex)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


def _n_qubits(dim):
    n = int(round(np.log2(dim)))
    if 2**n != dim or not 1 <= n <= MAX_QUBITS:
        raise DomainError(f"dimension {dim} is not that of 1-{MAX_QUBITS} qubits")
    return n


@dataclass(frozen=True, eq=False)
class QubitChannel:
    """A single-qubit linear map in transfer-matrix form.

    ``axis`` records which field direction generated it ('x', 'y', 'z', or
    None for generic maps) and ``sign`` is +1 or -1 (field reversed).
    """

    transfer: np.ndarray
    axis: str | None = None
    sign: int = 1

    def __post_init__(self):
        T = np.asarray(self.transfer, dtype=complex)
        if T.shape != (4, 4):
            raise DomainError(f"transfer matrix must be 4x4, got {T.shape}")
        T.setflags(write=False)
        object.__setattr__(self, "transfer", T)

    @classmethod
    def identity(cls):
        return cls(np.eye(4))

    @classmethod
    def from_unitary(cls, U, axis=None, sign=1):
        U = np.asarray(U, dtype=complex)
        return cls(np.kron(U, U.conj()), axis, sign)

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=complex)
        return (self.transfer @ rho.reshape(4)).reshape(2, 2)

    def compose(self, first: "QubitChannel") -> "QubitChannel":
        """The map ``self o first`` (apply ``first``, then ``self``)."""
        return QubitChannel(self.transfer @ first.transfer)

    def conjugated(self, V) -> "QubitChannel":
        """rho -> V E(V^dag rho V) V^dag."""
        V = np.asarray(V, dtype=complex)
        sup = np.kron(V, V.conj())
        sup_dag = np.kron(V.conj().T, V.T)
        return QubitChannel(sup @ self.transfer @ sup_dag, self.axis, self.sign)

    def trace_defect(self):
        """max_ij |tr E(|i><j|) - delta_ij|."""
        traces = self.transfer[0] + self.transfer[3]
        return float(np.abs(traces - np.array([1, 0, 0, 1])).max())

    def hermiticity_defect(self, rho):
        rho = np.asarray(rho, dtype=complex)
        return float(np.abs(self(rho).conj().T - self(rho.conj().T)).max())

    def allclose(self, other, atol=ATOL):
        return np.allclose(self.transfer, other.transfer, rtol=0, atol=atol)


def ket(bits: str):
    """Computational basis ket from a bit string like '011'."""
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[int(bits, 2)] = 1.0
    return psi


def bloch_state(theta, phi):
    """a|0> + b|1> with a = cos(theta/2), b = exp(i phi) sin(theta/2)."""
    if not (0 <= theta <= np.pi and 0 <= phi <= 2 * np.pi):
        raise DomainError(f"need 0 <= theta <= pi and 0 <= phi <= 2pi, got ({theta}, {phi})")
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def bell_singlet():
    """(|01> - |10>)/sqrt(2)."""
    return np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)


def sqrt_swap():
    """The sqrt(SWAP) gate including its exp(i pi/8) global phase."""
    return (np.exp(1j * np.pi / 8) / np.sqrt(2)) * np.array(
        [
            [1 - 1j, 0, 0, 0],
            [0, 1, -1j, 0],
            [0, -1j, 1, 0],
            [0, 0, 0, 1 - 1j],
        ]
    )


def rotation(angle, phi_axis=0.0):
    """Rotation by ``angle`` about (cos phi, sin phi, 0): exp(-i angle n.sigma / 2)."""
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array(
        [
            [c, -1j * np.exp(-1j * phi_axis) * s],
            [-1j * np.exp(1j * phi_axis) * s, c],
        ]
    )


def rotation_z(angle):
    return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])


def density(psi):
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def check_state(rho, physical=True, atol=ATOL):
    """Raise DomainError unless ``rho`` is a unit-trace Hermitian matrix.

    With ``physical`` the spectrum must also be non-negative (to -1e-10).
    """
    rho = np.asarray(rho)
    if abs(np.trace(rho) - 1) > atol:
        raise DomainError(f"trace {np.trace(rho)} differs from 1")
    if np.abs(rho - rho.conj().T).max() > atol:
        raise DomainError("matrix is not Hermitian")
    if physical and np.linalg.eigvalsh(rho).min() < -1e-10:
        raise DomainError("matrix has a negative eigenvalue")
    return rho


def is_unitary(U, atol=ATOL):
    U = np.asarray(U)
    return np.allclose(U @ U.conj().T, np.eye(len(U)), rtol=0, atol=atol)


def apply_unitary(rho, U, qubits):
    """Conjugate ``rho`` by ``U`` acting on the sorted qubit list ``qubits``."""
    rho = np.asarray(rho, dtype=complex)
    U = np.asarray(U, dtype=complex)
    n = _n_qubits(rho.shape[0])
    qubits = list(qubits)
    k = len(qubits)
    if qubits != sorted(set(qubits)) or not qubits or qubits[0] < 0 or qubits[-1] >= n:
        raise DomainError(f"invalid qubit list {qubits} for {n} qubits")
    if U.shape != (2**k, 2**k):
        raise DomainError(f"unitary of shape {U.shape} does not act on {k} qubits")
    rest = [q for q in range(n) if q not in qubits]
    perm = qubits + rest
    inv = np.argsort(perm)
    t = rho.reshape([2] * (2 * n))
    t = t.transpose(perm + [n + p for p in perm]).reshape(2**k, 2 ** (n - k), 2**k, 2 ** (n - k))
    t = np.einsum("ab,bxcy,dc->axdy", U, t, U.conj())
    t = t.reshape([2] * (2 * n)).transpose(list(inv) + [n + p for p in inv])
    return t.reshape(2**n, 2**n)


def apply_channel(rho, channel: QubitChannel, qubit: int):
    """Apply a single-qubit map to one tensor factor of ``rho``."""
    rho = np.asarray(rho, dtype=complex)
    n = _n_qubits(rho.shape[0])
    if not 0 <= qubit < n:
        raise DomainError(f"qubit {qubit} out of range for {n} qubits")
    t = rho.reshape([2] * (2 * n))
    t = np.moveaxis(t, [qubit, n + qubit], [0, 1])
    shape = t.shape
    t = (channel.transfer @ t.reshape(4, -1)).reshape(shape)
    t = np.moveaxis(t, [0, 1], [qubit, n + qubit])
    return t.reshape(2**n, 2**n)


def partial_trace(rho, keep):
    """Reduced density matrix on the qubits in ``keep`` (kept in sorted order)."""
    rho = np.asarray(rho, dtype=complex)
    n = _n_qubits(rho.shape[0])
    keep = sorted(set(keep))
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise DomainError(f"invalid keep list {keep} for {n} qubits")
    drop = [q for q in range(n) if q not in keep]
    t = rho.reshape([2] * (2 * n))
    letters = "abcdefghijkl"
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for q in drop:
        col[q] = row[q]
    out = "".join(row[q] for q in keep) + "".join(col[q] for q in keep)
    d = 2 ** len(keep)
    return np.einsum("".join(row) + "".join(col) + "->" + out, t).reshape(d, d)


def fidelity(psi, rho):
    """<psi|rho|psi> as a real number."""
    psi = np.asarray(psi, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (len(psi), len(psi)):
        raise DomainError(f"state of dim {len(psi)} vs matrix {rho.shape}")
    f = np.vdot(psi, rho @ psi)
    if abs(f.imag) > 1e-9:
        raise ConsistencyError(f"overlap has imaginary part {f.imag:.3e}")
    return float(f.real)


def measurement_projectors():
    """M_jk = |jk><jk| on A1A2, extended by the identity on B."""
    out = {}
    for j in (0, 1):
        for k in (0, 1):
            P = np.zeros((4, 4), dtype=complex)
            P[2 * j + k, 2 * j + k] = 1.0
            out[(j, k)] = np.kron(P, I2)
    return out
