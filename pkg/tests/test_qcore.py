import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdteleport import qcore
from qdteleport.errors import ConsistencyError, DomainError

angles = st.tuples(st.floats(0, np.pi), st.floats(0, 2 * np.pi))


def random_density(rng, n):
    d = 2**n
    G = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = G @ G.conj().T
    return rho / np.trace(rho)


def random_unitary(rng, d):
    Q, R = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


@pytest.mark.parametrize(
    "theta, phi, expected",
    [
        (0, 0, [1, 0]),
        (np.pi, 0, [0, 1]),
        (np.pi / 2, np.pi / 2, [1 / np.sqrt(2), 1j / np.sqrt(2)]),
    ],
)
def test_bloch_state(theta, phi, expected):
    np.testing.assert_allclose(qcore.bloch_state(theta, phi), expected, atol=1e-15)


@pytest.mark.parametrize("theta, phi", [(-0.1, 0), (4.0, 0), (1.0, 7.0)])
def test_bloch_state_range(theta, phi):
    with pytest.raises(DomainError):
        qcore.bloch_state(theta, phi)


def test_sqrt_swap():
    S = qcore.sqrt_swap()
    assert qcore.is_unitary(S)
    # squares to SWAP up to exp(-i pi/4)... with the e^{i pi/8} prefactor the phase is absorbed
    S2 = S @ S
    phase = S2[0, 0]
    np.testing.assert_allclose(S2 / phase, qcore.SWAP, atol=1e-15)
    # excitation-number preserving: exact zeros outside the blocks
    mask = np.ones((4, 4), dtype=bool)
    mask[0, 0] = mask[3, 3] = False
    mask[1:3, 1:3] = False
    assert np.all(S[mask] == 0)


def test_rotation():
    np.testing.assert_allclose(qcore.rotation(0.0), np.eye(2), atol=1e-16)
    np.testing.assert_allclose(qcore.rotation(-np.pi, 0.0), [[0, 1j], [1j, 0]], atol=1e-15)
    # R^y(pi/2) = exp(-i pi/4 sigma_y)
    Y = np.array([[0, -1j], [1j, 0]])
    np.testing.assert_allclose(
        qcore.rotation(np.pi / 2, np.pi / 2), np.cos(np.pi / 4) * np.eye(2) - 1j * np.sin(np.pi / 4) * Y,
        atol=1e-15,
    )


def test_bell_singlet_marginals():
    rho = qcore.density(qcore.bell_singlet())
    for keep in ([0], [1]):
        np.testing.assert_allclose(qcore.partial_trace(rho, keep), np.eye(2) / 2, atol=1e-15)


def test_partial_trace_product():
    rng = np.random.default_rng(1)
    a, b, c = (random_density(rng, 1) for _ in range(3))
    full = np.kron(np.kron(a, b), c)
    np.testing.assert_allclose(qcore.partial_trace(full, [0]), a, atol=1e-14)
    np.testing.assert_allclose(qcore.partial_trace(full, [2]), c, atol=1e-14)
    np.testing.assert_allclose(qcore.partial_trace(full, [0, 2]), np.kron(a, c), atol=1e-14)


def test_apply_unitary_matches_kron():
    rng = np.random.default_rng(2)
    rho = random_density(rng, 3)
    U = random_unitary(rng, 2)
    V = random_unitary(rng, 4)
    I = np.eye(2)
    for qubit, full in [(0, np.kron(U, np.eye(4))), (1, np.kron(np.kron(I, U), I)), (2, np.kron(np.eye(4), U))]:
        np.testing.assert_allclose(qcore.apply_unitary(rho, U, [qubit]), full @ rho @ full.conj().T, atol=1e-13)
    full = np.kron(V, I)
    np.testing.assert_allclose(qcore.apply_unitary(rho, V, [0, 1]), full @ rho @ full.conj().T, atol=1e-13)
    full = np.kron(I, V)
    np.testing.assert_allclose(qcore.apply_unitary(rho, V, [1, 2]), full @ rho @ full.conj().T, atol=1e-13)


def test_apply_unitary_identity_and_errors():
    rho = random_density(np.random.default_rng(3), 3)
    np.testing.assert_allclose(qcore.apply_unitary(rho, np.eye(2), [1]), rho, atol=1e-15)
    with pytest.raises(DomainError):
        qcore.apply_unitary(rho, np.eye(2), [3])
    with pytest.raises(DomainError):
        qcore.apply_unitary(rho, np.eye(4), [0])


def test_apply_channel_matches_unitary():
    rng = np.random.default_rng(4)
    rho = random_density(rng, 3)
    U = random_unitary(rng, 2)
    ch = qcore.QubitChannel.from_unitary(U)
    for q in range(3):
        np.testing.assert_allclose(qcore.apply_channel(rho, ch, q), qcore.apply_unitary(rho, U, [q]), atol=1e-13)
    np.testing.assert_allclose(qcore.apply_channel(rho, qcore.QubitChannel.identity(), 1), rho, atol=0)


def test_channel_algebra():
    rng = np.random.default_rng(5)
    U, V = random_unitary(rng, 2), random_unitary(rng, 2)
    cu, cv = qcore.QubitChannel.from_unitary(U), qcore.QubitChannel.from_unitary(V)
    assert cv.compose(cu).allclose(qcore.QubitChannel.from_unitary(V @ U))
    assert cu.conjugated(V).allclose(qcore.QubitChannel.from_unitary(V @ U @ V.conj().T))
    assert cu.trace_defect() < 1e-14
    with pytest.raises(DomainError):
        qcore.QubitChannel(np.eye(3))


def test_measurement_completeness():
    P = qcore.measurement_projectors()
    assert set(P) == {(0, 0), (0, 1), (1, 0), (1, 1)}
    assert np.array_equal(sum(P.values()), np.eye(8))


def test_fidelity():
    psi = qcore.bloch_state(1.0, 2.0)
    assert qcore.fidelity(psi, qcore.density(psi)) == pytest.approx(1.0)
    with pytest.raises(ConsistencyError):
        qcore.fidelity(psi, np.array([[0, 1], [0, 0]], dtype=complex))
    with pytest.raises(DomainError):
        qcore.fidelity(psi, np.eye(4))


def test_check_state():
    qcore.check_state(np.eye(2) / 2)
    with pytest.raises(DomainError):
        qcore.check_state(np.eye(2))
    with pytest.raises(DomainError):
        qcore.check_state(np.diag([1.5, -0.5]))
    qcore.check_state(np.diag([1.5, -0.5]), physical=False)


@settings(max_examples=1000, deadline=None)
@given(angles, st.sampled_from([0, 1, 2]), st.floats(-2 * np.pi, 2 * np.pi), st.floats(0, 2 * np.pi))
def test_operations_preserve_states(ab, qubit, angle, axis):
    # random product-then-entangled three-qubit state through each operation
    psi = np.kron(qcore.bloch_state(*ab), qcore.bell_singlet())
    rho = qcore.density(psi)
    rho = qcore.apply_unitary(rho, qcore.sqrt_swap(), [0, 1])
    rho = qcore.apply_unitary(rho, qcore.rotation(angle, axis), [qubit])
    qcore.check_state(rho)
    for keep in ([qubit], [0, 1], [1, 2]):
        qcore.check_state(qcore.partial_trace(rho, keep))
    assert qcore.fidelity(psi, rho) >= -1e-12
