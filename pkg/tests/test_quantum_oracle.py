import numpy as np
import pytest
import scipy.linalg

from gbitlab.bloch import lift, lift_rotation
from gbitlab.constraints import first_order_batch, first_order_null_space
from gbitlab.analyzer import spot_check
from gbitlab.quantum_oracle import (
    HermitianOperator,
    adjoint_generator,
    born_probabilities,
    named_gate,
    pauli_basis,
    random_unitary,
    traceless_hermitian_basis,
    transfer_matrix,
)
from gbitlab.tensor import joint_probability, product_lift

SX, SY, SZ = (pauli_basis(1)[i] for i in (1, 2, 3))


def _unit(rng, d=3):
    v = rng.standard_normal(d)
    return v / np.linalg.norm(v)


def _all_outcomes(T, preps, meas):
    import itertools

    return np.array(
        [joint_probability(T, preps, [s * b for s, b in zip(o, meas)]) for o in itertools.product((1, -1), repeat=len(preps))]
    )


def test_identity_and_z_rotation():
    assert np.allclose(transfer_matrix(np.eye(4)).matrix, np.eye(16), atol=1e-15)
    th = 0.7
    U = scipy.linalg.expm(-0.5j * th * SZ)
    c, s = np.cos(th), np.sin(th)
    Rz = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    assert np.allclose(transfer_matrix(U).matrix, lift_rotation(Rz), atol=1e-14)


def test_generator_traces_circle():
    X = adjoint_generator(SZ / 2).matrix
    rho0 = 0.5 * (np.eye(2) + SX)
    for t in np.linspace(0, 2 * np.pi, 9):
        v = scipy.linalg.expm(t * X) @ lift(np.array([1.0, 0.0, 0.0]))
        U = scipy.linalg.expm(-1j * t * SZ / 2)
        rho = U @ rho0 @ U.conj().T
        r = [np.real(np.trace(P @ rho)) for P in (SX, SY, SZ)]
        assert np.allclose(v, [1.0] + r, atol=1e-10)
        assert abs(v[3]) < 1e-12 and abs(np.hypot(v[1], v[2]) - 1) < 1e-12


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        adjoint_generator(np.eye(2))
    with pytest.raises(ValueError):
        HermitianOperator(1, np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        transfer_matrix(np.array([[1, 1], [0, 1]]))


def test_generator_structure():
    for H in traceless_hermitian_basis(2):
        X = adjoint_generator(H).matrix
        assert np.all(X[0] == 0) and np.all(X[:, 0] == 0)
        assert np.allclose(X, -X.T, atol=1e-15)


def test_xx_generator_admissible(rng):
    X = adjoint_generator(np.kron(SX, SX) / 2).matrix
    P = np.array([[_unit(rng), _unit(rng)] for _ in range(1000)])
    B = np.array([[_unit(rng), _unit(rng)] for _ in range(1000)])
    f, g = first_order_batch(X, P, B, rng.integers(1, 3, size=1000))
    assert np.abs(f).max() < 1e-10 and np.abs(g).max() < 1e-10
    assert spot_check(X, 3, 2, 10_000, 5) > -1e-10


def test_cnot_example():
    T = transfer_matrix(named_gate("CNOT", (1, 2), 2))
    e3 = np.array([0.0, 0.0, 1.0])
    assert abs(joint_probability(T, [e3, e3], [e3, e3]) - 1.0) < 1e-12


@pytest.mark.parametrize("n", [1, 2])
def test_oracle_equivalence(n, rng):
    worst = 0.0
    for _ in range(100):
        U = random_unitary(2**n, rng)
        preps = [_unit(rng) for _ in range(n)]
        meas = [_unit(rng) for _ in range(n)]
        ours = _all_outcomes(transfer_matrix(U), preps, meas)
        worst = max(worst, np.max(np.abs(ours - born_probabilities(U, preps, meas))))
    assert worst < 1e-10


def test_lie_homomorphism(rng):
    for _ in range(20):
        G1 = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        G2 = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        H = G1 + G1.conj().T
        K = G2 + G2.conj().T
        H -= np.trace(H) / 4 * np.eye(4)
        K -= np.trace(K) / 4 * np.eye(4)
        XH, XK = adjoint_generator(H).matrix, adjoint_generator(K).matrix
        lhs = adjoint_generator(-1j * (H @ K - K @ H)).matrix
        assert np.max(np.abs(lhs - (XH @ XK - XK @ XH))) < 1e-9


def test_images_independent_and_in_null_space():
    imgs = np.array([adjoint_generator(H).matrix.ravel() for H in traceless_hermitian_basis(2)])
    assert np.linalg.matrix_rank(imgs, tol=1e-10) == 15
    space = first_order_null_space(3, 2)
    for v in imgs:
        assert space.projection_residual(v.reshape(16, 16)) < 1e-8


def test_gate_library():
    assert np.allclose(named_gate("X", 2, 2), np.kron(np.eye(2), SX))
    assert np.allclose(named_gate("CNOT", (2, 1), 2) @ named_gate("CNOT", (2, 1), 2), np.eye(4))
    sw = named_gate("SWAP", (1, 2), 2)
    assert np.allclose(sw @ np.kron(SX, SZ) @ sw, np.kron(SZ, SX))
    with pytest.raises(ValueError):
        named_gate("RX", 1, 1)
    with pytest.raises(ValueError):
        named_gate("CNOT", (1,), 2)
