import numpy as np
import pytest

from gbitlab.bloch import Rotation, random_rotation
from gbitlab.circuits import (
    Circuit,
    Distribution,
    ExpGate,
    InadmissibleGateError,
    LocalGate,
    QuantumGate,
    RawGate,
    admissibility_scan,
    circuit_matrix,
    correlation_check,
    evaluate,
    gate_from_generator,
    outcome_strings,
    random_local_circuit,
)
from gbitlab.constraints import local_algebra_basis
from gbitlab.quantum_oracle import born_probabilities, named_gate
from gbitlab.bloch import lift_rotation
from gbitlab.tensor import kron_all
import scipy.linalg


def _unit(rng, d):
    v = rng.standard_normal(d)
    return v / np.linalg.norm(v)


def test_empty_circuit(rng):
    a = [_unit(rng, 4) for _ in range(2)]
    dist = evaluate(Circuit(4, 2, a, [], a))
    assert dist.as_dict()["++"] == pytest.approx(1.0, abs=1e-15)
    assert list(dist.as_dict()) == ["++", "+-", "-+", "--"]


def test_rotation_undone(rng):
    a = [_unit(rng, 3) for _ in range(2)]
    b = [_unit(rng, 3) for _ in range(2)]
    R = random_rotation(3, 1)
    undo = Rotation(R.matrix.T)
    d1 = evaluate(Circuit(3, 2, a, [LocalGate(1, R), LocalGate(1, undo)], b))
    d0 = evaluate(Circuit(3, 2, a, [], b))
    assert np.max(np.abs(d1.probabilities - d0.probabilities)) < 1e-12


def test_quantum_cnot_matches_oracle():
    e3 = np.array([0.0, 0.0, 1.0])
    ex = np.array([1.0, 0.0, 0.0])
    for preps in ([e3, e3], [-e3, e3], [ex, e3]):
        c = Circuit(3, 2, preps, [QuantumGate("CNOT", (1, 2))], [e3, e3])
        born = born_probabilities(named_gate("CNOT", (1, 2), 2), preps, [e3, e3])
        assert np.max(np.abs(evaluate(c).probabilities - born)) < 1e-10


def test_bell_correlation():
    e3 = np.array([0.0, 0.0, 1.0])
    c = Circuit(3, 2, [e3, e3], [QuantumGate("H", (1,)), QuantumGate("CNOT", (1, 2))], [e3, e3])
    dist = evaluate(c)
    assert np.allclose(dist.probabilities, [0.5, 0, 0, 0.5], atol=1e-12)
    assert abs(correlation_check(dist) - 0.5) < 1e-12


def test_uniform_has_no_correlation():
    d = Distribution(2, tuple(outcome_strings(2)), np.full(4, 0.25))
    assert correlation_check(d) == 0.0


def test_generator_exponential(rng):
    assert np.array_equal(gate_from_generator(np.zeros((9, 9)), 1.3), np.eye(9))
    X = rng.standard_normal((9, 9))
    assert np.array_equal(gate_from_generator(X, 0.0), np.eye(9))
    assert np.max(np.abs(gate_from_generator(X, 0.4) @ gate_from_generator(X, -0.4) - np.eye(9))) < 1e-10
    with pytest.raises(ValueError):
        gate_from_generator(np.full((3, 3), np.nan), 1.0)
    with pytest.raises(ValueError):
        gate_from_generator(X, np.inf)


def test_local_generator_exponential_factorizes(rng):
    d, n = 4, 2
    gloc = local_algebra_basis(d, n)
    c = rng.standard_normal(gloc.dim)
    X = (c @ gloc.vectors).reshape(25, 25)
    t = 0.8
    # split per site: first block of the basis acts on site 1
    k = d * (d - 1) // 2
    X1 = (c[:k] @ gloc.vectors[:k]).reshape(25, 25)
    X2 = X - X1
    G1 = scipy.linalg.expm(t * X1)
    G2 = scipy.linalg.expm(t * X2)
    assert np.max(np.abs(gate_from_generator(X, t) - G1 @ G2)) < 1e-10
    assert np.max(np.abs(G1 @ G2 - G2 @ G1)) < 1e-10


def test_gate_order_matters(rng):
    R1, R2 = random_rotation(3, 2), random_rotation(3, 3)
    a = [_unit(rng, 3)]
    b = [_unit(rng, 3)]
    p12 = evaluate(Circuit(3, 1, a, [LocalGate(1, R1), LocalGate(1, R2)], b)).probabilities
    p21 = evaluate(Circuit(3, 1, a, [LocalGate(1, R2), LocalGate(1, R1)], b)).probabilities
    c = Circuit(3, 1, a, [LocalGate(1, R1), LocalGate(1, R2)], b)
    assert np.allclose(circuit_matrix(c), lift_rotation(R2.matrix @ R1.matrix))
    assert np.max(np.abs(p12 - p21)) > 1e-3


@pytest.mark.parametrize("d,n", [(2, 3), (4, 3)])
def test_local_circuits_factorize(d, n, rng):
    for _ in range(20):
        dist = evaluate(random_local_circuit(d, n, 6, rng))
        assert abs(dist.probabilities.sum() - 1) < 1e-10
        assert correlation_check(dist) < 1e-10


def test_inadmissible_gate_flagged(rng):
    # exp of a nonlocal direction at large time leaves the state space
    A1 = np.array([[0, 0, 0], [0, 0, 1], [0, -1, 0]], float)
    B0 = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], float)
    G = gate_from_generator(np.kron(A1, B0), 1.0)
    lo, hi = admissibility_scan(G, 2, 2, 2000, 0)
    assert lo < -1e-3 or hi > 1 + 1e-3
    e1, e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    with pytest.raises(InadmissibleGateError) as err:
        evaluate(Circuit(2, 2, [e1, e2], [RawGate(G)], [e1, e2]))
    assert err.value.outcome is not None


def test_validation():
    e = np.array([1.0, 0.0])
    with pytest.raises(ValueError):
        Circuit(2, 2, [e], [], [e, e])
    with pytest.raises(ValueError):
        Circuit(2, 1, [e], [RawGate(2 * np.eye(3))], [e])
    with pytest.raises(ValueError):
        Circuit(2, 1, [e], [LocalGate(2, Rotation(np.eye(2)))], [e])
    with pytest.raises(ValueError):
        Circuit(2, 1, [e], [QuantumGate("X", (1,))], [e])
    Circuit(2, 1, [e], [ExpGate(np.zeros((3, 3)), 1.0)], [e])
