import numpy as np
import pytest

from gbitlab.bloch import (
    BlochVector,
    DimensionError,
    Rotation,
    lift,
    lift_rotation,
    outcome_probability,
    random_rotation,
    random_unit_vector,
    rotation_to_e1,
)


def test_lift_examples():
    assert np.array_equal(lift([0.0, 0.0, 0.0]), [1, 0, 0, 0])
    assert np.array_equal(lift([1.0, 0.0]), [1, 1, 0])
    assert np.array_equal(lift(BlochVector([0.6, 0.8])), [1, 0.6, 0.8])


def test_outcome_probability_examples():
    e1, e2 = np.eye(2)
    assert outcome_probability(e1, e1) == 1.0
    assert outcome_probability(-e1, e1) == 0.0
    assert outcome_probability(e1, e2) == 0.5


def test_outcome_probability_errors():
    with pytest.raises(DimensionError):
        outcome_probability([1.0, 0.0], [1.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        outcome_probability([1.0, 0.0], [0.5, 0.0])


def test_vector_validation():
    with pytest.raises(ValueError):
        BlochVector([1.0, 1.0])
    with pytest.raises(ValueError):
        BlochVector([0.5, 0.0], unit=True)
    v = BlochVector([0.0, 1.0], unit=True)
    assert v.d == 2 and v.is_unit()
    # no silent renormalization
    assert np.array_equal((-v).components, [0.0, -1.0])


def test_rotation_validation():
    with pytest.raises(ValueError):
        Rotation(np.diag([1.0, -1.0]))
    with pytest.raises(ValueError):
        Rotation([[1.0, 0.1], [0.0, 1.0]])
    Rotation([[-1.0]])  # O(1) is allowed for d = 1


def test_lift_rotation_examples():
    assert np.array_equal(lift_rotation(np.eye(3)), np.eye(4))
    R = np.array([[0.0, -1.0], [1.0, 0.0]])  # rotation by pi/2
    assert np.allclose(lift_rotation(R) @ lift([1.0, 0.0]), lift([0.0, 1.0]), atol=1e-15)
    Q = random_rotation(5, 3).matrix
    assert abs(np.linalg.det(lift_rotation(Q)) - 1.0) < 1e-12


def test_random_determinism_and_norm():
    a, b = random_unit_vector(4, 11), random_unit_vector(4, 11)
    assert np.array_equal(a.components, b.components)
    assert abs(a.norm - 1.0) < 1e-12
    assert np.array_equal(random_rotation(4, 5).matrix, random_rotation(4, 5).matrix)


def test_random_vectors_mean():
    vs = np.array([random_unit_vector(3, s).components for s in range(10_000)])
    assert np.linalg.norm(vs.mean(axis=0)) < 0.05


def test_properties(rng):
    for d in (2, 3, 5):
        for _ in range(20):
            a = random_unit_vector(d, int(rng.integers(2**32))).components
            b = random_unit_vector(d, int(rng.integers(2**32))).components
            R1 = random_rotation(d, int(rng.integers(2**32))).matrix
            R2 = random_rotation(d, int(rng.integers(2**32))).matrix
            assert abs(outcome_probability(a, a) - 1.0) < 1e-15
            assert abs(outcome_probability(-a, a)) < 1e-15
            assert np.max(np.abs(lift_rotation(R1 @ R2) - lift_rotation(R1) @ lift_rotation(R2))) < 1e-12
            assert abs(outcome_probability(R1 @ a, R1 @ b) - outcome_probability(a, b)) < 1e-15


def test_rotation_to_e1(rng):
    for d in (2, 3, 4, 7):
        b = random_unit_vector(d, int(rng.integers(2**32))).components
        R = rotation_to_e1(b)
        assert np.allclose(R @ b, np.eye(d)[0], atol=1e-14)
        assert abs(np.linalg.det(R) - 1.0) < 1e-12
        assert np.array_equal(rotation_to_e1(np.eye(d)[0]), np.eye(d))
