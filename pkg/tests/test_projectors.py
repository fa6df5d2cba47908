import numpy as np
import pytest

from conftest import random_membership
from gbitlab.projectors import (
    ProjectorSpec,
    ProjectorUnavailable,
    haar_average,
    phi_A,
    phi_AI,
    phi_B,
    phi_I,
    phi_prime,
    phi_stabilizer,
    projector_image_basis,
    psi_2x2,
    so2_average,
    tensor_projector,
    torus_average,
)
from gbitlab.subspaces import B_matrix, d2_matrices, standard_matrices
from gbitlab.tensor import hs_inner


def test_phi_I_examples():
    sm = standard_matrices(4)
    assert np.array_equal(phi_I(np.eye(5)), np.eye(5))
    assert not np.any(phi_I(sm.B.astype(float)))
    assert not np.any(phi_I(sm.A[0].astype(float)))


def test_phi_B_examples():
    sm = standard_matrices(4)
    B = sm.B.astype(float)
    assert np.array_equal(phi_B(B), B)
    assert not np.any(phi_B(B_matrix(np.eye(4)[1])))
    assert not np.any(phi_stabilizer(sm.A[0].astype(float), 1))
    # numerical stabilizer average agrees on B_{e_2}
    assert np.max(np.abs(haar_average(B_matrix(np.eye(4)[1]), "B", 4000, 3))) < 1e-12


def test_refusals():
    with pytest.raises(ProjectorUnavailable, match="d = 3"):
        phi_stabilizer(np.eye(4), 1)
    with pytest.raises(ProjectorUnavailable):
        phi_AI(np.eye(5))
    with pytest.raises(ProjectorUnavailable):
        phi_A(np.eye(4))


def test_psi():
    s = np.array([[0.0, 1.0], [-1.0, 0.0]])
    assert np.array_equal(psi_2x2(s), s)
    assert np.array_equal(psi_2x2(np.eye(2)), np.eye(2))
    assert not np.any(psi_2x2([[0.0, 1.0], [1.0, 0.0]]))


def test_phi_prime_and_A_examples():
    sm4, sm5 = standard_matrices(4), standard_matrices(5)
    A1 = sm4.A[0].astype(float)
    assert np.array_equal(phi_A(A1), A1)
    assert np.array_equal(phi_prime(np.eye(5)), np.eye(5))
    assert not np.any(phi_A(np.eye(5)))
    B5 = sm5.B.astype(float)
    assert np.array_equal(phi_prime(B5), B5)
    assert not np.any(phi_A(B5))


def test_phi_AI_examples():
    a = d2_matrices()
    A1 = a.A1.astype(float)
    assert np.array_equal(phi_AI(A1), A1)
    assert not np.any(phi_AI(a.B0.astype(float)))
    assert np.array_equal(phi_AI(np.eye(3)), np.eye(3))


def _kinds(d):
    return ["I", "B", "AI"] if d == 2 else ["I", "B", "A", "PRIME"]


@pytest.mark.parametrize("d", [2, 4, 5, 6])
def test_projector_algebra(d, rng):
    for kind in _kinds(d):
        P = ProjectorSpec(kind, d).apply
        for _ in range(20):
            M, N = random_membership(rng, d), random_membership(rng, d)
            assert np.max(np.abs(P(P(M)) - P(M))) < 1e-9
            assert abs(hs_inner(P(M), N) - hs_inner(M, P(N))) < 1e-9


@pytest.mark.parametrize("d", [2, 4, 5, 6])
def test_projector_images(d):
    kinds = ["B", "AI"] if d == 2 else ["B", "A"]
    for kind in kinds:
        S = ProjectorSpec(kind, d).superoperator()
        claimed = np.array([m.ravel() for m in projector_image_basis(kind, d)])
        s = np.linalg.svd(S, compute_uv=False)
        assert int(np.sum(s > 1e-8)) == len(claimed)
        # image contains the claimed basis
        assert np.max(np.abs(S @ claimed.T - claimed.T)) < 1e-8


def _haar_pairs(d):
    # the full SO(2) average is the projector onto A + I, not onto I
    if d == 2:
        return [("AI", phi_AI), ("B", phi_B)]
    return [("I", phi_I), ("STAB", lambda M: phi_stabilizer(M, 1)), ("B", phi_B), ("A", phi_A)]


@pytest.mark.parametrize("d", [2, 4, 5, 6])
def test_sign_paired_haar_vs_closed_form(d, rng):
    """Sign-paired draws make the estimator exact on A+B+I inputs."""
    worst = 0.0
    for _ in range(100):
        M = random_membership(rng, d)
        for kind, closed in _haar_pairs(d):
            worst = max(worst, np.max(np.abs(haar_average(M, kind, 10_000, 11) - closed(M))))
    assert worst < 1e-12


@pytest.mark.parametrize("d", [4, 5])
def test_plain_haar_statistical(d, rng):
    """Unsymmetrized i.i.d. Haar estimate: error at the Monte-Carlo scale."""
    N = 10_000
    M = random_membership(rng, d)
    for kind, closed in _haar_pairs(d):
        err = np.max(np.abs(haar_average(M, kind, N, 1, symmetrize=False) - closed(M)))
        assert err < 6 * np.linalg.norm(M) / np.sqrt(N)


def test_d2_so2_average_is_AI(rng):
    M = random_membership(rng, 2)
    assert np.max(np.abs(so2_average(M) - phi_AI(M))) < 1e-12
    assert np.max(np.abs(haar_average(M, "I", 2000, 0) - phi_AI(M))) < 1e-12


@pytest.mark.parametrize("d", [3, 4, 5, 6, 7])
def test_torus_matches_psi(d, rng):
    for _ in range(20):
        M = random_membership(rng, d)
        assert np.max(np.abs(torus_average(M) - phi_prime(M))) < 1e-12


def test_tensor_projector(rng):
    d = 4
    sm = standard_matrices(d)
    specs = [ProjectorSpec("A", d), ProjectorSpec("B", d), ProjectorSpec("I", d)]
    Mx = np.kron(np.kron(sm.A[0] * 0.7 + sm.A[1] * 0.2, sm.B), np.eye(5)).astype(float)
    assert np.allclose(tensor_projector(specs, Mx), Mx, atol=1e-12)
    X, Z = random_membership(rng, d, 3), random_membership(rng, d, 3)
    PX = tensor_projector(specs, X)
    assert np.max(np.abs(tensor_projector(specs, PX) - PX)) < 1e-9
    assert abs(hs_inner(PX, Z) - hs_inner(X, tensor_projector(specs, Z))) < 1e-9
    with pytest.raises(ValueError):
        tensor_projector(specs[:2], X)
