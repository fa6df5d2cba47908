import numpy as np
import pytest

from gbitlab.analyzer import (
    AnalysisOptions,
    LocalGeneratorError,
    analyze,
    canonicalize,
    expand_standard,
    find_nonlocal_sector,
    project_candidate,
    spot_check,
    violation_search,
)
from gbitlab.bloch import haar_rotation_matrix, lift_rotation
from gbitlab.certificates import verify_certificate
from gbitlab.constraints import SECOND_DIAG, SECOND_FLIP, first_order_null_space, local_algebra_basis, n1_projection
from gbitlab.quantum_oracle import adjoint_generator, pauli_basis
from gbitlab.report import dumps, report_to_dict
from gbitlab.subspaces import A_matrix, B_matrix, blockform, d2_matrices, standard_matrices
from gbitlab.tensor import conjugate_local, hs_inner, kron_all

AP = d2_matrices()
A1, B0, B1 = (m.astype(float) for m in (AP.A1, AP.B0, AP.B1))
SM4 = standard_matrices(4)
A4 = [m.astype(float) for m in SM4.A]
B4 = SM4.B.astype(float)
QUICK = AnalysisOptions(random_budget=20_000, spot_checks=2_000)


def test_find_nonlocal_sector_examples():
    assert str(find_nonlocal_sector(np.kron(A1, B0), 2, 2)) == "AB"
    X = np.kron(A4[0], np.eye(5)) + 0.5 * np.kron(A4[0], B4)
    assert str(find_nonlocal_sector(X, 4, 2)) == "AB"
    with pytest.raises(LocalGeneratorError):
        find_nonlocal_sector(local_algebra_basis(2, 2).matrix(1), 2, 2)


def test_find_nonlocal_sector_tie_break():
    # equal norms in AB and BA: the lexicographically smaller string wins
    X = np.kron(A1, B0) + np.kron(B0, A1)
    assert str(find_nonlocal_sector(X, 2, 2)) == "AB"


def test_canonicalize_already_canonical():
    X = np.kron(A4[0], B4)
    c = canonicalize(X, "AB", 4)
    assert all(np.allclose(R, np.eye(4), atol=1e-12) for R in c.site_rotations)
    assert np.allclose(c.M, X, atol=1e-12)
    assert abs(c.overlap - hs_inner(X, X)) < 1e-12


def test_canonicalize_random_product(rng):
    for d in (4, 5):
        G = rng.standard_normal((d, d))
        Abar = G - G.T
        b = rng.standard_normal(d)
        b /= np.linalg.norm(b)
        X = np.kron(A_matrix(Abar), B_matrix(b))
        c = canonicalize(X, "AB", d)
        # B factor aligned with e_1, A factor block canonical
        Rb = c.site_rotations[1]
        assert np.allclose(Rb @ b, np.eye(d)[0], atol=1e-12)
        Ra = c.site_rotations[0]
        core = Ra @ Abar @ Ra.T
        lam = [core[d % 2 + 2 * j, d % 2 + 2 * j + 1] for j in range(d // 2)]
        assert np.allclose(core, blockform(lam, d), atol=1e-9)
        assert abs(c.overlap - hs_inner(X, X)) < 1e-9 * hs_inner(X, X)
        # pairing is invariant under the conjugation
        T = [lift_rotation(R) for R in c.site_rotations]
        back = conjugate_local(c.M, [t.T for t in T])
        assert abs(hs_inner(c.X2, c.M) - hs_inner(X, back)) < 1e-10


@pytest.mark.parametrize("d,n", [(2, 2), (4, 2), (3, 2)])
def test_conjugation_safety(d, n, rng):
    space = first_order_null_space(d, n)
    for i in range(0, space.dim, max(1, space.dim // 8)):
        X = space.matrix(i)
        T = [lift_rotation(haar_rotation_matrix(d, rng)) for _ in range(n)]
        Xc = conjugate_local(X, T)
        assert np.linalg.norm(Xc - n1_projection(Xc, d, n)) < 1e-8


@pytest.mark.parametrize("d,n", [(2, 2), (4, 2), (5, 2)])
def test_projection_keeps_overlap(d, n):
    space = first_order_null_space(d, n)
    gloc = local_algebra_basis(d, n).vectors
    for i in range(0, space.dim, max(1, space.dim // 10)):
        v = space.vectors[i]
        v = v - gloc.T @ (gloc @ v)
        if np.linalg.norm(v) < 1e-6:
            continue
        X = v.reshape(space.D, space.D)
        x = find_nonlocal_sector(X, d, n)
        c = canonicalize(X, x, d)
        Y = project_candidate(c.X2, x, d, c.M)
        assert abs(hs_inner(Y, c.M) - hs_inner(c.X2, c.M)) < 1e-9 * max(1.0, abs(c.overlap))
        assert np.linalg.norm(Y) > 0


def test_projection_fixes_M():
    for d, X in [(4, np.kron(np.kron(A4[0], A4[1]), B4)), (2, np.kron(A1, B0))]:
        x = "AAB" if d == 4 else "AB"
        c = canonicalize(X, x, d)
        assert np.allclose(project_candidate(c.M, x, d), c.M, atol=1e-12)


def test_d2_projection_has_no_all_identity_terms(rng):
    space = first_order_null_space(2, 2)
    for i in range(space.dim):
        X = space.matrix(i)
        Y = project_candidate(X, "AB", 2)
        coeffs = expand_standard(Y, "AB", 2)
        # A^(0) (x) B_k summands would be pure I (x) B pieces: absent
        assert max(abs(coeffs[(0, 0)]), abs(coeffs[(0, 1)])) < 1e-12


def test_hand_example_certificate():
    Y = np.kron(A1, B0)
    out = violation_search(Y, "AB", 2, 2)
    s = out.sample
    assert s.kind == SECOND_FLIP and s.k == 2
    assert s.preps[0] == (1.0, 0.0) and s.meas[0] == (1.0, 0.0) and s.preps[1] == (0.0, 1.0)
    assert out.value == -1.0


def test_even_nA_recipe():
    Y = np.kron(np.kron(A4[0], A4[0]), B4)
    out = violation_search(Y, "AAB", 4, 3)
    assert out.sample.kind == SECOND_DIAG
    assert out.sample.preps[2] == (1.0, 0.0, 0.0, 0.0)
    assert out.value < 0 and out.sample.evaluate(Y) > 0


@pytest.mark.parametrize("nA", [1, 2, 3])
def test_parity_law(nA, rng):
    d = 4
    Y = kron_all([A4[0]] * nA + [B4])
    Y2 = Y @ Y
    for _ in range(20):
        # unit vectors in Im(P_1) for A slots, e_1 for the B slot
        vs = []
        for _ in range(nA):
            t = rng.uniform(0, 2 * np.pi)
            vs.append(np.array([np.cos(t), np.sin(t), 0.0, 0.0]))
        vs.append(np.eye(d)[0])
        v = kron_all([np.concatenate([[1.0], a]) for a in vs])
        val = v @ Y2 @ v
        assert np.sign(val) == (-1) ** nA and abs(val) > 0.5


def test_quantum_generator_survives():
    P = pauli_basis(2)
    X = adjoint_generator(0.5 * P[5]).matrix  # sigma_x (x) sigma_x / 2
    x = find_nonlocal_sector(X, 3, 2)
    out = violation_search(X, x, 3, 2, options=AnalysisOptions(random_budget=100_000))
    assert out.sample is None and out.value > -1e-8
    assert out.trials >= 100_000
    assert spot_check(X, 3, 2, 10_000, 1) > -1e-10


@pytest.mark.parametrize("d,n,nonlocal_dim", [(2, 2, 5), (4, 2, 84), (5, 2, 200)])
def test_analyze_excludes(d, n, nonlocal_dim):
    rep = analyze(d, n, QUICK)
    assert rep.conclusion == "g = g_loc"
    assert rep.nonlocal_dim == nonlocal_dim and rep.counts["certified"] == nonlocal_dim
    assert rep.gloc_dim == n * d * (d - 1) // 2
    assert rep.null_dim == rep.gloc_dim + rep.nonlocal_dim
    for c in rep.certificates:
        res = verify_certificate(c)
        assert res.ok, res.message


def test_analyze_d3_survivors():
    rep = analyze(3, 2, QUICK)
    assert rep.conclusion == "survivors present, all validated"
    assert rep.counts["unresolved"] == 0
    assert rep.survivor_space_dim >= 15 + 6
    assert rep.checks["oracle_membership_max"] < 1e-7
    assert all(verify_certificate(c).ok for c in rep.certificates)


def test_analyze_deterministic():
    a = dumps(report_to_dict(analyze(2, 2, QUICK)))
    b = dumps(report_to_dict(analyze(2, 2, QUICK)))
    assert a == b
    t = dumps(report_to_dict(analyze(2, 2, AnalysisOptions(random_budget=20_000, spot_checks=2_000, threads=3))))
    assert t == a


def test_analyze_rejects_classical_bit():
    with pytest.raises(Exception, match="classical bit"):
        analyze(1, 2)
