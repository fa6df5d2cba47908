"""Group-averaging projectors on A (+) B (+) I and their tensor products.

Closed forms are what the pipeline uses. The ``haar_*`` / ``torus_*``
functions compute the same averages numerically from sampled (or
quadrature) group elements and serve as independent cross-checks.

All projector statements hold on the membership space A (+) B (+) I only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .bloch import haar_rotation_matrix, lift_rotation
from .subspaces import (
    block_offset,
    check_membership,
    d2_matrices,
    num_blocks,
    standard_matrices,
)
from .tensor import apply_site_maps, hs_inner, superoperator


class ProjectorUnavailable(ValueError):
    """The requested group average is not the claimed projector for this d."""


def _check(M, d: int | None = None) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    if d is not None and M.shape[0] != d + 1:
        raise ValueError(f"expected a {d + 1}x{d + 1} matrix")
    check_membership(M, M.shape[0] - 1, 1)
    return M


def phi_I(M) -> np.ndarray:
    """Average over SO(d): projector onto multiples of the identity."""
    M = _check(M)
    dim = M.shape[0]
    return np.trace(M) / dim * np.eye(dim)


def _B_e(d: int, j: int) -> np.ndarray:
    B = np.zeros((d + 1, d + 1))
    B[0, j] = B[j, 0] = 1.0
    return B


def phi_stabilizer(M, j: int = 1) -> np.ndarray:
    """Average over the stabilizer of e_j: projector onto span(B_{e_j}) (+) I (d >= 4)."""
    M = _check(M)
    d = M.shape[0] - 1
    if d == 3:
        raise ProjectorUnavailable(
            "d = 3: the stabilizer SO(2) acts reducibly on R^2, so its average is not "
            "the projector onto span(B) + I"
        )
    if d == 2:
        raise ProjectorUnavailable("d = 2: use phi_AI (the stabilizer of e_j in SO(2) is trivial)")
    if d < 2:
        raise ProjectorUnavailable("continuous-group projectors need d >= 2")
    if not 1 <= j <= d:
        raise ValueError(f"j must lie in 1..{d}")
    B = _B_e(d, j)
    return phi_I(M) + hs_inner(M, B) / hs_inner(B, B) * B


def phi_B(M) -> np.ndarray:
    """Projector onto span(B_{e_1}) for d >= 4; onto all of B for d = 2."""
    M = _check(M)
    d = M.shape[0] - 1
    if d == 2:
        return M - phi_AI(M)
    return phi_stabilizer(M, 1) - phi_I(M)


def psi_2x2(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    s = m[0, 0] + m[1, 1]
    a = m[0, 1] - m[1, 0]
    return 0.5 * np.array([[s, a], [-a, s]])


def phi_prime(M) -> np.ndarray:
    """Torus average: keep the leading y x y block, Psi on each diagonal 2x2 block."""
    M = _check(M)
    d = M.shape[0] - 1
    y, z = block_offset(d), num_blocks(d)
    out = np.zeros_like(M)
    out[:y, :y] = M[:y, :y]
    for j in range(z):
        s = y + 2 * j
        out[s : s + 2, s : s + 2] = psi_2x2(M[s : s + 2, s : s + 2])
    return out


def phi_A(M) -> np.ndarray:
    """Projector onto A_blocks = span{A_1, ..., A_z} (d >= 4)."""
    M = _check(M)
    d = M.shape[0] - 1
    if d < 4:
        raise ProjectorUnavailable("phi_A is built from phi_B and needs d >= 4")
    out = phi_prime(M) - phi_I(M)
    if d % 2 == 1:
        out = out - phi_B(M)
    return out


def phi_AI(M) -> np.ndarray:
    """d = 2 only: SO(2) average, the projector onto A (+) I."""
    M = _check(M)
    if M.shape[0] != 3:
        raise ProjectorUnavailable("phi_AI is defined for d = 2 only")
    A1 = d2_matrices().A1.astype(float)
    return phi_I(M) + hs_inner(M, A1) / 2.0 * A1


_CLOSED_FORMS = {
    "I": phi_I,
    "B": phi_B,
    "PRIME": phi_prime,
    "A": phi_A,
    "AI": phi_AI,
}


@dataclass(frozen=True)
class ProjectorSpec:
    """Which average to apply at one site.

    ``kind`` is one of ``I``, ``STAB`` (with ``j``), ``B``, ``PRIME``, ``A``,
    ``AI``. ``mode`` is ``closed_form`` or ``haar_numeric``; the latter is
    for cross-checks only.
    """

    kind: str
    d: int
    j: int = 1
    mode: str = "closed_form"
    samples: int = 10_000
    seed: int = 0

    def apply(self, M) -> np.ndarray:
        if self.mode == "closed_form":
            if self.kind == "STAB":
                return phi_stabilizer(M, self.j)
            return _CLOSED_FORMS[self.kind](M)
        if self.mode == "haar_numeric":
            return haar_average(M, self.kind, self.samples, self.seed, j=self.j)
        raise ValueError(f"unknown mode {self.mode!r}")

    def superoperator(self) -> np.ndarray:
        if self.mode == "closed_form":
            return _closed_superoperator(self.kind, self.d, self.j)
        return superoperator(lambda E: self.apply(_membership_part(E)), self.d + 1)


def _membership_part(E: np.ndarray) -> np.ndarray:
    from .subspaces import project_A, project_B, project_I

    return project_A(E) + project_B(E) + project_I(E)


@lru_cache(maxsize=None)
def _closed_superoperator(kind: str, d: int, j: int = 1) -> np.ndarray:
    """Closed-form projector composed with the orthogonal projection onto A+B+I.

    Composing with the membership projection makes the matrix well defined on
    all of R^{(d+1)x(d+1)}; on the membership space it is the projector itself.
    """
    spec = ProjectorSpec(kind, d, j)
    S = superoperator(lambda E: spec.apply(_membership_part(E)), d + 1)
    S.setflags(write=False)
    return S


def tensor_projector(per_site: Sequence[ProjectorSpec], X, check: bool = True) -> np.ndarray:
    """Apply one projector per site (the tensor product of the site projectors)."""
    M = np.asarray(X, dtype=float)
    specs = list(per_site)
    if not specs:
        raise ValueError("need at least one site projector")
    d = specs[0].d
    n = len(specs)
    if M.shape != ((d + 1) ** n,) * 2:
        raise ValueError(f"site count {n} does not match operator of shape {M.shape}")
    if check:
        check_membership(M, d, n)
    return apply_site_maps(M, [s.superoperator() for s in specs], d + 1)


# -- numerical group averages ------------------------------------------------


def _sign_subgroup(size: int) -> list[np.ndarray]:
    """Diagonal sign matrices of determinant +1 in dimension ``size``."""
    return [np.diag(s) for s in itertools.product((1.0, -1.0), repeat=size) if np.prod(s) > 0]


@lru_cache(maxsize=32)
def _haar_sample(kind: str, d: int, samples: int, seed: int, j: int, symmetrize: bool) -> np.ndarray:
    """Stack of lifted group elements used by ``haar_average`` (independent of M)."""
    rng = np.random.default_rng(seed)
    if kind in ("I", "AI"):
        group_dim = d
        embed = lambda R: R  # noqa: E731
    elif kind == "STAB":
        group_dim = d - 1
        others = [i for i in range(d) if i != j - 1]

        def embed(S):
            R = np.eye(d)
            R[np.ix_(others, others)] = S
            return R
    else:
        raise ValueError(f"unknown projector kind {kind!r}")
    signs = _sign_subgroup(group_dim) if symmetrize else [np.eye(group_dim)]
    draws = max(1, samples // len(signs))
    base = [haar_rotation_matrix(group_dim, rng) for _ in range(draws)]
    Rs = np.array([lift_rotation(embed(R0 @ S)) for R0 in base for S in signs])
    Rs.setflags(write=False)
    return Rs


def haar_average(M, kind: str, samples: int, seed: int, j: int = 1, symmetrize: bool = True) -> np.ndarray:
    """Monte-Carlo average of R M R^{-1} over the group behind ``kind``.

    ``kind`` selects SO(d) (``I`` and, for d = 2, ``AI``), the stabilizer of
    e_j (``STAB``), or the block torus (``PRIME``). ``B`` and ``A`` are the
    corresponding differences. With ``symmetrize`` each Haar draw ``R`` is
    paired with ``R S`` for every diagonal sign matrix ``S`` of the subgroup;
    every term is still a Haar-distributed group element (antithetic
    sampling), ``samples`` counts all of them.
    """
    M = np.asarray(M, dtype=float)
    d = M.shape[0] - 1
    if kind == "B":
        if d == 2:
            return M - haar_average(M, "AI", samples, seed, symmetrize=symmetrize)
        return haar_average(M, "STAB", samples, seed, j=1, symmetrize=symmetrize) - haar_average(
            M, "I", samples, seed + 1, symmetrize=symmetrize
        )
    if kind == "A":
        out = torus_average(M) - haar_average(M, "I", samples, seed, symmetrize=symmetrize)
        if d % 2 == 1:
            out = out - haar_average(M, "B", samples, seed + 2, symmetrize=symmetrize)
        return out
    if kind == "PRIME":
        return torus_average(M)
    Rs = _haar_sample(kind, d, samples, seed, j, symmetrize)
    return np.einsum("kij,jl,kml->im", Rs, M, Rs, optimize=True) / len(Rs)


def _theta_rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]])


def torus_average(M, points: int = 8) -> np.ndarray:
    """Average over the block torus by equispaced quadrature (exact for points >= 3)."""
    M = np.asarray(M, dtype=float)
    d = M.shape[0] - 1
    y, z = block_offset(d), num_blocks(d)
    thetas = 2 * np.pi * np.arange(points) / points
    out = M.copy()
    # the torus is a product group: average one block angle at a time
    for j in range(z):
        s = y + 2 * j
        acc = np.zeros_like(out)
        for th in thetas:
            Rh = np.eye(d + 1)
            Rh[s : s + 2, s : s + 2] = _theta_rotation(th)
            acc += Rh @ out @ Rh.T
        out = acc / points
    return out


def so2_average(M, points: int = 8) -> np.ndarray:
    """d = 2 SO(2) average by equispaced quadrature."""
    M = np.asarray(M, dtype=float)
    if M.shape != (3, 3):
        raise ValueError("so2_average expects d = 2")
    acc = np.zeros_like(M)
    for th in 2 * np.pi * np.arange(points) / points:
        Rh = lift_rotation(_theta_rotation(th))
        acc += Rh @ M @ Rh.T
    return acc / points


def projector_image_basis(kind: str, d: int) -> list[np.ndarray]:
    """Expected image of each projector, for rank checks."""
    sm = standard_matrices(d) if d >= 2 else None
    if kind == "I":
        return [np.eye(d + 1)]
    if kind == "B":
        if d == 2:
            a = d2_matrices()
            return [a.B0.astype(float), a.B1.astype(float)]
        return [sm.B.astype(float)]
    if kind == "A":
        return [a.astype(float) for a in sm.A]
    if kind == "AI":
        return [np.eye(3), d2_matrices().A1.astype(float)]
    raise ValueError(kind)
