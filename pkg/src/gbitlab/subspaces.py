"""Matrix subspaces A, B, I of (d+1)x(d+1) matrices and the sectors they span.

* ``A``: zero first row/column, antisymmetric lower d x d block (so(d)).
* ``B``: ``B_b`` with ``b`` in the first row and column, zero elsewhere.
* ``I``: multiples of the identity.

The three are pairwise Hilbert-Schmidt orthogonal. A sector string
``x in {A,B,I}^n`` labels the tensor product space ``S_x``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
import scipy.linalg

from .tensor import apply_site_maps, superoperator

LABELS = ("A", "B", "I")
MEMBERSHIP_RTOL = 1e-8


class MembershipError(ValueError):
    """Operator lies outside (A+B+I)^{(x)n} beyond tolerance."""


# -- single-site elements -------------------------------------------------


def A_matrix(Abar) -> np.ndarray:
    Ab = np.asarray(Abar, dtype=float)
    d = Ab.shape[0]
    out = np.zeros((d + 1, d + 1))
    out[1:, 1:] = Ab
    return out


def B_matrix(b) -> np.ndarray:
    bv = np.asarray(b, dtype=float)
    d = bv.size
    out = np.zeros((d + 1, d + 1))
    out[0, 1:] = bv
    out[1:, 0] = bv
    return out


def project_A(M: np.ndarray) -> np.ndarray:
    out = np.zeros_like(M, dtype=float)
    L = M[1:, 1:]
    out[1:, 1:] = 0.5 * (L - L.T)
    return out


def project_B(M: np.ndarray) -> np.ndarray:
    return B_matrix(0.5 * (M[0, 1:] + M[1:, 0]))


def project_I(M: np.ndarray) -> np.ndarray:
    dim = M.shape[0]
    return np.trace(M) / dim * np.eye(dim)


_SITE_PROJECTORS = {"A": project_A, "B": project_B, "I": project_I}


@lru_cache(maxsize=None)
def site_superoperator(label: str, d: int) -> np.ndarray:
    """Orthogonal projector onto one of A, B, I (or their sum, e.g. ``"ABI"``)."""
    S = np.zeros(((d + 1) ** 2, (d + 1) ** 2))
    for ch in label:
        S = S + superoperator(_SITE_PROJECTORS[ch], d + 1)
    S.setflags(write=False)
    return S


@dataclass(frozen=True)
class SubspaceBasis:
    """HS-orthonormal basis of A, B or I for a given d."""

    d: int
    label: str
    matrices: tuple

    def __len__(self):
        return len(self.matrices)

    def stack(self) -> np.ndarray:
        return np.array(self.matrices)


@lru_cache(maxsize=None)
def subspace_basis(label: str, d: int) -> SubspaceBasis:
    if label == "A":
        mats = []
        for i, j in itertools.combinations(range(d), 2):
            Ab = np.zeros((d, d))
            Ab[i, j], Ab[j, i] = 1.0, -1.0
            mats.append(A_matrix(Ab) / np.sqrt(2.0))
    elif label == "B":
        mats = [B_matrix(np.eye(d)[i]) / np.sqrt(2.0) for i in range(d)]
    elif label == "I":
        mats = [np.eye(d + 1) / np.sqrt(d + 1.0)]
    else:
        raise ValueError(f"unknown subspace label {label!r}")
    for m in mats:
        m.setflags(write=False)
    return SubspaceBasis(d, label, tuple(mats))


def antisymmetric_from_coords(coords, d: int) -> np.ndarray:
    """Inverse of the A-basis coordinates: the d x d antisymmetric block."""
    Ab = np.zeros((d, d))
    for c, (i, j) in zip(coords, itertools.combinations(range(d), 2)):
        Ab[i, j] += c / np.sqrt(2.0)
        Ab[j, i] -= c / np.sqrt(2.0)
    return Ab


# -- sector strings ---------------------------------------------------------


@dataclass(frozen=True)
class SectorString:
    symbols: str

    def __post_init__(self):
        s = "".join(self.symbols).upper()
        if not s or any(ch not in LABELS for ch in s):
            raise ValueError(f"invalid sector string {self.symbols!r}")
        object.__setattr__(self, "symbols", s)

    def __str__(self):
        return self.symbols

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    @property
    def n(self) -> int:
        return len(self.symbols)

    @property
    def n_A(self) -> int:
        return self.symbols.count("A")

    @property
    def n_B(self) -> int:
        return self.symbols.count("B")

    @property
    def n_I(self) -> int:
        return self.symbols.count("I")

    @property
    def n_AI(self) -> int:
        return self.n_A + self.n_I

    def sites(self, label: str) -> list[int]:
        return [i for i, ch in enumerate(self.symbols) if ch == label]

    @property
    def is_local(self) -> bool:
        """Exactly one A and otherwise I: a piece of the local algebra."""
        return self.n_A == 1 and self.n_B == 0

    @property
    def is_identity(self) -> bool:
        return self.n_I == self.n

    def canonical_order(self, d: int) -> tuple[int, ...]:
        """Virtual site permutation bringing x to A..B..I (A..I..B when d = 2)."""
        rank = {"A": 0, "B": 1, "I": 2} if d != 2 else {"A": 0, "I": 1, "B": 2}
        return tuple(sorted(range(self.n), key=lambda i: (rank[self.symbols[i]], i)))


def all_sectors(n: int) -> list[SectorString]:
    return [SectorString("".join(p)) for p in itertools.product(LABELS, repeat=n)]


def _sector(x) -> SectorString:
    return x if isinstance(x, SectorString) else SectorString(x)


def membership_residual(X: np.ndarray, d: int, n: int) -> float:
    """HS norm of the part of X outside (A+B+I)^{(x)n}."""
    P = apply_site_maps(X, [site_superoperator("ABI", d)] * n, d + 1)
    return float(np.linalg.norm(X - P))


def check_membership(X: np.ndarray, d: int, n: int, rtol: float = MEMBERSHIP_RTOL) -> None:
    res = membership_residual(X, d, n)
    scale = np.linalg.norm(X)
    if res > rtol * max(scale, 1e-300) and res > 1e-14:
        raise MembershipError(f"operator leaves (A+B+I)^n: residual {res:.3e} vs norm {scale:.3e}")


def sector_project(X, x, d: int, check: bool = True) -> np.ndarray:
    """Orthogonal projection of X onto S_x."""
    xs = _sector(x)
    M = np.asarray(X, dtype=float)
    if check:
        check_membership(M, d, xs.n)
    return apply_site_maps(M, [site_superoperator(ch, d) for ch in xs], d + 1)


def sector_norms(X: np.ndarray, d: int, n: int) -> dict[str, float]:
    """HS norm of every sector component, keyed by sector string."""
    M = np.asarray(X, dtype=float)
    out = {}
    # peel one site at a time, sharing partial projections across prefixes
    parts = {"": M}
    for k in range(n):
        nxt = {}
        for prefix, P in parts.items():
            for ch in LABELS:
                maps = [None] * n
                maps[k] = site_superoperator(ch, d)
                nxt[prefix + ch] = apply_site_maps(P, maps, d + 1)
        parts = nxt
    for key, P in parts.items():
        out[key] = float(np.linalg.norm(P))
    return out


def sector_coordinates(X: np.ndarray, x, d: int) -> np.ndarray:
    """Coefficients of the S_x component in the product of site bases.

    Returns a tensor of shape ``(dim S_{x_1}, ..., dim S_{x_n})``.
    """
    xs = _sector(x)
    n = xs.n
    T = np.asarray(X, dtype=float).reshape((d + 1,) * (2 * n))
    # contract site k's (beta_k, alpha_k) with the basis, leaving one axis per site
    for k, ch in enumerate(xs):
        basis = subspace_basis(ch, d).stack()  # (r, d+1, d+1)
        # after k contractions the remaining beta axes sit at k..n-1 and alpha at n-k+... track positions
        nb = n - k  # remaining beta axes at positions [k, ..., n-1], alphas follow
        T = np.tensordot(T, basis, axes=([k, k + nb], [1, 2]))
        T = np.moveaxis(T, -1, k)
    return T


def product_operator(site_matrices: Sequence[np.ndarray]) -> np.ndarray:
    from .tensor import kron_all

    return kron_all([np.asarray(m, dtype=float) for m in site_matrices])


# -- standard elements -------------------------------------------------------


SIGMA = np.array([[0.0, 1.0], [-1.0, 0.0]])


def block_offset(d: int) -> int:
    """``y``: size of the leading block (1 for even d, 2 for odd d)."""
    return 1 if d % 2 == 0 else 2


def num_blocks(d: int) -> int:
    """``z``: number of 2x2 rotation blocks in R^{d+1} after the leading block."""
    return d // 2


@dataclass(frozen=True)
class StandardMatrices:
    d: int
    A: tuple  # A_1 .. A_z
    B: np.ndarray  # B_{e_1}
    P: tuple  # P_1 .. P_z
    P_B: np.ndarray
    sigma: np.ndarray


def standard_matrices(d: int) -> StandardMatrices:
    """A_j, B = B_{e_1}, P_j, P_B as integer-valued (d+1)x(d+1) arrays."""
    if d < 2:
        raise ValueError("standard matrices need d >= 2")
    y, z = block_offset(d), num_blocks(d)
    A, P = [], []
    for j in range(z):
        s = y + 2 * j
        a = np.zeros((d + 1, d + 1), dtype=np.int64)
        a[s : s + 2, s : s + 2] = SIGMA.astype(np.int64)
        p = np.zeros((d + 1, d + 1), dtype=np.int64)
        p[s, s] = p[s + 1, s + 1] = 1
        A.append(a)
        P.append(p)
    B = np.zeros((d + 1, d + 1), dtype=np.int64)
    B[0, 1] = B[1, 0] = 1
    P_B = np.zeros((d + 1, d + 1), dtype=np.int64)
    P_B[0, 0] = P_B[1, 1] = 1
    return StandardMatrices(d, tuple(A), B, tuple(P), P_B, SIGMA.astype(np.int64))


@dataclass(frozen=True)
class D2Matrices:
    A0: np.ndarray
    A1: np.ndarray
    B0: np.ndarray
    B1: np.ndarray


def d2_matrices() -> D2Matrices:
    """The four 3x3 matrices used for the d = 2 expansion."""
    A0 = np.eye(3, dtype=np.int64)
    A1 = np.array([[0, 0, 0], [0, 0, 1], [0, -1, 0]], dtype=np.int64)
    B0 = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=np.int64)
    B1 = np.array([[0, 0, 1], [0, 0, 0], [1, 0, 0]], dtype=np.int64)
    return D2Matrices(A0, A1, B0, B1)


# -- antisymmetric canonical form ----------------------------------------------


def blockform(lambdas: Sequence[float], d: int) -> np.ndarray:
    """``lambda_1 sigma (+) ...`` in R^{d x d}; odd d gets a leading 1x1 zero."""
    out = np.zeros((d, d))
    off = d % 2
    for j, lam in enumerate(lambdas):
        s = off + 2 * j
        out[s, s + 1] = lam
        out[s + 1, s] = -lam
    return out


@dataclass(frozen=True)
class CanonicalForm:
    R: np.ndarray
    lambdas: np.ndarray

    @property
    def d(self) -> int:
        return self.R.shape[0]

    def block(self) -> np.ndarray:
        return blockform(self.lambdas, self.d)


def _already_canonical(Ab: np.ndarray, tol: float) -> np.ndarray | None:
    d = Ab.shape[0]
    off = d % 2
    lam = np.array([Ab[off + 2 * j, off + 2 * j + 1] for j in range(d // 2)])
    if np.any(lam < 0) or np.any(np.diff(lam) > 0):
        return None
    if np.max(np.abs(Ab - blockform(lam, d)), initial=0.0) > tol:
        return None
    return lam


def antisymmetric_canonical_form(Abar, tol: float = 1e-10) -> CanonicalForm:
    """R in SO(d) with ``R Abar R^T`` in 2x2 rotation-block normal form.

    Blocks are sorted by decreasing lambda (stable in Schur order). For even
    d the Pfaffian sign is an SO(d) invariant, so when it is negative and no
    zero block is available the last (smallest) lambda carries the sign.
    """
    Ab = np.asarray(Abar, dtype=float)
    d = Ab.shape[0]
    if Ab.shape != (d, d):
        raise ValueError("expected a square matrix")
    if np.linalg.norm(Ab + Ab.T) >= tol:
        raise ValueError("matrix is not antisymmetric")
    Ab = 0.5 * (Ab - Ab.T)
    scale = max(np.max(np.abs(Ab), initial=0.0), 1e-300)
    lam0 = _already_canonical(Ab, 1e-14 * scale)
    if lam0 is not None:
        return CanonicalForm(np.eye(d), lam0)

    T, Z = scipy.linalg.schur(Ab, output="real")
    blocks, zeros = [], []
    i = 0
    while i < d:
        if i + 1 < d and abs(T[i + 1, i]) > 1e-13 * scale:
            u, w = Z[:, i], Z[:, i + 1]
            mu = float(u @ Ab @ w)
            if mu < 0:
                u, w, mu = w, u, -mu
            blocks.append((mu, u, w))
            i += 2
        else:
            zeros.append(Z[:, i])
            i += 1
    lead = []
    if d % 2 == 1:
        lead = [zeros.pop(0)]
    for k in range(0, len(zeros), 2):
        blocks.append((0.0, zeros[k], zeros[k + 1]))
    order = sorted(range(len(blocks)), key=lambda k: -blocks[k][0])
    blocks = [blocks[k] for k in order]
    rows = list(lead)
    for _, u, w in blocks:
        rows.extend([u, w])
    R = np.array(rows)
    lambdas = np.array([b[0] for b in blocks])
    if np.linalg.det(R) < 0:
        if d % 2 == 1:
            R[0] = -R[0]
        else:
            zero_blocks = [k for k, lam in enumerate(lambdas) if lam == 0.0]
            if zero_blocks:
                k = zero_blocks[-1]
                R[[2 * k, 2 * k + 1]] = R[[2 * k + 1, 2 * k]]
            else:
                R[-1] = -R[-1]
                lambdas[-1] = -lambdas[-1]
    # exact block values from the final frame
    off = d % 2
    lambdas = np.array([R[off + 2 * j] @ Ab @ R[off + 2 * j + 1] for j in range(d // 2)])
    return CanonicalForm(R, lambdas)
