"""The composite space (R^{d+1})^{(x)n} and operators on it.

Index convention (fixed, used by every file format): a multi-index
``(i_1, ..., i_n)`` with ``0 <= i_k <= d`` is encoded row-major, wire 1
slowest, so ``flat = sum_k i_k * (d+1)**(n-k)``. This is exactly the ordering
produced by ``np.kron``. An operator component ``X^{alpha}_{beta}`` (upper =
input, lower = output) is the flat matrix entry ``X[beta, alpha]``, i.e.
``X^{alpha}_{beta} = e_beta^T X e_alpha``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .bloch import DimensionError, _as_components, lift

MAX_DIM = 4096
ORTHO_TOL = 1e-10


class CapacityError(ValueError):
    """Raised when (d+1)^n exceeds the dense-storage cap."""


def check_capacity(d: int, n: int) -> int:
    D = (d + 1) ** n
    if D > MAX_DIM:
        raise CapacityError(f"(d+1)^n = {D} exceeds the dense cap {MAX_DIM} (d={d}, n={n})")
    return D


def encode(idx: Sequence[int], d: int) -> int:
    flat = 0
    for i in idx:
        if not 0 <= i <= d:
            raise IndexError(f"index component {i} outside 0..{d}")
        flat = flat * (d + 1) + int(i)
    return flat


def decode(flat: int, d: int, n: int) -> tuple[int, ...]:
    out = []
    for _ in range(n):
        flat, r = divmod(flat, d + 1)
        out.append(r)
    if flat:
        raise IndexError("flat index out of range")
    return tuple(reversed(out))


def infer_sites(D: int, d: int) -> int:
    n, k = 0, 1
    while k < D:
        k *= d + 1
        n += 1
    if k != D:
        raise DimensionError(f"size {D} is not a power of {d + 1}")
    return n


@dataclass(frozen=True, eq=False)
class OperatorTensor:
    """A square matrix on (R^{d+1})^{(x)n} with multi-index access."""

    d: int
    n: int
    matrix: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=float)
        D = check_capacity(self.d, self.n)
        if M.shape != (D, D):
            raise DimensionError(f"expected a {D}x{D} matrix for d={self.d}, n={self.n}, got {M.shape}")
        object.__setattr__(self, "matrix", M)

    @classmethod
    def from_matrix(cls, matrix, d: int) -> "OperatorTensor":
        M = np.asarray(matrix, dtype=float)
        return cls(d, infer_sites(M.shape[0], d), M)

    def entry(self, upper: Sequence[int], lower: Sequence[int]) -> float:
        """Component ``X^{upper}_{lower}``."""
        if len(upper) != self.n or len(lower) != self.n:
            raise IndexError("multi-index length must equal n")
        return float(self.matrix[encode(lower, self.d), encode(upper, self.d)])

    def as_tensor(self) -> np.ndarray:
        """View with axes ``(beta_1..beta_n, alpha_1..alpha_n)``."""
        return self.matrix.reshape((self.d + 1,) * (2 * self.n))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    def __matmul__(self, other):
        return OperatorTensor(self.d, self.n, self.matrix @ np.asarray(other))


@dataclass(frozen=True, eq=False)
class ProductLift:
    """The lifted product vector v(a_1, ..., a_n)."""

    d: int
    n: int
    vector: np.ndarray
    factors: tuple = ()

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.vector, dtype=dtype)


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, mats)


def product_lift(factors) -> ProductLift:
    """Kronecker product of lifted vectors, wire 1 slowest."""
    comps = [_as_components(a) for a in factors]
    if not comps:
        raise ValueError("need at least one factor")
    d = comps[0].size
    if any(c.size != d for c in comps):
        raise DimensionError("all factors must share the Bloch dimension")
    vec = kron_all([lift(c) for c in comps])
    return ProductLift(d, len(comps), vec, tuple(tuple(c) for c in comps))


def _matrix(X) -> np.ndarray:
    return X.matrix if isinstance(X, OperatorTensor) else np.asarray(X, dtype=float)


def joint_probability(G, preps, meas) -> float:
    """Raw value ``2^{-n} v(meas)^T G v(preps)``; range is the caller's concern."""
    M = _matrix(G)
    if len(preps) != len(meas):
        raise DimensionError("preparation and measurement lists differ in length")
    vin = product_lift(preps).vector
    vout = product_lift(meas).vector
    if M.shape != (vin.size, vin.size):
        raise DimensionError(f"operator of shape {M.shape} does not act on size {vin.size}")
    return float(vout @ M @ vin) / 2.0 ** len(preps)


def hs_inner(X, Y) -> float:
    """Hilbert-Schmidt inner product tr(X^T Y)."""
    A, B = _matrix(X), _matrix(Y)
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch {A.shape} vs {B.shape}")
    return float(np.vdot(A, B))


def hs_norm(X) -> float:
    return float(np.linalg.norm(_matrix(X)))


def conjugate_local(X, site_maps: Sequence[np.ndarray]):
    """``T X T^T`` with ``T`` the Kronecker product of orthogonal site maps."""
    maps = [np.asarray(m, dtype=float) for m in site_maps]
    for m in maps:
        if np.max(np.abs(m.T @ m - np.eye(m.shape[0]))) > ORTHO_TOL:
            raise ValueError("site map is not orthogonal")
    M = _matrix(X)
    dim = maps[0].shape[0]
    out = apply_site_maps(M, [np.kron(m, m) for m in maps], dim)
    if isinstance(X, OperatorTensor):
        return OperatorTensor(X.d, X.n, out)
    return out


def apply_site_maps(X: np.ndarray, supers: Sequence[np.ndarray | None], dim: int) -> np.ndarray:
    """Apply one linear map per site to the operator ``X``.

    ``supers[k]`` acts on the row-major vectorization of site k's
    ``(beta_k, alpha_k)`` matrix slot: for a product operator
    ``kron(M_1, ..., M_n)`` the result is ``kron(S_1 vec M_1, ...)``.
    ``None`` leaves a site untouched. ``kron(m, m)`` realizes ``M -> m M m^T``.
    """
    n = len(supers)
    D = dim**n
    M = np.asarray(X, dtype=float)
    lead = M.shape[:-2]
    T = M.reshape(lead + (dim,) * (2 * n))
    nl = len(lead)
    for k, S in enumerate(supers):
        if S is None:
            continue
        S4 = np.asarray(S).reshape(dim, dim, dim, dim)
        # contract (beta_k, alpha_k) with the input pair of S
        T = np.tensordot(T, S4, axes=([nl + k, nl + n + k], [2, 3]))
        # new axes are appended at the end; move them back into place
        T = np.moveaxis(T, [-2, -1], [nl + k, nl + n + k])
    return T.reshape(lead + (D, D))


def superoperator(fn, dim: int) -> np.ndarray:
    """Matrix of a linear map on dim x dim matrices in row-major vec form."""
    S = np.zeros((dim * dim, dim * dim))
    for j in range(dim * dim):
        E = np.zeros(dim * dim)
        E[j] = 1.0
        S[:, j] = np.asarray(fn(E.reshape(dim, dim)), dtype=float).ravel()
    return S
