"""Admissibility constraints on candidate generators and the first-order null space.

For a generator ``X`` of a one-parameter family ``G = exp(eps X)`` acting on
product states, positivity of probabilities gives

* FIRST_FLIP(k):  ``v(b_1..-a_k..b_n)^T X v(a) = 0``
* FIRST_DIAG:     ``v(a)^T X v(a) = 0``
* SECOND_FLIP(k): ``v(b_1..-a_k..b_n)^T X^2 v(a) >= 0``
* SECOND_DIAG:    ``v(a)^T X^2 v(a) <= 0``

SECOND_ZEROPAD(k) is SECOND_FLIP with some non-k slots set to the zero
vector; by linearity in each lifted slot it is an average of unit-vector
instances and inherits the sign.

The first-order system factorizes over sites. Each flip condition only
involves a single slot nontrivially, so the flip null space is ``V^{(x)n}``
with ``V`` the per-site null space, and the diagonal condition becomes a
Kronecker-structured system on the coordinates w.r.t. ``V``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bloch import UNIT_TOL, DimensionError, _as_components, lift
from .subspaces import all_sectors, site_superoperator, subspace_basis
from .tensor import OperatorTensor, apply_site_maps, check_capacity, kron_all

FIRST_FLIP = "FIRST_FLIP"
FIRST_DIAG = "FIRST_DIAG"
SECOND_FLIP = "SECOND_FLIP"
SECOND_DIAG = "SECOND_DIAG"
SECOND_ZEROPAD = "SECOND_ZEROPAD"
KINDS = (FIRST_FLIP, FIRST_DIAG, SECOND_FLIP, SECOND_DIAG, SECOND_ZEROPAD)

SVD_TOL = 1e-9
EXTRA_ROWS = 50
RANK_GAP_FLAG = 10.0


class RankInstability(RuntimeError):
    """Kept and discarded singular values are not separated."""


def _matrix(X) -> np.ndarray:
    return X.matrix if isinstance(X, OperatorTensor) else np.asarray(X, dtype=float)


def _vectors(vs, allow_zero: bool = False, name: str = "vector") -> list[np.ndarray]:
    out = [_as_components(v) for v in vs]
    for v in out:
        nrm = np.linalg.norm(v)
        if allow_zero and nrm == 0.0:
            continue
        if abs(nrm - 1.0) > UNIT_TOL * 10:
            raise ValueError(f"{name} must be unit{' or zero' if allow_zero else ''}, |v| = {nrm!r}")
    return out


def _flipped_lift(preps, meas, k: int) -> np.ndarray:
    n = len(preps)
    if len(meas) != n:
        raise DimensionError("preparation and measurement lists differ in length")
    if not 1 <= k <= n:
        raise IndexError(f"site k={k} outside 1..{n}")
    slots = list(meas)
    slots[k - 1] = -preps[k - 1]
    return kron_all([lift(v) for v in slots])


def _check_size(M: np.ndarray, d: int, n: int) -> None:
    if M.shape != ((d + 1) ** n,) * 2:
        raise DimensionError(f"operator of shape {M.shape} does not match d={d}, n={n}")


def first_order_value(X, preps, meas, k: int) -> float:
    M = _matrix(X)
    a = _vectors(preps, name="preparation")
    b = _vectors(meas, name="measurement")
    _check_size(M, a[0].size, len(a))
    return float(_flipped_lift(a, b, k) @ M @ kron_all([lift(v) for v in a]))


def diagonal_first_order(X, preps) -> float:
    M = _matrix(X)
    a = _vectors(preps, name="preparation")
    _check_size(M, a[0].size, len(a))
    v = kron_all([lift(x) for x in a])
    # only the symmetric part contributes; this makes antisymmetric X give exactly 0
    return float(v @ ((M + M.T) / 2) @ v)


def second_order_flip(X, preps, meas, k: int) -> float:
    M = _matrix(X)
    a = _vectors(preps, name="preparation")
    b = _vectors(meas, name="measurement")
    _check_size(M, a[0].size, len(a))
    v = kron_all([lift(x) for x in a])
    return float(_flipped_lift(a, b, k) @ (M @ (M @ v)))


def second_order_diag(X, preps) -> float:
    M = _matrix(X)
    a = _vectors(preps, name="preparation")
    _check_size(M, a[0].size, len(a))
    v = kron_all([lift(x) for x in a])
    w = M @ v
    # v^T X^2 v = (X^T v) . (X v)
    return float((M.T @ v) @ w)


def second_order_with_zeros(X, preps, meas, k: int) -> float:
    """SECOND_FLIP with zero vectors allowed outside slot ``k``."""
    M = _matrix(X)
    a = _vectors(preps, allow_zero=True, name="preparation")
    b = _vectors(meas, allow_zero=True, name="measurement")
    if not 1 <= k <= len(a):
        raise IndexError(f"site k={k} outside 1..{len(a)}")
    if np.linalg.norm(a[k - 1]) == 0.0:
        raise ValueError("slot k must carry a unit vector, not zero")
    _check_size(M, a[0].size, len(a))
    v = kron_all([lift(x) for x in a])
    return float(_flipped_lift(a, b, k) @ (M @ (M @ v)))


@dataclass(frozen=True)
class ConstraintSample:
    """One instance of a constraint: kind, vectors and (for flips) the site."""

    kind: str
    preps: tuple
    meas: tuple = ()
    k: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown constraint kind {self.kind!r}")
        object.__setattr__(self, "preps", tuple(tuple(map(float, _as_components(v))) for v in self.preps))
        object.__setattr__(self, "meas", tuple(tuple(map(float, _as_components(v))) for v in self.meas))
        zero_ok = self.kind == SECOND_ZEROPAD
        _vectors(self.preps, allow_zero=zero_ok, name="preparation")
        _vectors(self.meas, allow_zero=zero_ok, name="measurement")
        if self.kind in (FIRST_DIAG, SECOND_DIAG):
            if self.k is not None:
                raise ValueError(f"{self.kind} takes no site index")
        else:
            if self.k is None or not 1 <= self.k <= len(self.preps):
                raise ValueError(f"{self.kind} needs a site k in 1..{len(self.preps)}")
            if len(self.meas) != len(self.preps):
                raise DimensionError("preparation and measurement lists differ in length")

    @property
    def n(self) -> int:
        return len(self.preps)

    def evaluate(self, X) -> float:
        """Raw constraint value (see module docstring for the admissible sign)."""
        a = [np.array(v) for v in self.preps]
        b = [np.array(v) for v in self.meas]
        if self.kind == FIRST_FLIP:
            return first_order_value(X, a, b, self.k)
        if self.kind == FIRST_DIAG:
            return diagonal_first_order(X, a)
        if self.kind == SECOND_FLIP:
            return second_order_flip(X, a, b, self.k)
        if self.kind == SECOND_DIAG:
            return second_order_diag(X, a)
        return second_order_with_zeros(X, a, b, self.k)

    def oriented(self, X) -> float:
        """Value oriented so that admissible generators give >= 0."""
        raw = self.evaluate(X)
        return -raw if self.kind == SECOND_DIAG else raw


# -- batched evaluation --------------------------------------------------------


def lift_batch(vectors: np.ndarray) -> np.ndarray:
    """Product lifts for a batch: ``(N, n, d)`` -> ``(N, (d+1)^n)``."""
    V = np.asarray(vectors, dtype=float)
    N, n, d = V.shape
    L = np.concatenate([np.ones((N, n, 1)), V], axis=2)
    out = L[:, 0]
    for k in range(1, n):
        out = (out[:, :, None] * L[:, k, None, :]).reshape(N, -1)
    return out


def random_unit_batch(rng: np.random.Generator, N: int, n: int, d: int) -> np.ndarray:
    g = rng.standard_normal((N, n, d))
    return g / np.linalg.norm(g, axis=2, keepdims=True)


def second_order_batch(M: np.ndarray, preps: np.ndarray, meas: np.ndarray, ks: np.ndarray) -> tuple:
    """(flip values, diag values) for a batch; ``ks`` are 1-based flip sites."""
    P = np.asarray(preps, dtype=float)
    Bm = np.array(meas, dtype=float)
    idx = np.arange(P.shape[0])
    Bm[idx, ks - 1] = -P[idx, ks - 1]
    v = lift_batch(P)
    u = lift_batch(Bm)
    XXv = (v @ M.T) @ M.T
    flip = np.einsum("ij,ij->i", u, XXv)
    diag = np.einsum("ij,ij->i", v, XXv)
    return flip, diag


def first_order_batch(M: np.ndarray, preps: np.ndarray, meas: np.ndarray, ks: np.ndarray) -> tuple:
    P = np.asarray(preps, dtype=float)
    Bm = np.array(meas, dtype=float)
    idx = np.arange(P.shape[0])
    Bm[idx, ks - 1] = -P[idx, ks - 1]
    v = lift_batch(P)
    u = lift_batch(Bm)
    Xv = v @ M.T
    return np.einsum("ij,ij->i", u, Xv), np.einsum("ij,ij->i", v, Xv)


# -- the first-order system -----------------------------------------------------


def probe_vectors(d: int) -> list[np.ndarray]:
    """e_i, -e_i, (e_i + e_j)/sqrt2, (e_i - e_j)/sqrt2 for i < j."""
    E = np.eye(d)
    out = [E[i] for i in range(d)] + [-E[i] for i in range(d)]
    for i, j in itertools.combinations(range(d), 2):
        out.append((E[i] + E[j]) / np.sqrt(2.0))
        out.append((E[i] - E[j]) / np.sqrt(2.0))
    return out


def _svd_split(rows: np.ndarray, tol: float) -> tuple[int, np.ndarray, np.ndarray, float]:
    """Rank, full singular values, right singular vectors and the rank gap."""
    _, s, Vt = np.linalg.svd(rows, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > 0 else 0
    floor = np.finfo(float).eps * max(smax, 1e-300)
    if rank == 0:
        gap = np.inf
    else:
        nxt = s[rank] if rank < s.size else 0.0
        gap = float(s[rank - 1] / max(nxt, floor))
    return rank, s, Vt, gap


def _mgs(vectors: np.ndarray, drop: float = 1e-10) -> np.ndarray:
    """Modified Gram-Schmidt on rows, in the given order."""
    out = []
    for v in np.asarray(vectors, dtype=float):
        w = v.copy()
        for q in out:
            w -= (q @ w) * q
        nrm = np.linalg.norm(w)
        if nrm > drop:
            out.append(w / nrm)
    return np.array(out).reshape(len(out), vectors.shape[1])


@dataclass
class FirstOrderSystem:
    """Constraint rows, stored in factorized form.

    ``Q`` spans the per-site flip null space ``V`` (columns, orthonormal, in
    the row-major vec of a site's ``(d+1)x(d+1)`` matrix slot). ``reduced``
    holds the diagonal rows (probe products, compressed per site, plus
    random tuples) and random flip rows, in coordinates w.r.t. ``Q^{(x)n}``.
    """

    d: int
    n: int
    Q: np.ndarray
    site_rank_gap: float
    reduced: np.ndarray
    n_probe_rows: int
    seed: int
    probes: str = "e_i, -e_i, (e_i+e_j)/sqrt2, (e_i-e_j)/sqrt2"
    tol: float = SVD_TOL

    @property
    def site_dim(self) -> int:
        return self.Q.shape[1]


def _site_diag_rows(d: int, vecs: Sequence[np.ndarray]) -> np.ndarray:
    return np.array([np.outer(lift(a), lift(a)).ravel() for a in vecs])


def _site_flip_rows(d: int, vecs: Sequence[np.ndarray]) -> np.ndarray:
    return np.array([np.outer(lift(-a), lift(a)).ravel() for a in vecs])


def build_first_order_system(d: int, n: int, seed: int = 0, tol: float = SVD_TOL, extra: int = EXTRA_ROWS) -> FirstOrderSystem:
    if d < 1 or n < 1:
        raise ValueError("need d >= 1 and n >= 1")
    check_capacity(d, n)
    probes = probe_vectors(d) if d >= 1 else []
    # per-site flip rows: the other slots range over all of R^{(d+1)x(d+1)}
    F = _site_flip_rows(d, probes)
    rank, _, Vt, gap = _svd_split(F, tol)
    Q = Vt[rank:].T
    # diagonal rows restricted to V, compressed to their row space
    Dg = _site_diag_rows(d, probes) @ Q
    r, s, Vt2, gap2 = _svd_split(Dg, tol)
    R = s[:r, None] * Vt2[:r]
    rows = [kron_all([R] * n)]
    n_probe = rows[0].shape[0]
    rng = np.random.default_rng(seed)
    for _ in range(extra):
        a = random_unit_batch(rng, 1, n, d)[0]
        rows.append(kron_all([(_site_diag_rows(d, [v]) @ Q) for v in a]))
    for t in range(extra):
        a = random_unit_batch(rng, 1, n, d)[0]
        b = random_unit_batch(rng, 1, n, d)[0]
        k = t % n
        facs = [np.outer(lift(b[j]), lift(a[j])).ravel()[None, :] @ Q for j in range(n)]
        facs[k] = _site_flip_rows(d, [a[k]]) @ Q
        rows.append(kron_all(facs))
    return FirstOrderSystem(d, n, Q, min(gap, gap2), np.vstack(rows), n_probe, seed, tol=tol)


@dataclass
class GeneratorSpace:
    """HS-orthonormal basis of a space of generators.

    The basis is held either explicitly (``vectors``: rows are flattened
    ``D x D`` matrices) or as coordinates w.r.t. the site frame ``Q^{(x)n}``,
    materialized on demand.
    """

    d: int
    n: int
    coords: np.ndarray | None = None
    Q: np.ndarray | None = None
    tol: float = SVD_TOL
    rank_gap: float = float("inf")
    description: str = ""
    _vectors: np.ndarray | None = field(default=None, repr=False)

    def __len__(self) -> int:
        if self._vectors is not None:
            return self._vectors.shape[0]
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return len(self)

    @property
    def D(self) -> int:
        return (self.d + 1) ** self.n

    def _materialize(self, C: np.ndarray) -> np.ndarray:
        n, q = self.n, self.Q.shape[1]
        dim = self.d + 1
        T = C.reshape((C.shape[0],) + (q,) * n)
        for k in range(n):
            # site k's coordinate axis sits at position 1 + k
            T = np.moveaxis(np.tensordot(T, self.Q, axes=([1 + k], [1])), -1, 1 + k)
        # axes now (batch, pair_1, ..., pair_n) with pair_k = (beta_k, alpha_k)
        T = T.reshape((C.shape[0],) + (dim, dim) * n)
        perm = [0] + [1 + 2 * k for k in range(n)] + [2 + 2 * k for k in range(n)]
        return T.transpose(perm).reshape(C.shape[0], -1)

    @property
    def vectors(self) -> np.ndarray:
        if self._vectors is None:
            self._vectors = self._materialize(self.coords)
        return self._vectors

    def matrix(self, i: int) -> np.ndarray:
        if self._vectors is not None:
            return self._vectors[i].reshape(self.D, self.D)
        return self._materialize(self.coords[i : i + 1])[0].reshape(self.D, self.D)

    def matrices(self):
        for i in range(len(self)):
            yield self.matrix(i)

    @property
    def basis(self) -> list[OperatorTensor]:
        return [OperatorTensor(self.d, self.n, m) for m in self.matrices()]

    def gram_error(self) -> float:
        V = self.vectors
        return float(np.max(np.abs(V @ V.T - np.eye(V.shape[0])), initial=0.0))

    def projection_residual(self, X) -> float:
        """HS norm of the part of X outside this space."""
        x = _matrix(X).ravel()
        V = self.vectors
        return float(np.linalg.norm(x - V.T @ (V @ x)))


def null_space(system: FirstOrderSystem, tol: float | None = None) -> GeneratorSpace:
    """Null space of the assembled system, via SVD with relative cutoff ``tol``."""
    tol = system.tol if tol is None else tol
    rank, _, Vt, gap = _svd_split(system.reduced, tol)
    C = _mgs(Vt[rank:])
    gap = min(gap, system.site_rank_gap)
    if gap < RANK_GAP_FLAG:
        raise RankInstability(f"rank gap {gap:.3e} below {RANK_GAP_FLAG}")
    return GeneratorSpace(
        system.d,
        system.n,
        coords=C,
        Q=system.Q,
        tol=tol,
        rank_gap=gap,
        description=f"first-order null space; probes: {system.probes}; +{EXTRA_ROWS} random tuples",
    )


def first_order_null_space(d: int, n: int, seed: int = 0, tol: float = SVD_TOL) -> GeneratorSpace:
    return null_space(build_first_order_system(d, n, seed, tol), tol)


# -- closed forms ---------------------------------------------------------------


def _sector_product_basis(d: int, sectors) -> np.ndarray:
    rows = []
    for x in sectors:
        bases = [subspace_basis(ch, d).matrices for ch in x]
        for combo in itertools.product(*bases):
            rows.append(kron_all(combo).ravel())
    return np.array(rows)


def local_algebra_basis(d: int, n: int) -> GeneratorSpace:
    """Orthonormal basis of sum_i 1 (x) .. (x) so(d)_(site i) (x) .. (x) 1."""
    if d < 2:
        raise ValueError("local algebra needs d >= 2")
    check_capacity(d, n)
    sectors = ["I" * i + "A" + "I" * (n - i - 1) for i in range(n)]
    return GeneratorSpace(d, n, description="local algebra", _vectors=_sector_product_basis(d, sectors))


def closed_form_null_space(d: int, n: int) -> GeneratorSpace:
    """(A+B+I)^{(x)n} intersected with the diagonal constraint, built from sectors.

    The diagonal form annihilates A and maps B, I onto affine functions of
    a, so the intersection is the sum of all sectors with at least one A.
    """
    check_capacity(d, n)
    sectors = [str(x) for x in all_sectors(n) if x.n_A >= 1]
    return GeneratorSpace(d, n, description="sector construction", _vectors=_sector_product_basis(d, sectors))


def local_projection(X, d: int, n: int) -> np.ndarray:
    M = _matrix(X)
    out = np.zeros_like(M)
    for i in range(n):
        maps = [site_superoperator("I", d)] * n
        maps[i] = site_superoperator("A", d)
        out = out + apply_site_maps(M, maps, d + 1)
    return out


def is_local(X, d: int, n: int, tol: float = 1e-8) -> tuple[bool, float]:
    """Whether X lies in the local algebra; returns the flag and the residual."""
    M = _matrix(X)
    res = float(np.linalg.norm(M - local_projection(M, d, n)))
    return res <= tol * max(np.linalg.norm(M), 1e-300), res


def n1_projection(X, d: int, n: int) -> np.ndarray:
    """Orthogonal projection onto the first-order null space (sum of sectors with an A)."""
    M = _matrix(X)
    full = apply_site_maps(M, [site_superoperator("ABI", d)] * n, d + 1)
    noA = apply_site_maps(M, [site_superoperator("BI", d)] * n, d + 1)
    return full - noA
