"""Single-gbit geometry: Bloch vectors, two-outcome measurements and rotations.

A gbit of Bloch dimension ``d`` has the unit ball of R^d as its state space.
Pure states and measurement directions are unit vectors; a state ``a`` is
lifted to ``(1, a)`` in R^{d+1} so that outcome probabilities become linear.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

UNIT_TOL = 1e-12
ORTHO_TOL = 1e-12


class DimensionError(ValueError):
    """Raised when operands of different Bloch dimension are combined."""


def _as_components(a) -> np.ndarray:
    if isinstance(a, BlochVector):
        return a.components
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"Bloch vector must be one-dimensional, got shape {arr.shape}")
    return arr


def _as_matrix(R) -> np.ndarray:
    if isinstance(R, Rotation):
        return R.matrix
    return np.asarray(R, dtype=float)


@dataclass(frozen=True, eq=False)
class BlochVector:
    """A point of the d-dimensional Bloch ball.

    ``unit=True`` additionally demands |a| = 1 (pure state or measurement
    direction). Nothing is renormalized; out-of-tolerance input raises.
    """

    components: np.ndarray
    unit: bool = False

    def __post_init__(self):
        comps = np.array(self.components, dtype=float).ravel()
        comps.setflags(write=False)
        object.__setattr__(self, "components", comps)
        if comps.size < 1:
            raise ValueError("Bloch dimension must be at least 1")
        norm = float(np.linalg.norm(comps))
        if norm > 1.0 + UNIT_TOL:
            raise ValueError(f"Bloch vector outside the ball: |a| = {norm!r}")
        if self.unit and abs(norm - 1.0) > UNIT_TOL:
            raise ValueError(f"expected a unit Bloch vector, |a| = {norm!r}")

    @property
    def d(self) -> int:
        return int(self.components.size)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.components))

    def is_unit(self, tol: float = UNIT_TOL) -> bool:
        return abs(self.norm - 1.0) <= tol

    def __neg__(self) -> "BlochVector":
        return BlochVector(-self.components, unit=self.unit)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.components, dtype=dtype)

    def __repr__(self) -> str:
        return f"BlochVector({self.components.tolist()!r}, unit={self.unit})"


@dataclass(frozen=True, eq=False)
class Rotation:
    """An element of SO(d) (or O(1) when d = 1)."""

    matrix: np.ndarray

    def __post_init__(self):
        R = np.array(self.matrix, dtype=float)
        if R.ndim != 2 or R.shape[0] != R.shape[1] or R.shape[0] < 1:
            raise ValueError(f"rotation must be a non-empty square matrix, got {R.shape}")
        R.setflags(write=False)
        object.__setattr__(self, "matrix", R)
        d = R.shape[0]
        if np.max(np.abs(R.T @ R - np.eye(d))) > ORTHO_TOL * max(1, d):
            raise ValueError("rotation matrix is not orthogonal")
        det = float(np.linalg.det(R))
        if d > 1 and abs(det - 1.0) > ORTHO_TOL * max(1, d):
            raise ValueError(f"rotation must have determinant +1, got {det!r}")

    @property
    def d(self) -> int:
        return int(self.matrix.shape[0])

    def __matmul__(self, other):
        if isinstance(other, Rotation):
            return Rotation(self.matrix @ other.matrix)
        if isinstance(other, BlochVector):
            return BlochVector(self.matrix @ other.components, unit=other.unit)
        return self.matrix @ np.asarray(other)

    @property
    def T(self) -> "Rotation":
        return Rotation(self.matrix.T)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


def lift(a) -> np.ndarray:
    """Return the lifted vector ``(1, a_1, ..., a_d)``."""
    comps = _as_components(a)
    out = np.empty(comps.size + 1)
    out[0] = 1.0
    out[1:] = comps
    return out


def outcome_probability(a, b) -> float:
    """Probability ``(1 + a.b)/2`` of the first outcome of measurement ``b`` on state ``a``."""
    av, bv = _as_components(a), _as_components(b)
    if av.size != bv.size:
        raise DimensionError(f"state has d={av.size}, measurement has d={bv.size}")
    if abs(np.linalg.norm(bv) - 1.0) > UNIT_TOL:
        raise ValueError("measurement direction must be a unit vector")
    if np.linalg.norm(av) > 1.0 + UNIT_TOL:
        raise ValueError("state lies outside the Bloch ball")
    return 0.5 * (1.0 + float(av @ bv))


def lift_rotation(R) -> np.ndarray:
    """Block matrix ``1 (+) R`` acting on lifted vectors."""
    M = _as_matrix(R)
    d = M.shape[0]
    out = np.zeros((d + 1, d + 1))
    out[0, 0] = 1.0
    out[1:, 1:] = M
    return out


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(np.uint64(seed % 2**64) if isinstance(seed, int) else seed)


def random_unit_vector(d: int, seed) -> BlochVector:
    """Uniform point on the unit sphere S^{d-1}, deterministic in ``seed``."""
    if d < 1:
        raise ValueError("d must be at least 1")
    rng = _rng(seed)
    while True:
        g = rng.standard_normal(d)
        nrm = np.linalg.norm(g)
        if nrm > 1e-300:
            v = g / nrm
            # one more normalization pass pins |v| to the last ulp
            return BlochVector(v / np.linalg.norm(v), unit=True)


def haar_rotation_matrix(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed SO(d) matrix from a QR factorization with sign correction."""
    if d < 1:
        raise ValueError("d must be at least 1")
    g = rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    q = q * np.sign(np.diag(r))
    if d > 1 and np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_rotation(d: int, seed) -> Rotation:
    """Haar-random element of SO(d); for d = 1 the identity."""
    return Rotation(haar_rotation_matrix(d, _rng(seed)))


def rotation_to_e1(b) -> np.ndarray:
    """An SO(d) matrix mapping the unit vector ``b`` onto e_1.

    Returns the identity when ``b`` already equals e_1 to 1e-14.
    """
    bv = _as_components(b)
    d = bv.size
    bv = bv / np.linalg.norm(bv)
    e1 = np.zeros(d)
    e1[0] = 1.0
    if np.linalg.norm(bv - e1) < 1e-14:
        return np.eye(d)
    if d == 1:
        # b = -e_1; only reachable through O(1)
        return -np.eye(1)
    # Householder reflection swapping b and e_1, then a reflection fixing e_1
    u = bv - e1
    H = np.eye(d) - 2.0 * np.outer(u, u) / (u @ u)
    H[-1, :] = -H[-1, :]
    return H
