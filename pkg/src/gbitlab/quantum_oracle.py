"""Qubit quantum theory in the Bloch (Pauli transfer) representation.

The basis ``{1, sx, sy, sz}^{(x)n}`` is ordered like every other tensor in the
package (wire 1 slowest). A density matrix ``rho = 2^{-n} sum_alpha r_alpha
sigma_alpha`` has coordinates ``r``; a product of pure qubits has ``r =
v(a_1) (x) ... (x) v(a_n)`` so d = 3 is a literal instance of the gbit setup.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .tensor import OperatorTensor, kron_all

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10

PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    n: int
    matrix: np.ndarray

    def __post_init__(self):
        H = np.asarray(self.matrix, dtype=complex)
        if H.shape != (2**self.n, 2**self.n):
            raise ValueError(f"expected a {2 ** self.n}x{2 ** self.n} matrix, got {H.shape}")
        if np.max(np.abs(H - H.conj().T)) > HERMITIAN_TOL:
            raise ValueError("operator is not Hermitian")
        object.__setattr__(self, "matrix", H)

    @property
    def is_traceless(self) -> bool:
        return abs(np.trace(self.matrix)) <= HERMITIAN_TOL * max(1.0, np.linalg.norm(self.matrix))


@lru_cache(maxsize=None)
def pauli_basis(n: int) -> np.ndarray:
    """All ``4^n`` Pauli products, shape ``(4^n, 2^n, 2^n)``."""
    mats = [kron_all(list(c)) for c in itertools.product(PAULI, repeat=n)]
    out = np.array(mats)
    out.setflags(write=False)
    return out


def bloch_coordinates(rho) -> np.ndarray:
    """Real coordinates ``r_alpha = tr(sigma_alpha rho)`` (so ``r_0 = 1``)."""
    R = np.asarray(rho, dtype=complex)
    n = int(round(np.log2(R.shape[0])))
    S = pauli_basis(n)
    return np.real(np.einsum("aij,ji->a", S, R))


def density_from_bloch(vectors) -> np.ndarray:
    """Product state ``(x)_k (1 + a_k . sigma)/2``."""
    return kron_all([0.5 * (PAULI[0] + sum(c * P for c, P in zip(np.asarray(a, float), PAULI[1:]))) for a in vectors])


def _check_unitary(U) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError("unitary must be square")
    if np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) > UNITARY_TOL:
        raise ValueError("matrix is not unitary")
    return U


def transfer_matrix(U) -> OperatorTensor:
    """``T_{beta alpha} = 2^{-n} tr(sigma_beta U sigma_alpha U^dagger)``."""
    U = _check_unitary(U)
    n = int(round(np.log2(U.shape[0])))
    S = pauli_basis(n)
    conj = np.einsum("ij,ajk,lk->ail", U, S, U.conj())
    T = np.real(np.einsum("bij,aji->ba", S, conj)) / 2**n
    return OperatorTensor(3, n, T)


def adjoint_generator(H) -> OperatorTensor:
    """Generator of ``rho -> exp(-iHt) rho exp(iHt)`` in the Pauli basis.

    ``X_{beta alpha} = 2^{-n} tr(sigma_beta (-i)[H, sigma_alpha])``.
    """
    Hop = H if isinstance(H, HermitianOperator) else None
    if Hop is None:
        Hm = np.asarray(H, dtype=complex)
        Hop = HermitianOperator(int(round(np.log2(Hm.shape[0]))), Hm)
    if not Hop.is_traceless:
        raise ValueError("generator Hamiltonian must be traceless")
    n = Hop.n
    S = pauli_basis(n)
    Hm = Hop.matrix
    comm = -1j * (np.einsum("ij,ajk->aik", Hm, S) - np.einsum("aij,jk->aik", S, Hm))
    X = np.real(np.einsum("bij,aji->ba", S, comm)) / 2**n
    return OperatorTensor(3, n, X)


def traceless_hermitian_basis(n: int) -> list[np.ndarray]:
    """The ``4^n - 1`` non-identity Pauli products (each divided by 2)."""
    return [0.5 * P for P in pauli_basis(n)[1:]]


def outcome_strings(n: int) -> list[tuple[int, ...]]:
    """All sign strings in lexicographic order, + before -."""
    return list(itertools.product((1, -1), repeat=n))


def density_probabilities(rho, meas) -> np.ndarray:
    """Born-rule distribution of local two-outcome measurements along ``meas``."""
    R = np.asarray(rho, dtype=complex)
    out = []
    for s in outcome_strings(len(meas)):
        E = density_from_bloch([si * np.asarray(b, float) for si, b in zip(s, meas)])
        out.append(float(np.real(np.trace(R @ E))))
    return np.array(out)


def born_probabilities(U, preps, meas) -> np.ndarray:
    U = _check_unitary(U)
    rho = density_from_bloch(preps)
    return density_probabilities(U @ rho @ U.conj().T, meas)


# -- gate library -----------------------------------------------------------------

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
_S = np.diag([1, 1j])
_T = np.diag([1, np.exp(1j * np.pi / 4)])
SINGLE = {"I": PAULI[0], "X": PAULI[1], "Y": PAULI[2], "Z": PAULI[3], "H": _H, "S": _S, "T": _T}
ROTATIONS = {"RX": PAULI[1], "RY": PAULI[2], "RZ": PAULI[3]}
TWO = ("CNOT", "CZ", "SWAP")


def _embed(op: np.ndarray, sites: tuple[int, ...], n: int) -> np.ndarray:
    """Place an operator on the given 1-based wires (any order)."""
    k = len(sites)
    if len(set(sites)) != k or any(not 1 <= s <= n for s in sites):
        raise ValueError(f"bad wires {sites} for n={n}")
    full = np.kron(op, np.eye(2 ** (n - k)))
    order = [s - 1 for s in sites] + [i for i in range(n) if i + 1 not in sites]
    T = full.reshape((2,) * (2 * n))
    inv = np.argsort(order)
    T = T.transpose(list(inv) + [n + i for i in inv])
    return T.reshape(2**n, 2**n)


def named_gate(name: str, sites, n: int, theta: float | None = None) -> np.ndarray:
    """Unitary of a standard gate on the given wires (1-based)."""
    name = name.upper()
    sites = tuple(int(s) for s in (sites if np.iterable(sites) else [sites]))
    if name in SINGLE:
        op = SINGLE[name]
    elif name in ROTATIONS:
        if theta is None:
            raise ValueError(f"{name} needs an angle")
        op = scipy.linalg.expm(-0.5j * theta * ROTATIONS[name])
    elif name == "CNOT":
        op = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
    elif name == "CZ":
        op = np.diag([1, 1, 1, -1]).astype(complex)
    elif name == "SWAP":
        op = np.eye(4, dtype=complex)[[0, 2, 1, 3]]
    else:
        raise ValueError(f"unknown quantum gate {name!r}")
    if op.shape[0] != 2 ** len(sites):
        raise ValueError(f"{name} acts on {int(np.log2(op.shape[0]))} wire(s), got {len(sites)}")
    return _embed(op, sites, n)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase correction."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
