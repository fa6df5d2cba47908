"""Circuits: product preparation, a gate sequence, local two-outcome measurements."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Union

import numpy as np
import scipy.linalg

from .bloch import BlochVector, Rotation, lift_rotation, random_rotation
from .tensor import OperatorTensor, check_capacity, kron_all, product_lift

ORTHO_TOL = 1e-10
RANGE_TOL = 1e-8
SUM_TOL = 1e-10


class InadmissibleGateError(ValueError):
    """A gate sequence produced a probability outside [0, 1]."""

    def __init__(self, message: str, outcome=None, value=None):
        super().__init__(message)
        self.outcome = outcome
        self.value = value


@dataclass(frozen=True)
class LocalGate:
    site: int  # 1-based
    rotation: Rotation


@dataclass(frozen=True)
class ExpGate:
    generator: np.ndarray
    t: float


@dataclass(frozen=True)
class RawGate:
    matrix: np.ndarray


@dataclass(frozen=True)
class QuantumGate:
    name: str
    sites: tuple
    theta: float | None = None


Gate = Union[LocalGate, ExpGate, RawGate, QuantumGate]


def _unit(v, d: int) -> BlochVector:
    b = v if isinstance(v, BlochVector) else BlochVector(np.asarray(v, dtype=float))
    if b.d != d:
        raise ValueError(f"vector of dimension {b.d} in a d={d} circuit")
    return b


@dataclass
class Circuit:
    d: int
    n: int
    preps: list
    gates: list = field(default_factory=list)
    meas: list = field(default_factory=list)

    def __post_init__(self):
        check_capacity(self.d, self.n)
        if len(self.preps) != self.n or len(self.meas) != self.n:
            raise ValueError(f"need {self.n} preparations and {self.n} measurements")
        self.preps = [_unit(a, self.d) for a in self.preps]
        self.meas = [_unit(b, self.d) for b in self.meas]
        for b in self.meas:
            if not b.is_unit(1e-12):
                raise ValueError("measurement directions must be unit vectors")
        for g in self.gates:
            gate_matrix(g, self.d, self.n)


def local_gate_matrix(site: int, R, d: int, n: int) -> np.ndarray:
    if not 1 <= site <= n:
        raise ValueError(f"site {site} outside 1..{n}")
    Rm = R.matrix if isinstance(R, Rotation) else np.asarray(R, dtype=float)
    if Rm.shape != (d, d):
        raise ValueError(f"rotation of shape {Rm.shape} in a d={d} circuit")
    mats = [np.eye(d + 1)] * n
    mats[site - 1] = lift_rotation(Rm)
    return kron_all(mats)


def gate_from_generator(X, t: float) -> np.ndarray:
    """``exp(t X)`` by scaling and squaring; exactly the identity for t = 0 or X = 0."""
    M = X.matrix if isinstance(X, OperatorTensor) else np.asarray(X, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("generator must be square")
    if not np.isfinite(t) or not np.all(np.isfinite(M)):
        raise ValueError("generator and time must be finite")
    if t == 0 or not np.any(M):
        return np.eye(M.shape[0])
    return scipy.linalg.expm(t * M)


def gate_matrix(g: Gate, d: int, n: int) -> np.ndarray:
    D = (d + 1) ** n
    if isinstance(g, LocalGate):
        return local_gate_matrix(g.site, g.rotation, d, n)
    if isinstance(g, ExpGate):
        G = gate_from_generator(g.generator, g.t)
    elif isinstance(g, RawGate):
        G = np.asarray(g.matrix.matrix if isinstance(g.matrix, OperatorTensor) else g.matrix, dtype=float)
        if G.shape == (D, D) and np.max(np.abs(G.T @ G - np.eye(D))) > ORTHO_TOL:
            raise ValueError("raw gate is not orthogonal")
    elif isinstance(g, QuantumGate):
        if d != 3:
            raise ValueError("quantum gates exist only for d = 3")
        from .quantum_oracle import named_gate, transfer_matrix

        G = transfer_matrix(named_gate(g.name, g.sites, n, g.theta)).matrix
    else:
        raise TypeError(f"unknown gate {g!r}")
    if G.shape != (D, D):
        raise ValueError(f"gate of shape {G.shape} does not act on d={d}, n={n}")
    return G


def circuit_matrix(circuit: Circuit) -> np.ndarray:
    """Product of gates in application order (first gate rightmost)."""
    G = np.eye((circuit.d + 1) ** circuit.n)
    for g in circuit.gates:
        G = gate_matrix(g, circuit.d, circuit.n) @ G
    return G


def outcome_strings(n: int) -> list[tuple[int, ...]]:
    """Sign strings in lexicographic order, + before -."""
    return list(itertools.product((1, -1), repeat=n))


@dataclass(frozen=True)
class Distribution:
    n: int
    outcomes: tuple
    probabilities: np.ndarray

    def as_dict(self) -> dict:
        return {"".join("+" if s > 0 else "-" for s in o): float(p) for o, p in zip(self.outcomes, self.probabilities)}

    def marginal(self, wire: int) -> np.ndarray:
        """(P(+), P(-)) on a 1-based wire."""
        p = np.zeros(2)
        for o, q in zip(self.outcomes, self.probabilities):
            p[0 if o[wire - 1] > 0 else 1] += q
        return p


def evaluate(circuit: Circuit) -> Distribution:
    """Outcome distribution ``2^{-n} v(s_1 b_1, ..) ^T G v(a_1, ..)``."""
    G = circuit_matrix(circuit)
    n = circuit.n
    vin = product_lift(circuit.preps).vector
    w = G @ vin
    outs = outcome_strings(n)
    probs = np.array([product_lift([s * b.components for s, b in zip(o, circuit.meas)]).vector @ w for o in outs]) / 2.0**n
    for o, p in zip(outs, probs):
        if p < -RANGE_TOL or p > 1 + RANGE_TOL:
            label = "".join("+" if s > 0 else "-" for s in o)
            raise InadmissibleGateError(f"probability {p!r} for outcome {label} outside [0, 1]", label, float(p))
    if abs(probs.sum() - 1.0) > SUM_TOL:
        raise InadmissibleGateError(f"probabilities sum to {probs.sum()!r}")
    return Distribution(n, tuple(outs), probs)


def correlation_check(dist: Distribution) -> float:
    """Total variation distance between the joint and the product of its marginals.

    Zero iff the statistics factorize over wires; 0.5 for perfectly
    correlated fair bits.
    """
    margs = [dist.marginal(w) for w in range(1, dist.n + 1)]
    prod = np.array([np.prod([margs[w][0 if s > 0 else 1] for w, s in enumerate(o)]) for o in dist.outcomes])
    return float(0.5 * np.sum(np.abs(dist.probabilities - prod)))


def admissibility_scan(G, d: int, n: int, samples: int = 1000, seed: int = 0) -> tuple[float, float]:
    """(min, max) outcome probability over random product preparations and measurements."""
    from .constraints import lift_batch, random_unit_batch

    M = np.asarray(G, dtype=float)
    rng = np.random.default_rng(seed)
    P = random_unit_batch(rng, samples, n, d)
    B = random_unit_batch(rng, samples, n, d)
    p = np.einsum("ij,ij->i", lift_batch(B), lift_batch(P) @ M.T) / 2.0**n
    return float(p.min()), float(p.max())


def random_local_circuit(d: int, n: int, depth: int, rng: np.random.Generator) -> Circuit:
    from .bloch import random_unit_vector

    gates = [LocalGate(int(rng.integers(1, n + 1)), random_rotation(d, int(rng.integers(2**63)))) for _ in range(depth)]
    preps = [random_unit_vector(d, int(rng.integers(2**63))) for _ in range(n)]
    meas = [random_unit_vector(d, int(rng.integers(2**63))) for _ in range(n)]
    return Circuit(d, n, preps, gates, meas)
