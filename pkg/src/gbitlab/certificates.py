"""Exclusion certificates and their stand-alone verifier.

The verifier only rebuilds ``Y`` from its sparse entries and re-evaluates the
named constraint with ``constraints``; it does not touch the analyzer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constraints import SECOND_DIAG, SECOND_FLIP, SECOND_ZEROPAD, ConstraintSample

REPRODUCE_TOL = 1e-9
CERT_MARGIN = 1e-8
SPARSE_DROP = 1e-15


def sparse_entries(Y: np.ndarray, drop: float = SPARSE_DROP) -> list[tuple[int, int, float]]:
    """Nonzero entries of Y; entries below ``drop * max|Y|`` are discarded."""
    scale = float(np.max(np.abs(Y), initial=0.0))
    rows, cols = np.nonzero(np.abs(Y) > drop * scale)
    return [(int(i), int(j), float(Y[i, j])) for i, j in zip(rows, cols)]


def dense_from_entries(D: int, entries) -> np.ndarray:
    Y = np.zeros((D, D))
    for i, j, v in entries:
        Y[int(i), int(j)] = float(v)
    return Y


def oriented_value(kind: str, raw: float) -> float:
    """Map a raw second-order value to the convention admissible >= 0."""
    return -raw if kind == SECOND_DIAG else raw


@dataclass
class ExclusionCertificate:
    """Witness that one candidate direction violates a second-order constraint.

    ``value`` is oriented (admissible generators give >= 0), ``raw_value`` is
    the constraint expression itself; they differ in sign for SECOND_DIAG.
    """

    d: int
    n: int
    candidate: int
    sector: str
    order: list
    conjugation: list
    Y_entries: list
    kind: str
    k: int | None
    preps: list
    meas: list
    raw_value: float
    value: float
    norm_Y_sq: float
    strategy: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def D(self) -> int:
        return (self.d + 1) ** self.n

    @property
    def margin(self) -> float:
        return abs(self.value) / self.norm_Y_sq if self.norm_Y_sq > 0 else float("inf")

    def Y(self) -> np.ndarray:
        return dense_from_entries(self.D, self.Y_entries)

    def sample(self) -> ConstraintSample:
        meas = self.meas if self.kind in (SECOND_FLIP, SECOND_ZEROPAD) else ()
        return ConstraintSample(self.kind, tuple(map(tuple, self.preps)), tuple(map(tuple, meas)), self.k)


@dataclass(frozen=True)
class VerificationResult:
    ok: bool
    recomputed: float
    stored: float
    deviation: float
    threshold: float
    message: str


def verify_certificate(cert: ExclusionCertificate, tol: float = REPRODUCE_TOL, margin: float = CERT_MARGIN) -> VerificationResult:
    """Re-evaluate the stored constraint on the stored Y.

    Passes iff the recomputed oriented value matches the stored one to
    ``tol`` and lies below ``-margin * ||Y||^2``.
    """
    Y = cert.Y()
    norm_sq = float(np.sum(Y * Y))
    raw = cert.sample().evaluate(Y)
    val = oriented_value(cert.kind, raw)
    dev = abs(val - cert.value)
    thr = -margin * norm_sq
    if norm_sq == 0.0:
        return VerificationResult(False, val, cert.value, dev, thr, "Y vanishes")
    if abs(norm_sq - cert.norm_Y_sq) > tol * max(1.0, norm_sq):
        return VerificationResult(False, val, cert.value, dev, thr, "stored ||Y||^2 does not match Y")
    if dev > tol * max(1.0, norm_sq):
        return VerificationResult(False, val, cert.value, dev, thr, f"value mismatch: recomputed {val!r}, stored {cert.value!r}")
    if abs(oriented_value(cert.kind, cert.raw_value) - cert.value) > tol * max(1.0, norm_sq):
        return VerificationResult(False, val, cert.value, dev, thr, "raw and oriented values disagree")
    if not val < thr:
        return VerificationResult(False, val, cert.value, dev, thr, f"value {val!r} is not below {thr!r}")
    return VerificationResult(True, val, cert.value, dev, thr, "ok")
