"""End-to-end no-go pipeline.

For every direction of the nonlocal part of the first-order null space:
pick a nonlocal sector, conjugate locally into block normal form, project
with the group averages, and look for a second-order violation. Directions
that resist (expected only for d = 3) are reported as survivors.
"""

from __future__ import annotations

import itertools
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import constraints as C
from .bloch import lift_rotation, rotation_to_e1
from .certificates import CERT_MARGIN, ExclusionCertificate, oriented_value, sparse_entries
from .constraints import SECOND_DIAG, SECOND_FLIP, SECOND_ZEROPAD, ConstraintSample, GeneratorSpace
from .projectors import ProjectorSpec, tensor_projector
from .subspaces import (
    SectorString,
    all_sectors,
    antisymmetric_canonical_form,
    antisymmetric_from_coords,
    block_offset,
    d2_matrices,
    num_blocks,
    sector_coordinates,
    sector_norms,
    site_superoperator,
    standard_matrices,
    subspace_basis,
)
from .tensor import apply_site_maps, conjugate_local, hs_inner, kron_all

STRUCTURED_BUDGET = 10_000
RANDOM_BUDGET = 100_000
SPOT_CHECKS = 10_000
BATCH = 2_000


class AnalysisError(RuntimeError):
    pass


class LocalGeneratorError(AnalysisError):
    """Raised when a nonlocal sector is requested for a local generator."""


@dataclass
class AnalysisOptions:
    seed: int = 0
    svd_tol: float = C.SVD_TOL
    constraint_tol: float = 1e-8
    cert_margin: float = CERT_MARGIN
    structured_budget: int = STRUCTURED_BUDGET
    random_budget: int = RANDOM_BUDGET
    spot_checks: int = SPOT_CHECKS
    threads: int | None = None
    timings: bool = False


@dataclass
class Canonicalization:
    X2: np.ndarray  # X'' = T X T^T
    M: np.ndarray  # M_x in block normal form
    site_rotations: list  # per-site d x d rotations R_k (T = (x) lift(R_k))
    order: tuple  # virtual A..B..I order, 0-based sites
    coupling: float  # squared largest sector coordinate of X
    overlap: float  # <X'', M_x>, at least ``coupling``


@dataclass
class DirectionResult:
    index: int
    sector: str
    status: str  # "certified" | "survivor" | "unresolved"
    certificate: ExclusionCertificate | None = None
    coupling: float = 0.0
    overlap: float = 0.0
    trials: int = 0
    min_value: float = 0.0


@dataclass
class AnalysisReport:
    d: int
    n: int
    null_dim: int
    gloc_dim: int
    nonlocal_dim: int
    rank_gap: float
    sector_dims: dict
    directions: list
    survivors: list = field(default_factory=list)
    survivor_space_dim: int = 0
    checks: dict = field(default_factory=dict)
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    budgets: dict = field(default_factory=dict)
    runtimes: dict | None = None

    @property
    def certificates(self) -> list[ExclusionCertificate]:
        return [r.certificate for r in self.directions if r.certificate is not None]

    @property
    def counts(self) -> dict:
        out = {"certified": 0, "survivor": 0, "unresolved": 0}
        for r in self.directions:
            out[r.status] += 1
        return out

    @property
    def conclusion(self) -> str:
        c = self.counts
        if c["unresolved"]:
            return "budget exhausted"
        if self.d == 3 and c["survivor"]:
            return "survivors present, all validated"
        if c["survivor"] == 0 and c["certified"] == self.nonlocal_dim:
            return "g = g_loc"
        return "survivors present, all validated"


# -- sector choice ---------------------------------------------------------------


def find_nonlocal_sector(X, d: int, n: int, tol: float = 1e-10) -> SectorString:
    """Largest nonlocal sector component (ties: lexicographic order of x)."""
    norms = sector_norms(np.asarray(X, dtype=float), d, n)
    total = max(np.linalg.norm(X), 1e-300)
    best = None
    for key in sorted(norms):
        x = SectorString(key)
        if x.is_local or x.is_identity:
            continue
        if norms[key] <= tol * total:
            continue
        if best is None or norms[key] > norms[best] * (1 + 1e-12):
            best = key
    if best is None:
        raise LocalGeneratorError("generator has no nonlocal sector component")
    return SectorString(best)


# -- canonicalization ------------------------------------------------------------------


def _rank1(Ct: np.ndarray, iters: int = 200) -> tuple[list[np.ndarray], float]:
    """Best rank-one fit by higher-order power iteration from the largest entry."""
    n = Ct.ndim
    idx = np.unravel_index(np.argmax(np.abs(Ct)), Ct.shape)
    us = [np.eye(Ct.shape[k])[idx[k]] for k in range(n)]
    sigma = float(Ct[idx])
    for _ in range(iters):
        for k in range(n):
            T = Ct
            # contract from the back so the remaining axis positions stay valid
            for j in reversed(range(n)):
                if j == k:
                    continue
                T = np.tensordot(T, us[j], axes=([j], [0]))
            nrm = np.linalg.norm(T)
            if nrm == 0:
                break
            us[k] = T / nrm
        new = float(_contract_all(Ct, us))
        if abs(abs(new) - abs(sigma)) <= 1e-15 * max(1.0, abs(new)):
            sigma = new
            break
        sigma = new
    if sigma < 0:
        us[0] = -us[0]
        sigma = -sigma
    return us, sigma


def _contract_all(Ct: np.ndarray, us) -> float:
    T = Ct
    for j in reversed(range(len(us))):
        T = np.tensordot(T, us[j], axes=([j], [0]))
    return float(T)


def canonicalize(X, x, d: int) -> Canonicalization:
    xs = x if isinstance(x, SectorString) else SectorString(x)
    n = xs.n
    M = np.asarray(X, dtype=float)
    Ct = sector_coordinates(M, xs, d)
    top = float(np.max(np.abs(Ct), initial=0.0))
    if top <= 1e-14 * max(np.linalg.norm(M), 1e-300):
        raise AnalysisError(f"vanishing component in sector {xs}")
    # pairing of X with its single largest basis term
    coupling = top * top
    us, sigma = _rank1(Ct)
    if sigma < top * (1 - 1e-12):
        raise AnalysisError("rank-one search lost overlap")
    rotations, factors = [], []
    for k, ch in enumerate(xs):
        basis = subspace_basis(ch, d).stack()
        m = np.tensordot(us[k], basis, axes=(0, 0))
        if ch == "B":
            R = rotation_to_e1(us[k])
        elif ch == "A":
            R = antisymmetric_canonical_form(antisymmetric_from_coords(us[k], d)).R
        else:
            R = np.eye(d)
        Rh = lift_rotation(R)
        rotations.append(R)
        factors.append(Rh @ m @ Rh.T)
    X2 = conjugate_local(M, [lift_rotation(R) for R in rotations])
    # M_x is the best rank-one fit of X'' inside the sector
    Mx = sigma * kron_all(factors)
    return Canonicalization(X2, Mx, rotations, xs.canonical_order(d), coupling, hs_inner(X2, Mx))


# -- projection -----------------------------------------------------------------------


def projector_specs(x, d: int) -> list[ProjectorSpec]:
    xs = x if isinstance(x, SectorString) else SectorString(x)
    specs = []
    for ch in xs:
        if d == 2:
            kind = "B" if ch == "B" else "AI"
        elif d == 3:
            kind = "I" if ch == "I" else "PRIME"
        else:
            kind = ch
        specs.append(ProjectorSpec(kind, d))
    return specs


def project_candidate(X2, x, d: int, M=None) -> np.ndarray:
    """Y = Phi[X''] with the per-site averages fitting the sector string."""
    xs = x if isinstance(x, SectorString) else SectorString(x)
    n = xs.n
    Y = tensor_projector(projector_specs(xs, d), X2)
    if d == 2 and xs.n_B == 0:
        # local pieces A (x) 1 .. survive Phi_AI; they are admissible, drop them
        Y = Y - C.local_projection(Y, d, n)
    if M is not None:
        ref = hs_inner(X2, M)
        got = hs_inner(Y, M)
        if abs(got - ref) > 1e-9 * max(1.0, abs(ref)):
            raise AnalysisError(f"projection changed the overlap: {got!r} vs {ref!r}")
        if np.linalg.norm(Y) < 1e-12 and abs(ref) > 1e-9:
            raise AnalysisError("projected candidate vanishes despite non-zero overlap")
    return Y


# -- violation search ----------------------------------------------------------------------


def _site_expansion_basis(ch: str, d: int) -> list[np.ndarray]:
    """Standard product-basis factors used to read off Y's coefficients."""
    if d == 2:
        a = d2_matrices()
        if ch == "B":
            return [a.B0.astype(float), a.B1.astype(float)]
        return [a.A0.astype(float), a.A1.astype(float)]
    sm = standard_matrices(d)
    if ch == "A":
        return [A.astype(float) for A in sm.A]
    if ch == "B":
        return [sm.B.astype(float)]
    return [np.eye(d + 1)]


def expand_standard(Y: np.ndarray, x, d: int) -> dict[tuple, float]:
    """Coefficients ``lambda_j`` of Y in the standard product basis of sector x."""
    xs = x if isinstance(x, SectorString) else SectorString(x)
    bases = [_site_expansion_basis(ch, d) for ch in xs]
    out = {}
    for combo in itertools.product(*[range(len(b)) for b in bases]):
        E = kron_all([bases[k][j] for k, j in enumerate(combo)])
        out[combo] = hs_inner(Y, E) / hs_inner(E, E)
    return out


def _unit(d: int, i: int) -> np.ndarray:
    e = np.zeros(d)
    e[i] = 1.0
    return e


def _block_vector(d: int, j: int) -> np.ndarray:
    """A unit Bloch vector in the image of P_j (0-based block j)."""
    return _unit(d, block_offset(d) - 1 + 2 * j)


def _recipes_general(xs: SectorString, d: int, jvec: tuple) -> list[tuple[str, ConstraintSample]]:
    """Vector choices for d >= 3 following the parity argument on the term ``jvec``."""
    n = xs.n
    A_sites, B_sites = xs.sites("A"), xs.sites("B")
    e1 = _unit(d, 0)
    e2 = _unit(d, 1)
    a = [e1.copy() for _ in range(n)]
    for s in A_sites:
        a[s] = _block_vector(d, jvec[s])
    b = [v.copy() for v in a]
    nA = len(A_sites)
    out = []
    if nA % 2 == 0:
        out.append(("even_nA_diag", ConstraintSample(SECOND_DIAG, a)))
    elif nA == 1 and B_sites:
        k = B_sites[0]
        a[k] = e2
        b[k] = e2
        out.append(("nA1_flip_B", ConstraintSample(SECOND_FLIP, a, b, k + 1)))
    else:
        k = A_sites[0]
        if len(A_sites) > 1:
            b[A_sites[1]] = -a[A_sites[1]]
        out.append(("odd_nA_flip_A", ConstraintSample(SECOND_FLIP, a, b, k + 1)))
    return out


def _choose_d2_term(coeffs: dict, xs: SectorString, tol: float) -> tuple | None:
    ai = [i for i, ch in enumerate(xs) if ch != "B"]
    live = [(j, c) for j, c in coeffs.items() if abs(c) > tol]
    if not live:
        return None
    # most A^(0) among the A/I slots, then largest |alpha|, then lexicographic
    live.sort(key=lambda jc: (-sum(1 for i in ai if jc[0][i] == 0), -abs(jc[1]), jc[0]))
    return live[0][0]


def _recipes_d2(xs: SectorString, jvec: tuple) -> list[tuple[str, ConstraintSample]]:
    n = xs.n
    e1, e2 = _unit(2, 0), _unit(2, 1)
    zero = np.zeros(2)
    ai = [i for i, ch in enumerate(xs) if ch != "B"]
    bs = xs.sites("B")
    a = [zero.copy() for _ in range(n)]
    b = [zero.copy() for _ in range(n)]
    ones = [i for i in ai if jvec[i] == 1]
    if bs:
        k = bs[0]
        for s in bs:
            a[s] = e1.copy() if jvec[s] == 1 else e2.copy()
            b[s] = -a[s]
        rest = ones
        label = "d2_case2"
    else:
        if not ones:
            return []
        k = ones[0]
        a[k] = e1.copy()
        b[k] = e1.copy()
        rest = ones[1:]
        label = "d2_case1"
    for t, s in enumerate(rest):
        a[s] = e1.copy()
        b[s] = e1.copy() if t == 0 else -e1
    kind = SECOND_ZEROPAD if any(np.linalg.norm(v) == 0 for v in a + b) else SECOND_FLIP
    return [(label, ConstraintSample(kind, a, b, k + 1))]


def structured_candidates(Y: np.ndarray, x, d: int, limit: int = 16) -> list[tuple[str, ConstraintSample]]:
    """Recipe vector choices for the dominant terms of Y (largest first)."""
    xs = x if isinstance(x, SectorString) else SectorString(x)
    coeffs = expand_standard(Y, xs, d)
    scale = max((abs(c) for c in coeffs.values()), default=0.0)
    if scale == 0.0:
        return []
    tol = 1e-9 * scale
    out = []
    if d == 2:
        j0 = _choose_d2_term(coeffs, xs, tol)
        if j0 is not None:
            out.extend(_recipes_d2(xs, j0))
        order = sorted((j for j, c in coeffs.items() if abs(c) > tol), key=lambda j: (-abs(coeffs[j]), j))
        for j in order[:limit]:
            if j != j0:
                out.extend(_recipes_d2(xs, j))
        return out
    order = sorted((j for j, c in coeffs.items() if abs(c) > tol), key=lambda j: (-abs(coeffs[j]), j))
    for j in order[:limit]:
        out.extend(_recipes_general(xs, d, j))
    return out


def _random_search(M: np.ndarray, d: int, n: int, rng: np.random.Generator, budget: int, threshold: float):
    """Seeded search over products of spheres for the most negative oriented value.

    Returns (best sample or None, best value, trials used).
    """
    best_val, best = np.inf, None
    used = 0
    while used < budget:
        N = min(BATCH, max(1, (budget - used) // 2))
        P = C.random_unit_batch(rng, N, n, d)
        B = C.random_unit_batch(rng, N, n, d)
        ks = rng.integers(1, n + 1, size=N)
        flip, diag = C.second_order_batch(M, P, B, ks)
        used += 2 * N
        i, j = int(np.argmin(flip)), int(np.argmax(diag))
        if flip[i] < best_val:
            best_val, best = float(flip[i]), (SECOND_FLIP, P[i], B[i], int(ks[i]))
        if -diag[j] < best_val:
            best_val, best = float(-diag[j]), (SECOND_DIAG, P[j], None, None)
        if best_val < threshold:
            break
    if best is not None and best_val >= threshold and used < budget + 1:
        best, best_val, extra = _refine(M, d, n, rng, best, best_val, threshold, budget)
        used += extra
    if best is None or not best_val < threshold:
        return None, best_val, used
    kind, P, B, k = best
    if kind == SECOND_DIAG:
        return ConstraintSample(SECOND_DIAG, list(P)), best_val, used
    return ConstraintSample(SECOND_FLIP, list(P), list(B), k), best_val, used


def _refine(M, d, n, rng, best, best_val, threshold, budget, rounds: int = 40, pop: int = 256):
    """Local moves around the incumbent: Gaussian steps and slot sign flips."""
    kind, P, B, k = best
    used = 0
    step = 0.3
    for _ in range(rounds):
        Pn = P[None] + step * rng.standard_normal((pop, n, d))
        Pn /= np.linalg.norm(Pn, axis=2, keepdims=True)
        if kind == SECOND_FLIP:
            Bn = B[None] + step * rng.standard_normal((pop, n, d))
            Bn /= np.linalg.norm(Bn, axis=2, keepdims=True)
            flips = rng.random((pop, n)) < 1.0 / (2 * n)
            Bn[flips] = -Bn[flips]
            vals, _ = C.second_order_batch(M, Pn, Bn, np.full(pop, k))
        else:
            Bn = Pn
            _, diag = C.second_order_batch(M, Pn, Pn, np.ones(pop, dtype=int))
            vals = -diag
        used += pop
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val = float(vals[i])
            P, B = Pn[i], (Bn[i] if kind == SECOND_FLIP else None)
        else:
            step *= 0.6
        if best_val < threshold:
            break
    return (kind, P, B, k), best_val, used


@dataclass
class SearchOutcome:
    sample: ConstraintSample | None
    value: float
    strategy: str
    trials: int


def violation_search(Y, x, d: int, n: int, rng: np.random.Generator | None = None, options: AnalysisOptions | None = None) -> SearchOutcome:
    """Structured recipes first, then a seeded randomized search."""
    opts = options or AnalysisOptions()
    rng = rng if rng is not None else np.random.default_rng(opts.seed)
    M = np.asarray(Y, dtype=float)
    norm_sq = float(np.sum(M * M))
    threshold = -opts.cert_margin * norm_sq
    trials = 0
    best_val = np.inf
    for label, sample in structured_candidates(M, x, d)[: opts.structured_budget]:
        trials += 1
        val = oriented_value(sample.kind, sample.evaluate(M))
        best_val = min(best_val, val)
        if val < threshold:
            return SearchOutcome(sample, val, label, trials)
    sample, val, used = _random_search(M, d, n, rng, opts.random_budget, threshold)
    trials += used
    best_val = min(best_val, val)
    if sample is not None:
        return SearchOutcome(sample, oriented_value(sample.kind, sample.evaluate(M)), "random", trials)
    return SearchOutcome(None, best_val, "", trials)


def make_certificate(Y: np.ndarray, d: int, n: int, index: int, sector: str, canon: Canonicalization | None, outcome: SearchOutcome) -> ExclusionCertificate:
    entries = sparse_entries(Y)
    D = (d + 1) ** n
    Ys = np.zeros((D, D))
    for i, j, v in entries:
        Ys[i, j] = v
    s = outcome.sample
    raw = s.evaluate(Ys)
    return ExclusionCertificate(
        d=d,
        n=n,
        candidate=index,
        sector=sector,
        order=[i + 1 for i in canon.order] if canon else list(range(1, n + 1)),
        conjugation=[R.tolist() for R in canon.site_rotations] if canon else [],
        Y_entries=entries,
        kind=s.kind,
        k=s.k,
        preps=[list(v) for v in s.preps],
        meas=[list(v) for v in s.meas],
        raw_value=raw,
        value=oriented_value(s.kind, raw),
        norm_Y_sq=float(np.sum(Ys * Ys)),
        strategy=outcome.strategy,
    )


# -- per-direction driver ---------------------------------------------------------------------


def analyze_direction(X: np.ndarray, d: int, n: int, index: int, options: AnalysisOptions) -> DirectionResult:
    rng = np.random.default_rng(np.random.SeedSequence([options.seed, index]))
    x = find_nonlocal_sector(X, d, n)
    canon = canonicalize(X, x, d)
    Y = project_candidate(canon.X2, x, d, canon.M)
    outcome = violation_search(Y, x, d, n, rng, options)
    res = DirectionResult(index, str(x), "unresolved", coupling=canon.coupling, overlap=canon.overlap, trials=outcome.trials, min_value=float(outcome.value))
    if outcome.sample is not None:
        cert = make_certificate(Y, d, n, index, str(x), canon, outcome)
        if cert.value < -options.cert_margin * cert.norm_Y_sq:
            res.status = "certified"
            res.certificate = cert
            res.min_value = cert.value
    return res


def spot_check(X: np.ndarray, d: int, n: int, samples: int, seed) -> float:
    """Smallest oriented second-order value over random unit tuples."""
    rng = np.random.default_rng(seed)
    M = np.asarray(X, dtype=float)
    lo = np.inf
    done = 0
    while done < samples:
        N = min(BATCH, samples - done)
        P = C.random_unit_batch(rng, N, n, d)
        B = C.random_unit_batch(rng, N, n, d)
        ks = rng.integers(1, n + 1, size=N)
        flip, diag = C.second_order_batch(M, P, B, ks)
        lo = min(lo, float(flip.min()), float((-diag).min()))
        done += N
    return lo


# -- nonlocal complement ---------------------------------------------------------------------


def _coord_site_projector(space: GeneratorSpace, label: str) -> np.ndarray:
    Q = space.Q
    return Q.T @ site_superoperator(label, space.d) @ Q


def sector_adapted_basis(space: GeneratorSpace) -> dict[str, np.ndarray]:
    """Split the null space into its sector pieces (coordinates w.r.t. the site frame).

    Each piece is an orthonormal basis of (null space projected on S_x); the
    null space is a direct sum of sectors, so the pieces together span it.
    """
    d, n = space.d, space.n
    q = space.Q.shape[1]
    site_P = {ch: _coord_site_projector(space, ch) for ch in "ABI"}
    out = {}
    Cc = space.coords
    for x in all_sectors(n):
        if x.n_A == 0:
            continue
        T = Cc.reshape((Cc.shape[0],) + (q,) * n)
        for k, ch in enumerate(x):
            T = np.moveaxis(np.tensordot(T, site_P[ch], axes=([1 + k], [1])), -1, 1 + k)
        P = T.reshape(Cc.shape[0], -1)
        _, s, Vt = np.linalg.svd(P, full_matrices=False)
        r = int(np.sum(s > 1e-8 * max(s[0], 1e-300))) if s.size else 0
        if r:
            out[str(x)] = C._mgs(Vt[:r])
    return out


def _to_coords(space: GeneratorSpace, vectors: np.ndarray) -> np.ndarray:
    n, dim = space.n, space.d + 1
    V = np.asarray(vectors).reshape((-1,) + (dim,) * (2 * n))
    perm = [0]
    for k in range(n):
        perm += [1 + k, 1 + n + k]
    T = V.transpose(perm).reshape((V.shape[0],) + (dim * dim,) * n)
    for k in range(n):
        T = np.moveaxis(np.tensordot(T, space.Q, axes=([1 + k], [0])), -1, 1 + k)
    return T.reshape(V.shape[0], -1)


def _threads(options: AnalysisOptions) -> int:
    if options.threads:
        return max(1, int(options.threads))
    env = os.environ.get("GBITLAB_THREADS")
    return max(1, int(env)) if env else 1


def analyze(d: int, n: int, options: AnalysisOptions | None = None) -> AnalysisReport:
    opts = options or AnalysisOptions()
    if d == 1:
        raise AnalysisError("classical bit: continuous-group analysis not applicable")
    if d < 1 or n < 1:
        raise AnalysisError("need d >= 2 and n >= 1")
    t0 = time.perf_counter()
    space = C.first_order_null_space(d, n, opts.seed, opts.svd_tol)
    t_null = time.perf_counter()
    gloc = C.local_algebra_basis(d, n)
    gloc_coords = _to_coords(space, gloc.vectors)
    gloc_resid = float(np.max(np.linalg.norm(space.coords.T @ (space.coords @ gloc_coords.T) - gloc_coords.T, axis=0), initial=0.0))
    pieces = sector_adapted_basis(space)
    sector_dims = {k: int(v.shape[0]) for k, v in pieces.items()}
    nonlocal_keys = [k for k in pieces if not SectorString(k).is_local]
    nonlocal_coords = np.vstack([pieces[k] for k in nonlocal_keys]) if nonlocal_keys else np.zeros((0, space.coords.shape[1]))
    cross = float(np.max(np.abs(nonlocal_coords @ gloc_coords.T), initial=0.0))
    checks = {
        "gloc_in_null_space_residual": gloc_resid,
        "nonlocal_gloc_overlap": cross,
        "sector_dims_sum": int(sum(sector_dims.values())),
    }
    survivors = []
    directions_coords = nonlocal_coords
    if d == 3 and nonlocal_coords.shape[0]:
        from .survivors import survivor_search

        surv = survivor_search(space, pieces, opts)
        survivors = surv.records
        directions_coords = np.vstack([surv.survivor_coords, surv.complement_coords])
        checks.update(surv.checks)
    t_split = time.perf_counter()

    n_surv = sum(r["count"] for r in survivors)
    results: list[DirectionResult] = []

    def run(i: int) -> DirectionResult:
        X = space._materialize(directions_coords[i : i + 1])[0].reshape((d + 1) ** n, (d + 1) ** n)
        if i < n_surv:
            lo = spot_check(X, d, n, opts.spot_checks, np.random.SeedSequence([opts.seed, i, 1]))
            status = "survivor" if lo >= -opts.constraint_tol else "unresolved"
            return DirectionResult(i, find_nonlocal_sector(X, d, n).symbols, status, trials=opts.spot_checks, min_value=lo)
        return analyze_direction(X, d, n, i, opts)

    idx = range(directions_coords.shape[0])
    threads = _threads(opts)
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(run, idx))
    else:
        results = [run(i) for i in idx]
    t_end = time.perf_counter()
    report = AnalysisReport(
        d=d,
        n=n,
        null_dim=space.dim,
        gloc_dim=gloc.dim,
        nonlocal_dim=int(directions_coords.shape[0]),
        rank_gap=float(space.rank_gap),
        sector_dims=sector_dims,
        directions=results,
        survivors=survivors,
        survivor_space_dim=(gloc.dim + n_surv) if d == 3 else 0,
        checks=checks,
        seed=opts.seed,
        tolerances={"svd_cutoff": opts.svd_tol, "constraint_tol": opts.constraint_tol, "cert_margin": opts.cert_margin},
        budgets={"structured": opts.structured_budget, "random": opts.random_budget, "spot_checks": opts.spot_checks},
        runtimes={"null_space": t_null - t0, "split": t_split - t_null, "directions": t_end - t_split, "total": t_end - t0} if opts.timings else None,
    )
    return report
