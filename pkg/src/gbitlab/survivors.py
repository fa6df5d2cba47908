"""Search for second-order survivors at d = 3.

For d = 3 both A (through the Hodge star) and B carry the vector
representation of SO(3), so sectors with the same support J (the non-I
sites) are isomorphic. Candidate subspaces are therefore

    E_c = { sum_x c_x iota_x(T) : T in (R^3)^{(x)|J|} }

with ``x`` running over the {A,B} strings on J containing an A. A Lie
algebra of admissible generators must be closed under commutators, so we
look for unit ``c`` with every commutator of two elements of E_c inside the
first-order null space, then confirm each direction by random second-order
spot checks. Whatever is left goes back to the exclusion pipeline.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from . import constraints as C
from .subspaces import A_matrix, B_matrix

PAIR_CAP = 64
STARTS = 24
ACCEPT = 1e-9
SCREEN_SAMPLES = 2_000


def hodge(v) -> np.ndarray:
    """Antisymmetric ``eps(v)`` with ``eps(v) u = v x u``."""
    x, y, z = np.asarray(v, dtype=float)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def _site_embed(ch: str, i: int) -> np.ndarray:
    e = np.eye(3)[i]
    if ch == "A":
        return A_matrix(hodge(e)) / np.sqrt(2.0)
    return B_matrix(e) / np.sqrt(2.0)


def iota(x: str, t: tuple, n: int) -> np.ndarray:
    """Image of the basis tensor ``e_t`` in sector x (I sites get 1/2)."""
    it = iter(t)
    mats = [np.eye(4) / 2.0 if ch == "I" else _site_embed(ch, next(it)) for ch in x]
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def support_strings(J: tuple, n: int) -> list[str]:
    out = []
    for labels in itertools.product("AB", repeat=len(J)):
        if "A" not in labels:
            continue
        s = ["I"] * n
        for j, ch in zip(J, labels):
            s[j] = ch
        out.append("".join(s))
    return out


@dataclass
class SurvivorSearch:
    survivor_coords: np.ndarray
    complement_coords: np.ndarray
    records: list
    checks: dict = field(default_factory=dict)


def _residual_tensor(strings, n: int, rng) -> np.ndarray:
    """K[x, y, p] = part of [iota_x(s_p), iota_y(t_p)] outside the null space."""
    k = len([ch for ch in strings[0] if ch != "I"])
    ts = list(itertools.product(range(3), repeat=k))
    pairs = list(itertools.combinations(range(len(ts)), 2))
    if len(pairs) > PAIR_CAP:
        sel = rng.choice(len(pairs), PAIR_CAP, replace=False)
        pairs = [pairs[i] for i in sorted(sel)]
    imgs = {x: np.array([iota(x, t, n) for t in ts]) for x in strings}
    m = len(strings)
    D = 4**n
    K = np.zeros((m, m, len(pairs), D * D))
    for a, x in enumerate(strings):
        for b, y in enumerate(strings):
            S = imgs[x][[p for p, _ in pairs]]
            T = imgs[y][[q for _, q in pairs]]
            comm = S @ T - T @ S
            K[a, b] = (comm - C.n1_projection(comm, 3, n)).reshape(len(pairs), -1)
    return K


def _solve_lines(K: np.ndarray, rng, starts: int = STARTS) -> list[tuple[np.ndarray, float]]:
    """Unit c with sum_{x,y} c_x c_y K[x,y] = 0, up to sign."""
    m = K.shape[0]
    flat = K.reshape(m, m, -1)
    scale = max(np.linalg.norm(flat, axis=2).max(), 1e-300)

    def F(c):
        u = c / np.linalg.norm(c)
        return np.einsum("a,b,abr->r", u, u, flat) / scale

    found = []
    for _ in range(starts):
        c0 = rng.standard_normal(m)
        sol = least_squares(F, c0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
        c = sol.x / np.linalg.norm(sol.x)
        res = float(np.linalg.norm(F(c)))
        if res > ACCEPT:
            continue
        c = c * np.sign(c[np.argmax(np.abs(c) > 1e-8)])
        if any(abs(abs(c @ f) - 1.0) < 1e-6 for f, _ in found):
            continue
        found.append((c, res))
    found.sort(key=lambda cf: tuple(-np.round(cf[0], 8)))
    return found


def survivor_search(space, pieces: dict, options) -> SurvivorSearch:
    from .analyzer import _to_coords, spot_check

    d, n = space.d, space.n
    if d != 3:
        raise ValueError("the survivor search is specific to d = 3")
    rng = np.random.default_rng(np.random.SeedSequence([options.seed, 3, 3]))
    surv, comp, records = [], [], []
    for size in range(2, n + 1):
        for J in itertools.combinations(range(n), size):
            strings = support_strings(J, n)
            ts = list(itertools.product(range(3), repeat=size))
            K = _residual_tensor(strings, n, rng)
            lines = _solve_lines(K, rng)
            accepted = []
            for c, res in lines:
                # quick screen before accepting a line as survivor family
                dirs = [sum(cx * iota(x, t, n) for cx, x in zip(c, strings)) for t in ts[:3]]
                lo = min(spot_check(X, d, n, SCREEN_SAMPLES, rng.integers(2**32)) for X in dirs)
                if lo < -options.constraint_tol:
                    continue
                span = np.array([a for a, _ in accepted] + [c])
                if np.linalg.matrix_rank(span, tol=1e-8) < len(span):
                    continue
                accepted.append((c, res))
            for c, res in accepted:
                vecs = np.array([sum(cx * iota(x, t, n) for cx, x in zip(c, strings)).ravel() for t in ts])
                surv.append(_to_coords(space, vecs))
                records.append(
                    {
                        "support": [j + 1 for j in J],
                        "strings": strings,
                        "c": [float(v) for v in c],
                        "count": len(ts),
                        "closure_residual": res,
                    }
                )
            cs = np.array([c for c, _ in accepted]).reshape(len(accepted), len(strings))
            # orthonormal complement of the accepted c's inside R^m
            _, s, Vt = np.linalg.svd(cs, full_matrices=True) if len(accepted) else (None, np.zeros(0), np.eye(len(strings)))
            rest = Vt[len(accepted):]
            for c in rest:
                vecs = np.array([sum(cx * iota(x, t, n) for cx, x in zip(c, strings)).ravel() for t in ts])
                comp.append(_to_coords(space, vecs))
    q = space.coords.shape[1]
    S = np.vstack(surv) if surv else np.zeros((0, q))
    R = np.vstack(comp) if comp else np.zeros((0, q))
    nonlocal_dim = sum(v.shape[0] for k, v in pieces.items() if not (k.count("A") == 1 and "B" not in k))
    checks = {"survivor_directions": int(S.shape[0]), "complement_directions": int(R.shape[0])}
    if S.shape[0] + R.shape[0] != nonlocal_dim:
        raise RuntimeError(f"survivor split covers {S.shape[0] + R.shape[0]} of {nonlocal_dim} directions")
    allc = np.vstack([S, R])
    checks["split_rank"] = int(np.linalg.matrix_rank(allc, tol=1e-8))
    # every direction lies in the null space: coordinates reproduce themselves under projection
    P = space.coords
    checks["split_in_null_space_residual"] = float(np.max(np.abs(allc - (allc @ P.T) @ P), initial=0.0))
    if n <= 3:
        checks["oracle_membership_max"] = _oracle_membership(space, S)
    return SurvivorSearch(S, R, records, checks)


def _oracle_membership(space, S: np.ndarray) -> float:
    """Largest distance of a quantum generator image from g_loc + survivors."""
    from .analyzer import _to_coords
    from .quantum_oracle import adjoint_generator, traceless_hermitian_basis

    n = space.n
    gloc = _to_coords(space, C.local_algebra_basis(3, n).vectors)
    B = np.vstack([gloc, S])
    U, s, _ = np.linalg.svd(B.T, full_matrices=False)
    U = U[:, s > 1e-10 * s[0]]
    imgs = np.array([adjoint_generator(h).matrix.ravel() for h in traceless_hermitian_basis(n)])
    full = space._materialize(U.T)  # orthonormal basis, flattened
    worst = 0.0
    for v in imgs:
        v = v / np.linalg.norm(v)
        worst = max(worst, float(np.linalg.norm(v - full.T @ (full @ v))))
    return worst
