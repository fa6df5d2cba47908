"""Command-line front end.

Exit codes: 0 success, 1 error (including failed verification), 2 search
budget exhausted during ``analyze``.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import report as R
from .analyzer import RANDOM_BUDGET, SPOT_CHECKS, STRUCTURED_BUDGET, AnalysisError, AnalysisOptions, analyze, canonicalize, find_nonlocal_sector, project_candidate
from .bloch import rotation_to_e1
from .certificates import CERT_MARGIN, REPRODUCE_TOL, verify_certificate
from .circuits import evaluate
from .constraints import SVD_TOL
from .subspaces import SectorString, antisymmetric_canonical_form
from .tensor import MAX_DIM, check_capacity

EXIT_OK, EXIT_ERROR, EXIT_BUDGET = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    d: int | None = None
    n: int | None = None
    seed: int = 0
    svd_cutoff: float = SVD_TOL
    constraint_tol: float = 1e-8
    cert_margin: float = CERT_MARGIN
    structured_budget: int = STRUCTURED_BUDGET
    random_budget: int = RANDOM_BUDGET
    spot_checks: int = SPOT_CHECKS
    threads: int | None = None

    def validate(self) -> None:
        for name in ("svd_cutoff", "constraint_tol", "cert_margin"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("structured_budget", "random_budget", "spot_checks"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.d is not None and self.n is not None:
            if self.d == 1:
                raise ValueError("classical bit: continuous-group analysis not applicable")
            if self.d < 1 or self.n < 1:
                raise ValueError("d and n must be positive")
            check_capacity(self.d, self.n)


def _write(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _read(path: str):
    with open(path, encoding="utf-8") as fh:
        return R.loads(fh.read())


def cmd_analyze(args) -> int:
    cfg = RunConfig(
        "analyze",
        args.d,
        args.n,
        args.seed,
        args.svd_cutoff,
        args.constraint_tol,
        args.cert_margin,
        args.structured_budget,
        args.budget,
        args.spot_checks,
        args.threads,
    )
    cfg.validate()
    opts = AnalysisOptions(
        seed=cfg.seed,
        svd_tol=cfg.svd_cutoff,
        constraint_tol=cfg.constraint_tol,
        cert_margin=cfg.cert_margin,
        structured_budget=cfg.structured_budget,
        random_budget=cfg.random_budget,
        spot_checks=cfg.spot_checks,
        threads=cfg.threads,
        timings=args.timings,
    )
    rep = analyze(cfg.d, cfg.n, opts)
    _write(R.dumps(R.report_to_dict(rep)), args.out)
    c = rep.counts
    print(
        f"d={rep.d} n={rep.n}: null space {rep.null_dim}, local {rep.gloc_dim}, nonlocal {rep.nonlocal_dim}; "
        f"certified {c['certified']}, survivors {c['survivor']}, unresolved {c['unresolved']} -> {rep.conclusion}",
        file=sys.stderr,
    )
    return EXIT_BUDGET if c["unresolved"] else EXIT_OK


def cmd_simulate(args) -> int:
    circ = R.circuit_from_dict(_read(args.circuit))
    dist = evaluate(circ)
    _write(R.dumps(R.distribution_to_dict(circ, dist)), args.out)
    return EXIT_OK


def _matrix_input(rec: dict, key: str) -> np.ndarray:
    return R._matrix_field(R._require(rec, key, "input"), f"input.{key}")


def cmd_project(args) -> int:
    """Apply the pipeline's sector projector to an operator file {d, n, operator}."""
    rec = _read(args.input)
    d, n = int(R._require(rec, "d", "input")), int(R._require(rec, "n", "input"))
    X = _matrix_input(rec, "operator")
    x = SectorString(args.sector) if args.sector else find_nonlocal_sector(X, d, n)
    if x.n != n:
        raise ValueError(f"sector {x} has {x.n} sites, operator has {n}")
    Y = project_candidate(X, x, d)
    out = {"schema": R.SCHEMA, "type": "projection", "d": d, "n": n, "sector": str(x), "operator": Y.tolist()}
    _write(R.dumps(out), args.out)
    return EXIT_OK


def cmd_canon(args) -> int:
    """Canonical form of an antisymmetric block, a unit vector, or an operator."""
    rec = _read(args.input)
    d = int(R._require(rec, "d", "input"))
    out = {"schema": R.SCHEMA, "type": "canonical_form", "d": d}
    if "antisymmetric" in rec:
        cf = antisymmetric_canonical_form(_matrix_input(rec, "antisymmetric"))
        out.update({"R": cf.R.tolist(), "lambdas": cf.lambdas.tolist()})
    elif "vector" in rec:
        out["R"] = rotation_to_e1(np.array(rec["vector"], dtype=float)).tolist()
    elif "operator" in rec:
        n = int(R._require(rec, "n", "input"))
        X = _matrix_input(rec, "operator")
        x = SectorString(rec["sector"]) if rec.get("sector") else find_nonlocal_sector(X, d, n)
        c = canonicalize(X, x, d)
        out.update(
            {
                "n": n,
                "sector": str(x),
                "site_rotations": [Rk.tolist() for Rk in c.site_rotations],
                "coupling": c.coupling,
                "overlap": c.overlap,
                "X2": c.X2.tolist(),
                "M": c.M.tolist(),
            }
        )
    else:
        raise R.SchemaError("input: expected one of 'antisymmetric', 'vector', 'operator'")
    _write(R.dumps(out), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    rec = _read(args.cert)
    kind = R._require(rec, "type", "input")
    if kind == "certificate":
        certs = [R.certificate_from_dict(rec)]
    elif kind == "analysis_report":
        certs = [R.certificate_from_dict(c, f"report.certificates[{i}]") for i, c in enumerate(R._require(rec, "certificates", "report"))]
    else:
        raise R.SchemaError(f"input.type: expected 'certificate' or 'analysis_report', got {kind!r}")
    failures = 0
    for c in certs:
        res = verify_certificate(c, args.tol, args.margin)
        if not res.ok:
            failures += 1
            print(f"candidate {c.candidate}: FAIL ({res.message})", file=sys.stderr)
        elif args.verbose:
            print(f"candidate {c.candidate}: ok, value {res.recomputed!r}", file=sys.stderr)
    print(f"{len(certs) - failures}/{len(certs)} certificates verified", file=sys.stderr)
    return EXIT_OK if failures == 0 and certs else EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gbitlab", description="Generator analysis and circuit simulation for gbits.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="run the first/second-order analysis for (d, n)")
    a.add_argument("--d", type=int, required=True)
    a.add_argument("--n", type=int, required=True)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--budget", type=int, default=RANDOM_BUDGET, help="randomized trials per direction")
    a.add_argument("--structured-budget", type=int, default=STRUCTURED_BUDGET)
    a.add_argument("--spot-checks", type=int, default=SPOT_CHECKS)
    a.add_argument("--svd-cutoff", type=float, default=SVD_TOL)
    a.add_argument("--constraint-tol", type=float, default=1e-8)
    a.add_argument("--cert-margin", type=float, default=CERT_MARGIN)
    a.add_argument("--threads", type=int, default=None, help=f"worker threads (default: $GBITLAB_THREADS or 1)")
    a.add_argument("--timings", action="store_true", help="include wall-clock runtimes (breaks byte-determinism)")
    a.add_argument("--out", default=None)
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="evaluate a circuit file")
    s.add_argument("circuit")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_simulate)

    pr = sub.add_parser("project", help="apply the sector projector to an operator file")
    pr.add_argument("input")
    pr.add_argument("--sector", default=None)
    pr.add_argument("--out", default=None)
    pr.set_defaults(func=cmd_project)

    c = sub.add_parser("canon", help="canonical form of a vector, antisymmetric matrix or operator")
    c.add_argument("input")
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_canon)

    v = sub.add_parser("verify-cert", help="re-evaluate a certificate (or all certificates of a report)")
    v.add_argument("cert")
    v.add_argument("--tol", type=float, default=REPRODUCE_TOL)
    v.add_argument("--margin", type=float, default=CERT_MARGIN)
    v.add_argument("--verbose", action="store_true")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (AnalysisError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
