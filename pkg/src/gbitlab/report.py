"""JSON records for reports, certificates, circuits and distributions.

Keys are emitted in a fixed order and floats in shortest round-trip form, so
equal records produce byte-identical files. Non-finite floats are written as
the strings "inf", "-inf", "nan".
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .analyzer import AnalysisReport, DirectionResult
from .bloch import Rotation
from .certificates import ExclusionCertificate
from .circuits import Circuit, Distribution, ExpGate, LocalGate, QuantumGate, RawGate, correlation_check

SCHEMA = "gbitlab/1"


class SchemaError(ValueError):
    """A file does not match the expected record layout."""


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    return obj


def dumps(record: dict) -> str:
    return json.dumps(_clean(record), indent=1, ensure_ascii=False, allow_nan=False) + "\n"


def _float(v) -> float:
    # float() also parses the "inf" / "nan" spellings used above
    return float(v)


# -- certificates -------------------------------------------------------------


def certificate_to_dict(c: ExclusionCertificate) -> dict:
    return {
        "schema": SCHEMA,
        "type": "certificate",
        "d": c.d,
        "n": c.n,
        "candidate": c.candidate,
        "sector": c.sector,
        "order": list(c.order),
        "conjugation": c.conjugation,
        "Y": {"dim": c.D, "entries": [[i, j, v] for i, j, v in c.Y_entries]},
        "constraint": {"kind": c.kind, "k": c.k, "preps": c.preps, "meas": c.meas},
        "raw_value": c.raw_value,
        "value": c.value,
        "norm_Y_sq": c.norm_Y_sq,
        "margin": c.margin,
        "strategy": c.strategy,
    }


def _require(rec: dict, key: str, where: str):
    if not isinstance(rec, dict):
        raise SchemaError(f"{where}: expected an object")
    if key not in rec:
        raise SchemaError(f"{where}.{key}: missing field")
    return rec[key]


def certificate_from_dict(rec: dict, where: str = "certificate") -> ExclusionCertificate:
    if _require(rec, "type", where) != "certificate":
        raise SchemaError(f"{where}.type: expected 'certificate'")
    Y = _require(rec, "Y", where)
    con = _require(rec, "constraint", where)
    entries = _require(Y, "entries", f"{where}.Y")
    try:
        parsed = [(int(i), int(j), _float(v)) for i, j, v in entries]
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{where}.Y.entries: expected [row, col, value] triples ({exc})") from None
    k = _require(con, "k", f"{where}.constraint")
    return ExclusionCertificate(
        d=int(_require(rec, "d", where)),
        n=int(_require(rec, "n", where)),
        candidate=int(_require(rec, "candidate", where)),
        sector=str(_require(rec, "sector", where)),
        order=list(_require(rec, "order", where)),
        conjugation=_require(rec, "conjugation", where),
        Y_entries=parsed,
        kind=str(_require(con, "kind", f"{where}.constraint")),
        k=None if k is None else int(k),
        preps=[[_float(x) for x in v] for v in _require(con, "preps", f"{where}.constraint")],
        meas=[[_float(x) for x in v] for v in _require(con, "meas", f"{where}.constraint")],
        raw_value=_float(_require(rec, "raw_value", where)),
        value=_float(_require(rec, "value", where)),
        norm_Y_sq=_float(_require(rec, "norm_Y_sq", where)),
        strategy=str(rec.get("strategy", "")),
    )


# -- analysis reports ------------------------------------------------------------


def report_to_dict(r: AnalysisReport) -> dict:
    out = {
        "schema": SCHEMA,
        "type": "analysis_report",
        "d": r.d,
        "n": r.n,
        "conclusion": r.conclusion,
        "counts": r.counts,
        "first_order": {
            "null_dim": r.null_dim,
            "rank_gap": r.rank_gap,
            "probes": "e_i, -e_i, (e_i+e_j)/sqrt2, (e_i-e_j)/sqrt2 per site, plus random tuples",
        },
        "gloc_dim": r.gloc_dim,
        "nonlocal_dim": r.nonlocal_dim,
        "sector_dims": dict(sorted(r.sector_dims.items())),
        "directions": [
            {
                "index": x.index,
                "sector": x.sector,
                "status": x.status,
                "coupling": x.coupling,
                "overlap": x.overlap,
                "trials": x.trials,
                "min_value": x.min_value,
            }
            for x in r.directions
        ],
        "certificates": [certificate_to_dict(c) for c in r.certificates],
        "survivors": {"space_dim": r.survivor_space_dim, "families": r.survivors},
        "checks": r.checks,
        "seed": r.seed,
        "tolerances": r.tolerances,
        "budgets": r.budgets,
    }
    if r.runtimes is not None:
        out["runtimes"] = r.runtimes
    return out


def report_from_dict(rec: dict) -> AnalysisReport:
    if _require(rec, "type", "report") != "analysis_report":
        raise SchemaError("report.type: expected 'analysis_report'")
    certs = {}
    for i, c in enumerate(_require(rec, "certificates", "report")):
        cert = certificate_from_dict(c, f"report.certificates[{i}]")
        certs[cert.candidate] = cert
    dirs = []
    for i, x in enumerate(_require(rec, "directions", "report")):
        w = f"report.directions[{i}]"
        idx = int(_require(x, "index", w))
        dirs.append(
            DirectionResult(
                idx,
                str(_require(x, "sector", w)),
                str(_require(x, "status", w)),
                certs.get(idx),
                _float(_require(x, "coupling", w)),
                _float(_require(x, "overlap", w)),
                int(_require(x, "trials", w)),
                _float(_require(x, "min_value", w)),
            )
        )
    fo = _require(rec, "first_order", "report")
    surv = _require(rec, "survivors", "report")
    return AnalysisReport(
        d=int(rec["d"]),
        n=int(rec["n"]),
        null_dim=int(fo["null_dim"]),
        gloc_dim=int(rec["gloc_dim"]),
        nonlocal_dim=int(rec["nonlocal_dim"]),
        rank_gap=_float(fo["rank_gap"]),
        sector_dims=dict(rec["sector_dims"]),
        directions=dirs,
        survivors=list(surv["families"]),
        survivor_space_dim=int(surv["space_dim"]),
        checks=dict(rec["checks"]),
        seed=int(rec["seed"]),
        tolerances=dict(rec["tolerances"]),
        budgets=dict(rec["budgets"]),
        runtimes=rec.get("runtimes"),
    )


# -- circuits ---------------------------------------------------------------------


def _matrix_field(v, where: str) -> np.ndarray:
    if isinstance(v, dict):
        dim = int(_require(v, "dim", where))
        M = np.zeros((dim, dim))
        for t, e in enumerate(_require(v, "entries", where)):
            try:
                i, j, x = e
                M[int(i), int(j)] = _float(x)
            except (TypeError, ValueError, IndexError) as exc:
                raise SchemaError(f"{where}.entries[{t}]: bad entry ({exc})") from None
        return M
    try:
        M = np.array(v, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{where}: expected a numeric matrix ({exc})") from None
    if M.ndim != 2:
        raise SchemaError(f"{where}: expected a 2-d matrix")
    return M


def _vector_list(v, where: str, n: int, d: int) -> list:
    if not isinstance(v, list) or len(v) != n:
        raise SchemaError(f"{where}: expected a list of {n} vectors")
    out = []
    for i, a in enumerate(v):
        try:
            arr = np.array(a, dtype=float)
        except (TypeError, ValueError):
            raise SchemaError(f"{where}[{i}]: expected numbers") from None
        if arr.shape != (d,):
            raise SchemaError(f"{where}[{i}]: expected {d} components")
        out.append(arr)
    return out


def circuit_from_dict(rec: dict) -> Circuit:
    d = _require(rec, "d", "circuit")
    n = _require(rec, "n", "circuit")
    if not isinstance(d, int) or not isinstance(n, int):
        raise SchemaError("circuit.d / circuit.n: expected integers")
    preps = _vector_list(_require(rec, "preps", "circuit"), "circuit.preps", n, d)
    meas = _vector_list(_require(rec, "meas", "circuit"), "circuit.meas", n, d)
    gates = []
    for i, g in enumerate(rec.get("gates", [])):
        w = f"circuit.gates[{i}]"
        kind = _require(g, "type", w)
        if kind == "local":
            site = _require(g, "site", w)
            if not isinstance(site, int):
                raise SchemaError(f"{w}.site: expected an integer")
            try:
                R = Rotation(_matrix_field(_require(g, "rotation", w), f"{w}.rotation"))
            except ValueError as exc:
                raise SchemaError(f"{w}.rotation: {exc}") from None
            gates.append(LocalGate(site, R))
        elif kind == "exp":
            gates.append(ExpGate(_matrix_field(_require(g, "generator", w), f"{w}.generator"), _float(_require(g, "t", w))))
        elif kind == "raw":
            gates.append(RawGate(_matrix_field(_require(g, "matrix", w), f"{w}.matrix")))
        elif kind == "quantum":
            sites = _require(g, "sites", w)
            theta = g.get("theta")
            gates.append(QuantumGate(str(_require(g, "name", w)), tuple(int(s) for s in sites), None if theta is None else _float(theta)))
        else:
            raise SchemaError(f"{w}.type: unknown gate type {kind!r}")
    try:
        return Circuit(d, n, preps, gates, meas)
    except ValueError as exc:
        raise SchemaError(f"circuit: {exc}") from None


def distribution_to_dict(c: Circuit, dist: Distribution) -> dict:
    return {
        "schema": SCHEMA,
        "type": "distribution",
        "d": c.d,
        "n": c.n,
        "outcomes": [{"outcome": k, "p": v} for k, v in dist.as_dict().items()],
        "correlation_residual": correlation_check(dist),
    }


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
