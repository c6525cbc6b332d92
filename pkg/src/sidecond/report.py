"""JSON and text reports.

A report is a plain dict::

    {"schema": 1, "command": {"name": ..., "argv": [...]},
     "result": {...}, "exit_status": 0}

Every ``result`` carries ``kind``, ``verdict`` and ``status`` (one of
``definite``, ``inconclusive``, ``cap_exceeded``, ``error``).  Text mode is
rendered from the same dict, so both modes state the same verdicts.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

from .groebner import VarietyIdeal, dimension, contains_one
from .invariants import ELIMINATION_CAP, ChainResult, InvarianceCertificate, LaSalleRelation
from .polycore import Polynomial

SCHEMA_VERSION = 1
EXIT_CODES = {"definite": 0, "error": 1, "inconclusive": 2, "cap_exceeded": 3}


def poly(p: Polynomial | None):
    return None if p is None else str(p)


def polys(ps) -> list:
    return [str(p) for p in ps]


def certificate_json(cert: InvarianceCertificate | None, f=None):
    if cert is None:
        return None
    out = {
        "kind": cert.kind,
        "invariant": cert.invariant,
        "generators": polys(cert.generators),
        "cofactors": [None if row is None else polys(row) for row in cert.cofactors],
        "radical_attestations": [str(a) for a in cert.radical_attestations],
        "witness": poly(cert.witness),
        "witness_image": poly(cert.witness_image),
        "note": cert.note,
    }
    if f is not None and cert.invariant:
        out["verified"] = cert.verify(f)
    return out


def ideal_json(I: VarietyIdeal) -> dict:
    out = {"generators": polys(I.generators)}
    if I.basis is not None:
        out["basis"] = polys(I.basis)
        out["order"] = str(I.order)
    return out


def chain_json(res: ChainResult, f) -> dict:
    I = res.ideal
    dim = None
    if res.stabilized and res.empty is False:
        dim = dimension(I, f.ctx.states)
    if not res.stabilized:
        verdict, status = "not_stabilized", "cap_exceeded"
    elif res.empty:
        verdict, status = "empty", "definite"
    elif res.certificate is not None and res.certificate.invariant:
        verdict, status = "invariant", "definite"
    else:
        verdict = res.certificate.kind if res.certificate else "unknown"
        status = "inconclusive"
    return {
        "kind": "chain",
        "verdict": verdict,
        "status": status,
        "gammas": polys(res.gammas),
        "stabilized": res.stabilized,
        "K": res.K,
        "rounds": [{"index": r.index, "new_generators": polys(r.new_generators),
                    "basis_size": r.basis_size} for r in res.rounds],
        "ideal": ideal_json(I),
        "empty": res.empty,
        "dimension": dim,
        "certificate": certificate_json(res.certificate, f),
    }


def invariant_json(I: VarietyIdeal, cert: InvarianceCertificate, f) -> dict:
    status = "inconclusive" if cert.kind == "inconclusive" else "definite"
    return {
        "kind": "invariant",
        "verdict": cert.kind,
        "status": status,
        "ideal": ideal_json(I.with_basis()),
        "empty": contains_one(I),
        "certificate": certificate_json(cert, f),
    }


def lasalle_json(rel: LaSalleRelation, f) -> dict:
    if rel.definite:
        status = "definite"
    elif rel.verdict == ELIMINATION_CAP:
        status = "cap_exceeded"
    else:
        status = "inconclusive"
    return {
        "kind": "lasalle",
        "verdict": rel.verdict,
        "status": status,
        "theta": str(rel.theta),
        "k": rel.k,
        "mu": poly(rel.mu),
        "mu_verified": rel.mu_verified,
        "u_names": list(rel.u_names),
        "other_relations": polys(rel.other_relations),
        "nondegeneracy": poly(rel.nondegeneracy),
        "lie_chain": polys(rel.lie_chain),
        "Z": None if rel.Z is None else ideal_json(rel.Z),
        "Z_empty": rel.Z_empty,
        "Z_dimension": rel.Z_dimension,
        "certificate": certificate_json(rel.certificate, f),
    }


def make_report(name: str, argv, result: dict, exit_status: int | None = None) -> dict:
    if exit_status is None:
        exit_status = EXIT_CODES[result.get("status", "definite")]
    return {"schema": SCHEMA_VERSION, "command": {"name": name, "argv": list(argv)},
            "result": result, "exit_status": exit_status}


def render_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def parse_json(text: str) -> dict:
    return json.loads(text)


@lru_cache(maxsize=1)
def load_schema() -> dict:
    text = resources.files("sidecond").joinpath("report.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate(report: dict) -> None:
    """Raise jsonschema.ValidationError if the report does not conform."""
    import jsonschema
    jsonschema.validate(report, load_schema())


# ---- text ----------------------------------------------------------------

_COLORS = {"definite": "\033[32m", "inconclusive": "\033[33m", "cap_exceeded": "\033[33m",
           "error": "\033[31m"}
_RESET = "\033[0m"


def render_text(report: dict, color: bool = False) -> str:
    res = report["result"]
    head = f"{report['command']['name']}: {res.get('verdict')}"
    status = res.get("status", "definite")
    if status != "definite":
        head += f" ({status})"
    if color:
        head = _COLORS.get(status, "") + head + _RESET
    lines = [head]
    for k in sorted(res):
        if k in ("verdict", "status", "kind"):
            continue
        _dump(lines, k, res[k], 1)
    lines.append(f"exit status: {report['exit_status']}")
    return "\n".join(lines) + "\n"


def _dump(lines: list, key, value, depth: int) -> None:
    pad = "  " * depth
    label = f"{pad}{key}:" if key is not None else f"{pad}-"
    if isinstance(value, dict):
        if not value:
            lines.append(f"{label} {{}}")
            return
        lines.append(label)
        for k in sorted(value):
            _dump(lines, k, value[k], depth + 1)
    elif isinstance(value, list):
        if not value:
            lines.append(f"{label} []")
        elif all(not isinstance(v, (dict, list)) for v in value):
            if sum(len(str(v)) for v in value) < 70:
                lines.append(f"{label} " + ", ".join(_scalar(v) for v in value))
            else:
                lines.append(label)
                for v in value:
                    lines.append(f"{pad}  - {_scalar(v)}")
        else:
            lines.append(label)
            for v in value:
                _dump(lines, None, v, depth + 1)
    else:
        lines.append(f"{label} {_scalar(value)}")


def _scalar(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return "%.6g" % v
    return str(v)
