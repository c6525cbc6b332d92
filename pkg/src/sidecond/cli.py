"""Command line entry point: ``sidecond <command> --system FILE ...``.

Exit codes: 0 definite verdicts, 1 usage or parse error, 2 inconclusive,
3 an internal cap was exceeded.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import report as rp
from .groebner import VarietyIdeal
from .invariants import (CapExceeded, certify_invariance, chain_stabilize, convert_differential,
                         lasalle_relation, lasalle_search)
from .lie import VectorField
from .numeric import (integrate, perturbation_study, residual_monitor, trajectory_rows,
                      write_csv)
from .parser import ParseError, parse_expression, parse_rational
from .qss import (LEAF_INCONCLUSIVE, NamedFunction, parametric_case_analysis, qss_conditions,
                  refutation_samples)
from .symmetry import (HintRejected, RelationMissing, partial_symmetry_chain, planar_analysis,
                       symmetry_invariant_sets, verify_relation)
from .sysfile import SystemSpec, parse_system, resolve_system_path, specialize


class UsageError(Exception):
    pass


def _split(values) -> list:
    out = []
    for v in values or []:
        out.extend(x.strip() for x in v.split(",") if x.strip())
    return out


def _assignments(values) -> dict:
    out = {}
    for item in _split(values):
        if "=" not in item:
            raise UsageError(f"expected name=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = parse_rational(v)
    return out


def _defs(spec: SystemSpec, names) -> list:
    return [spec.get_def(n) for n in _split(names)]


def _exprs(spec: SystemSpec, exprs) -> list:
    return [NamedFunction(e, parse_expression(e, spec.ctx), "command line") for e in exprs or []]


def _load(args) -> SystemSpec:
    spec = parse_system(resolve_system_path(args.system))
    values = _assignments(getattr(args, "set", None))
    return specialize(spec, values)


# ---- commands ---------------------------------------------------------------

def cmd_chain(args, spec):
    funcs = _defs(spec, args.gamma) + _exprs(spec, args.expr)
    if not funcs:
        raise UsageError("chain needs --gamma or --expr")
    res = chain_stabilize(spec.f, [d.body for d in funcs], args.max_iter)
    out = rp.chain_json(res, spec.f)
    out["names"] = [d.name for d in funcs]
    return out


def cmd_invariant(args, spec):
    funcs = _defs(spec, args.ideal) + _exprs(spec, args.expr)
    if not funcs:
        raise UsageError("invariant needs --ideal or --expr")
    I = VarietyIdeal(tuple(d.body for d in funcs), spec.ctx)
    out = rp.invariant_json(I, certify_invariance(spec.f, I), spec.f)
    out["names"] = [d.name for d in funcs]
    return out


def cmd_diffside(args, spec):
    phis = _defs(spec, args.phi)
    rhos = _defs(spec, args.rho)
    if not phis:
        raise UsageError("diffside needs --phi")
    gammas = convert_differential(spec.f, [d.body for d in phis], [d.body for d in rhos])
    res = chain_stabilize(spec.f, gammas, args.max_iter)
    out = rp.chain_json(res, spec.f)
    out["kind"] = "chain"
    out["phi"] = [d.name for d in phis]
    out["rho"] = [d.name for d in rhos]
    out["converted"] = rp.polys(gammas)
    return out


def cmd_lasalle(args, spec):
    if args.theta:
        theta = spec.get_def(args.theta).body
    elif args.expr:
        theta = parse_expression(args.expr, spec.ctx)
    else:
        raise UsageError("lasalle needs --theta or --expr")
    return rp.lasalle_json(lasalle_relation(spec.f, theta, args.max_k), spec.f)


def cmd_lasalle_search(args, spec):
    if spec.ctx.params:
        raise UsageError("lasalle-search needs every parameter assigned; use --set "
                         + ",".join(f"{p}=..." for p in spec.ctx.params))
    try:
        res = lasalle_search(spec.f, args.degree, args.max_k)
    except CapExceeded as exc:
        return {"kind": "lasalle_search", "verdict": "cap_exceeded", "status": "cap_exceeded",
                "reason": str(exc)}
    cands = []
    for c in res.candidates:
        cands.append({"theta": str(c.theta), "family": str(c.family), "free": list(c.free),
                      "branch": c.branch, "flags": list(c.flags),
                      "relation": rp.lasalle_json(c.relation, spec.f)})
    unsolved = [{"branch": u.branch, "reason": u.reason,
                 "assignments": {k: str(v) for k, v in sorted(u.assignments.items())},
                 "constraints": rp.polys(u.constraints)} for u in res.unsolved]
    if res.cap_exceeded:
        status = "cap_exceeded"
    elif res.unsolved:
        status = "inconclusive"
    else:
        status = "definite"
    return {"kind": "lasalle_search",
            "verdict": "candidates_found" if cands else "none_found",
            "status": status, "degree": res.degree, "k_tested": res.k_tested,
            "unknowns": list(res.unknowns),
            "monomials": [list(m) for m in res.monomials],
            "constraint_count": res.constraint_count, "candidates": cands,
            "unsolved": unsolved, "cap_exceeded": res.cap_exceeded, "notes": list(res.notes)}


def _relation_json(rel):
    if rel is None:
        return None
    return {"kind": rel.kind, "degree_bound": rel.degree_bound,
            "alphas": rp.polys(rel.alphas), "sigmas": [rp.polys(r) for r in rel.sigmas],
            "verified": rel.verify()}


def cmd_symmetry(args, spec):
    G = [spec.get_vec(n) for n in _split(args.vecs)]
    if not G:
        raise UsageError("symmetry needs --vecs")
    try:
        sets = symmetry_invariant_sets(spec.f, G, args.mode, degree_bound=args.degree_bound)
    except RelationMissing as exc:
        rel = verify_relation(spec.f, G, args.degree_bound)
        return {"kind": "symmetry", "mode": args.mode, "verdict": "refused",
                "status": "inconclusive", "reason": str(exc), "relation": _relation_json(rel)}
    cert = sets.certificate
    rel = sets.relation if sets.relation is not None else verify_relation(
        spec.f, G, args.degree_bound)
    return {"kind": "symmetry", "mode": sets.mode,
            "verdict": "invariant" if cert.invariant else cert.kind,
            "status": "inconclusive" if cert.kind == "inconclusive" else "definite",
            "ideal": rp.ideal_json(sets.ideal.with_basis()),
            "certificate": rp.certificate_json(cert, spec.f),
            "relation": _relation_json(rel), "note": sets.note}


def cmd_partial(args, spec):
    g = spec.get_vec(args.vec)
    res = partial_symmetry_chain(g, spec.f, args.max_k, args.orbital, args.max_iter)
    chain = rp.chain_json(res.chain, spec.f)
    status = chain["status"]
    name = "orbital symmetry" if args.orbital else "symmetry"
    return {"kind": "partial",
            "verdict": f"partial {name}" if res.verdict else f"no partial {name}",
            "status": status, "orbital": res.orbital,
            "brackets": [rp.polys(b) for b in res.brackets],
            "conditions": rp.polys(res.conditions),
            "stopped_early": res.stopped_early, "chain": chain}


def cmd_planar(args, spec):
    g = spec.get_vec(args.vec)
    hints = [parse_expression(h, spec.ctx) for h in args.hint or []]
    try:
        pa = planar_analysis(spec.f, g, hints)
    except HintRejected as exc:
        raise UsageError(str(exc)) from exc
    if pa.degenerate:
        verdict = "degenerate"
    else:
        verdict = "involution" if pa.involution else "not_involution"
    return {"kind": "planar", "verdict": verdict, "status": "definite",
            "theta": str(pa.theta), "A": rp.poly(pa.A), "B": rp.poly(pa.B),
            "identity_holds": pa.identity_holds, "degenerate": pa.degenerate,
            "factors": [{"factor": str(v.factor), "multiplicity": v.multiplicity,
                         "invariant_f": v.invariant_f, "invariant_g": v.invariant_g,
                         "cofactor_f": rp.poly(v.cofactor_f),
                         "cofactor_g": rp.poly(v.cofactor_g), "from_hint": v.from_hint}
                        for v in pa.factors],
            "involution": pa.involution, "alpha": rp.poly(pa.alpha), "beta": rp.poly(pa.beta)}


def _node_json(node):
    return {"label": node.label,
            "conditions": {k: str(v) for k, v in sorted(node.conditions.items())},
            "assumptions": rp.polys(node.assumptions),
            "generators": rp.polys(node.generators),
            "status": node.status, "note": node.note,
            "remainder": rp.poly(node.remainder),
            "certificate": None if node.certificate is None else node.certificate.kind,
            "components": [_component_json(c) for c in node.components],
            "children": [_node_json(c) for c in node.children]}


def _component_json(c):
    return {"generators": rp.polys(c.generators), "dimension": c.dimension,
            "stationary_only": c.stationary_only, "certificate": c.certificate.kind,
            "solved": c.solved}


def cmd_qss(args, spec):
    S = spec.system
    if args.phi:
        phi = spec.get_def(args.phi)
    elif args.target:
        phi = qss_conditions(S, [parse_expression(args.target, spec.ctx)])[0]
    else:
        raise UsageError("qss needs --target or --phi")
    tree = parametric_case_analysis(S, phi, args.depth)
    leaves = [{"conditions": {k: str(v) for k, v in sorted(l.conditions.items())},
               "key": list(l.key), **_component_json(l.component)} for l in tree.leaves]
    out = {"kind": "qss", "verdict": "invariant_leaves_found" if leaves else "no_invariant_leaf",
           "status": "inconclusive" if tree.inconclusive else "definite",
           "phi": {"name": phi.name, "body": str(phi.body), "provenance": phi.provenance},
           "depth": tree.depth, "leaves": leaves, "leaf_count": len(leaves),
           "inconclusive_nodes": [n.label for n in tree.root.walk()
                                  if n.status == LEAF_INCONCLUSIVE],
           "tree": _node_json(tree.root), "notes": list(tree.notes),
           "directions": {"if": "certified by the case tree",
                          "only_if": "refutation samples only" if args.refute else "not checked"}}
    if args.refute:
        points = [_assignments([p.replace(";", ",")]) for p in args.refute]
        out["refutation"] = [{"point": {k: str(v) for k, v in sorted(pt.items())},
                              "checks": [{"set": s, "kind": k} for s, k in rows]}
                             for pt, rows in refutation_samples(S, phi, points)]
    return out


def _require_numeric(spec, values):
    missing = [p for p in spec.ctx.params if p not in values]
    if missing:
        raise UsageError("unassigned parameters: " + ", ".join(missing) + " (use --set)")


def cmd_simulate(args, spec, raw):
    values = _assignments(args.set)
    _require_numeric(raw, values)
    x0 = [float(parse_rational(v)) for v in _split([args.x0])]
    if len(x0) != spec.ctx.nstates:
        raise UsageError(f"--x0 needs {spec.ctx.nstates} values")
    traj = integrate(spec.f, {}, x0, args.dt, args.t_end)
    monitors = _defs(spec, args.monitor)
    rows = residual_monitor(traj, monitors, spec.ctx)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            write_csv(fh, ["t"] + list(spec.ctx.states), trajectory_rows(traj))
    return {"kind": "simulate", "verdict": "truncated" if traj.truncated else "completed",
            "status": "inconclusive" if traj.truncated else "definite",
            "params": {k: str(v) for k, v in sorted(values.items())},
            "h": args.dt, "t_end": args.t_end, "steps": len(traj.t) - 1,
            "final_time": float(traj.t[-1]),
            "final_state": {s: float(v) for s, v in zip(spec.ctx.states, traj.x[-1])},
            "truncated": traj.truncated, "note": traj.note,
            "residuals": [{"name": r.name, "max_abs": r.max_abs, "max_scaled": r.max_scaled,
                           "t_max_abs": r.t_max_abs, "t_max_scaled": r.t_max_scaled}
                          for r in rows]}


def cmd_perturb(args, spec):
    phi = spec.get_def(args.phi)
    values = [parse_rational(v) for v in _split([args.values])]
    if not values:
        raise UsageError("--values needs at least one value")
    x0 = {k: v for k, v in _assignments(args.x0).items()}
    table = perturbation_study(spec.f, phi, args.knob, values, args.t_end, args.dt, x0=x0)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            write_csv(fh, [args.knob, "max_scaled", "max_abs", "truncated"],
                      [(v, s, a, int(t)) for v, s, a, t in table.rows])
    ok = table.monotone
    return {"kind": "perturb", "verdict": "monotone" if ok else "not_monotone",
            "status": "definite" if ok else "inconclusive",
            "phi": {"name": phi.name, "body": str(phi.body)}, "knob": args.knob,
            "solved_for": table.solved_for, "tolerance": table.tolerance,
            "t_end": args.t_end, "h": args.dt,
            "rows": [{"value": v, "max_scaled": s, "max_abs": a, "truncated": t}
                     for v, s, a, t in table.rows]}


# ---- argument parsing ---------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sidecond",
                                 description="Invariant sets of polynomial ODEs from side conditions.")
    ap.add_argument("--json", action="store_true", help="emit the JSON report")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--system", required=True, help="system file (.ode)")
    common.add_argument("--set", action="append", metavar="k=v[,k=v...]",
                        help="assign parameter values")
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("chain", parents=[common], help="Lie-derivative chain of side conditions")
    p.add_argument("--gamma", action="append", metavar="N[,N...]")
    p.add_argument("--expr", action="append")
    p.add_argument("--max-iter", type=int, default=10)

    p = sub.add_parser("invariant", parents=[common], help="certify invariance of an ideal")
    p.add_argument("--ideal", action="append", metavar="N[,N...]")
    p.add_argument("--expr", action="append")

    p = sub.add_parser("diffside", parents=[common], help="differential side conditions")
    p.add_argument("--phi", action="append", required=True, metavar="N[,N...]")
    p.add_argument("--rho", action="append", required=True, metavar="N[,N...]")
    p.add_argument("--max-iter", type=int, default=10)

    p = sub.add_parser("lasalle", parents=[common], help="LaSalle-type relation for theta")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--theta")
    g.add_argument("--expr")
    p.add_argument("--max-k", type=int, default=3)

    p = sub.add_parser("lasalle-search", parents=[common], help="search test functions")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--max-k", type=int, default=2)

    p = sub.add_parser("symmetry", parents=[common], help="invariant sets from symmetries")
    p.add_argument("--vecs", action="append", required=True, metavar="N[,N...]")
    p.add_argument("--mode", choices=["y", "z"], default="y")
    p.add_argument("--degree-bound", type=int, default=1)

    p = sub.add_parser("partial", parents=[common], help="partial symmetry chain")
    p.add_argument("--vec", required=True)
    p.add_argument("--orbital", action="store_true")
    p.add_argument("--max-k", type=int, default=3)
    p.add_argument("--max-iter", type=int, default=10)

    p = sub.add_parser("planar", parents=[common], help="planar determinant analysis")
    p.add_argument("--vec", required=True)
    p.add_argument("--hint", action="append")

    p = sub.add_parser("qss", parents=[common], help="parametric QSS case analysis")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--target")
    g.add_argument("--phi")
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--refute", action="append", metavar="k=v;k=v",
                   help="parameter point for refutation sampling (repeatable)")

    p = sub.add_parser("simulate", parents=[common], help="RK4 integration")
    p.add_argument("--x0", required=True)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--monitor", action="append", metavar="N[,N...]")
    p.add_argument("--csv", help="write the trajectory to this CSV file")

    p = sub.add_parser("perturb", parents=[common], help="parameter perturbation study")
    p.add_argument("--phi", required=True)
    p.add_argument("--knob", required=True)
    p.add_argument("--values", required=True)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--x0", action="append", metavar="state=v[,state=v...]",
                   help="initial values for the states not solved from phi (default 1)")
    p.add_argument("--csv", help="write the table to this CSV file")
    return ap


COMMANDS = {
    "chain": cmd_chain, "invariant": cmd_invariant, "diffside": cmd_diffside,
    "lasalle": cmd_lasalle, "lasalle-search": cmd_lasalle_search, "symmetry": cmd_symmetry,
    "partial": cmd_partial, "planar": cmd_planar, "qss": cmd_qss,
}


def execute(argv) -> tuple:
    """Run a command; returns (report dict, text for stderr or None)."""
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command in ("simulate", "perturb"):
            raw = parse_system(resolve_system_path(args.system))
            values = _assignments(args.set)
            if args.command == "simulate":
                result = cmd_simulate(args, specialize(raw, values), raw)
            else:
                values.pop(args.knob, None)
                base = {p: 1 for p in raw.ctx.params if p not in values and p != args.knob}
                spec = specialize(raw, {**base, **values})
                result = cmd_perturb(args, spec)
        else:
            result = COMMANDS[args.command](args, _load(args))
    except (ParseError, UsageError, ValueError) as exc:
        msg = str(exc)
        return rp.make_report(args.command, argv, _error(msg), 1), msg
    except KeyError as exc:
        msg = exc.args[0] if exc.args else str(exc)
        return rp.make_report(args.command, argv, _error(msg), 1), msg
    return rp.make_report(args.command, argv, result), None


def _error(msg: str) -> dict:
    return {"kind": "error", "verdict": None, "status": "error", "message": msg}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        report, err = execute(argv)
    except SystemExit as exc:  # argparse usage errors
        return 1 if exc.code not in (0, None) else 0
    args_json = "--json" in argv
    if err is not None:
        print(f"error: {err}", file=sys.stderr)
    if args_json:
        sys.stdout.write(rp.render_json(report))
    elif err is None:
        color = sys.stdout.isatty() and "NO_COLOR" not in os.environ
        sys.stdout.write(rp.render_text(report, color))
    return report["exit_status"]


if __name__ == "__main__":
    sys.exit(main())
