"""Fixed-step RK4 integration and residual monitoring of side conditions.

This is the only module that works in floating point.  Exact polynomials are
compiled to Python expressions over a state array; they are evaluated, never
converted back.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .lie import VectorField
from .polycore import Polynomial, Q, VariableContext


def _float_params(ctx: VariableContext, params: Mapping) -> dict:
    missing = [p for p in ctx.params if p not in params]
    if missing:
        raise ValueError("unassigned parameters: " + ", ".join(missing))
    return {p: Q(params[p]) for p in ctx.params}


def compile_poly(p: Polynomial, params: Mapping):
    """A function of a state array ``x`` (last axis = states) evaluating p.

    Parameters are substituted exactly before conversion to floats.
    """
    ctx = p.ctx
    p = p.subs({k: v for k, v in params.items() if k in ctx.params}) if ctx.params else p
    n = ctx.nstates
    terms = []
    for m, c in p.sorted_terms():
        if any(m[n:]):
            raise ValueError(f"parameter left unassigned in {p}")
        factors = [repr(float(c))]
        for i, e in enumerate(m[:n]):
            if e == 1:
                factors.append(f"x[..., {i}]")
            elif e:
                factors.append(f"x[..., {i}]**{e}")
        terms.append("*".join(factors))
    body = " + ".join(terms) if terms else "0.0"
    code = f"lambda x: ({body}) + 0.0 * x[..., 0]"
    return eval(code, {"__builtins__": {}})


def compile_field(f: VectorField, params: Mapping):
    comps = [compile_poly(c, params) for c in f]

    def rhs(x):
        return np.array([c(x) for c in comps])
    return rhs


@dataclass
class Trajectory:
    h: float
    t: np.ndarray
    x: np.ndarray
    params: dict
    states: tuple
    truncated: bool = False
    note: str = ""


def integrate(f: VectorField, params: Mapping, x0: Sequence[float], h: float, T: float) -> Trajectory:
    """Classical fixed-step RK4 with N = round(T/h) steps."""
    if h <= 0 or T <= 0:
        raise ValueError("step and horizon must be positive")
    if h > T:
        raise ValueError("step larger than horizon")
    ctx = f.ctx
    pv = _float_params(ctx, params)
    if len(x0) != ctx.nstates:
        raise ValueError(f"initial state needs {ctx.nstates} values")
    rhs = compile_field(f, pv)
    N = int(round(T / h))
    xs = np.empty((N + 1, ctx.nstates))
    xs[0] = np.asarray(x0, dtype=float)
    x = xs[0].copy()
    truncated = False
    note = ""
    last = N
    # blow-up is detected below, so silence numpy's overflow chatter
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(N):
            k1 = rhs(x)
            k2 = rhs(x + 0.5 * h * k1)
            k3 = rhs(x + 0.5 * h * k2)
            k4 = rhs(x + h * k3)
            x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.all(np.isfinite(x)):
                truncated = True
                note = f"non-finite state at step {i + 1}, t = {(i + 1) * h:.6g}"
                last = i
                break
            xs[i + 1] = x
    t = np.arange(last + 1) * h
    return Trajectory(h, t, xs[:last + 1], {k: float(v) for k, v in pv.items()},
                      ctx.states, truncated, note)


@dataclass
class ResidualRow:
    name: str
    max_abs: float
    max_scaled: float
    t_max_abs: float
    t_max_scaled: float


def residual_monitor(traj: Trajectory, conditions: Sequence, ctx: VariableContext) -> list:
    """Max |phi| and max |phi|/(1 + |grad phi|) along the samples.

    ``conditions`` holds (name, Polynomial) pairs or objects with ``name`` and
    ``body`` attributes.
    """
    out = []
    for cond in conditions:
        name, body = (cond.name, cond.body) if hasattr(cond, "body") else cond
        phi = compile_poly(body, traj.params)
        grads = [compile_poly(body.diff(v), traj.params) for v in ctx.states]
        vals = np.abs(phi(traj.x))
        gnorm = np.sqrt(sum(g(traj.x) ** 2 for g in grads))
        scaled = vals / (1.0 + gnorm)
        ia, isc = int(np.argmax(vals)), int(np.argmax(scaled))
        out.append(ResidualRow(name, float(vals[ia]), float(scaled[isc]),
                               float(traj.t[ia]), float(traj.t[isc])))
    return out


def start_on_zero_set(phi: Polynomial, params: Mapping, x0: Mapping, ctx: VariableContext):
    """Solve phi = 0 for the last state variable in which phi is linear."""
    pv = {k: Q(v) for k, v in params.items()}
    p = phi.subs(pv) if ctx.params else phi
    for v in reversed(ctx.states):
        if p.degree_in(v) != 1:
            continue
        a = p.diff(v)
        b = p - a * ctx.var(v)
        point = {w: Q(x0.get(w, 1)) for w in ctx.states if w != v}
        point.update({k: Q(0) for k in ctx.params})
        point[v] = Q(0)
        av = a.evaluate(point)
        if av == 0:
            continue
        val = -b.evaluate(point) / av
        point[v] = val
        return v, [float(point[w]) for w in ctx.states]
    raise ValueError(f"no state variable in which {phi} is linear with a nonzero coefficient")


@dataclass
class PerturbationTable:
    knob: str
    solved_for: str
    rows: list = field(default_factory=list)  # (value, max_scaled, max_abs, truncated)
    monotone: bool = True
    tolerance: float = 0.05


def perturbation_study(f: VectorField, phi, knob: str, values: Sequence[float], T: float,
                       h: float = 1e-3, base: Mapping | None = None,
                       x0: Mapping | None = None, tolerance: float = 0.05) -> PerturbationTable:
    """Max scaled residual of phi along trajectories started on phi = 0 as the
    knob parameter decreases.  The table counts as monotone when at most one
    row exceeds its predecessor, and then by at most ``tolerance`` (relative)."""
    ctx = f.ctx
    if knob not in ctx.params:
        raise ValueError(f"unknown parameter {knob!r}")
    name, body = (phi.name, phi.body) if hasattr(phi, "body") else ("phi", phi)
    base = dict(base or {})
    for p in ctx.params:
        base.setdefault(p, 1)
    x0 = dict(x0 or {})
    table = PerturbationTable(knob, "")
    prev = None
    inversions = 0
    for val in values:
        params = dict(base)
        params[knob] = Q(val) if not isinstance(val, float) else Q(str(val))
        var, start = start_on_zero_set(body, params, x0, ctx)
        table.solved_for = var
        traj = integrate(f, params, start, h, T)
        row = residual_monitor(traj, [(name, body)], ctx)[0]
        table.rows.append((float(val), row.max_scaled, row.max_abs, traj.truncated))
        if traj.truncated:
            table.monotone = False
        if prev is not None and row.max_scaled > prev:
            inversions += 1
            if inversions > 1 or row.max_scaled > prev * (1 + tolerance):
                table.monotone = False
        prev = row.max_scaled
    return table


def fmt17(x) -> str:
    return "%.17g" % x


def write_csv(fh, header: Sequence[str], rows) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt17(v) if isinstance(v, (float, np.floating)) else v for v in row])


def trajectory_rows(traj: Trajectory):
    for t, x in zip(traj.t, traj.x):
        yield [float(t)] + [float(v) for v in x]


def convergence_order(f: VectorField, params: Mapping, x0, T: float, h: float,
                      exact=None) -> float:
    """Empirical order from step halving: log2 of the error ratio at h and h/2
    (errors against ``exact`` if given, else against an h/4 run)."""
    a = integrate(f, params, x0, h, T).x[-1]
    b = integrate(f, params, x0, h / 2, T).x[-1]
    if exact is None:
        c = integrate(f, params, x0, h / 4, T).x[-1]
        return math.log2(np.linalg.norm(a - b) / np.linalg.norm(b - c))
    ex = np.asarray(exact, dtype=float)
    return math.log2(np.linalg.norm(a - ex) / np.linalg.norm(b - ex))
