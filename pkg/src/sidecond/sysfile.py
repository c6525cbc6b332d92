"""Line-oriented system files.

::

    # comment
    system michaelis_menten
    params e0 k1 km1 k2
    states s c
    nonneg all            # or a list of parameters
    qss c                 # states eligible for QSS targets
    eq s' = -k1*e0*s + (k1*s + km1)*c
    eq c' = k1*e0*s - (k1*s + km1 + k2)*c
    def psi1 = k1*e0*s - (k1*s + km1 + k2)*c
    vec g = (s, -c)

Names in ``params``/``states``/``nonneg``/``qss`` may be separated by spaces
or commas.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .lie import VectorField
from .parser import ParseError, parse_expression, parse_tuple
from .polycore import RESERVED_PREFIX, VariableContext
from .qss import NamedFunction, ParametricSystem

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")
_EQ = re.compile(r"eq\s+([A-Za-z_][A-Za-z0-9_]*)\s*'\s*=\s*")
_DEF = re.compile(r"(def|vec)\s+([A-Za-z_][A-Za-z0-9_]*)\s*=\s*")


@dataclass
class SystemSpec:
    name: str
    ctx: VariableContext
    system: ParametricSystem
    defs: dict = field(default_factory=dict)
    vecs: dict = field(default_factory=dict)
    path: str | None = None

    @property
    def f(self) -> VectorField:
        return self.system.f

    def get_def(self, name: str) -> NamedFunction:
        if name not in self.defs:
            raise KeyError(f"unknown def '{name}'")
        return self.defs[name]

    def get_vec(self, name: str) -> VectorField:
        if name not in self.vecs:
            raise KeyError(f"unknown vec '{name}'")
        return self.vecs[name]


def _names(rest: str, lineno: int, col: int) -> list:
    out = []
    for m in re.finditer(r"[^\s,]+", rest):
        tok = m.group(0)
        if not _NAME.match(tok):
            raise ParseError(f"bad name {tok!r}", lineno, col + m.start())
        out.append(tok)
    return out


def parse_system_text(text: str, path: str | None = None, default_name: str = "system") -> SystemSpec:
    name = None
    params: list | None = None
    states: list | None = None
    nonneg_line = None
    qss_line = None
    eqs: list = []      # (state, src, line, col)
    items: list = []    # (kind, name, src, line, col)
    seen_heads: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.lstrip()
        if not stripped:
            continue
        indent = len(line) - len(stripped)
        head = stripped.split(None, 1)[0]
        rest = stripped[len(head):]
        col = indent + len(head) + 1
        if head in ("system", "params", "states", "nonneg", "qss"):
            if head in seen_heads:
                raise ParseError(f"duplicate '{head}' line (first on line {seen_heads[head]})",
                                 lineno, indent + 1)
            seen_heads[head] = lineno
            if head == "system":
                nm = rest.strip()
                if not nm:
                    raise ParseError("missing system name", lineno, col)
                name = nm
            elif head == "params":
                params = _names(rest, lineno, col)
            elif head == "states":
                states = _names(rest, lineno, col)
                if not states:
                    raise ParseError("empty states line: at least one state is required",
                                     lineno, indent + 1)
            elif head == "nonneg":
                nonneg_line = (_names(rest, lineno, col), lineno)
            else:
                qss_line = (_names(rest, lineno, col), lineno)
            continue
        if head == "eq":
            m = _EQ.match(stripped)
            if not m:
                raise ParseError("expected eq <state>' = <expr>", lineno, indent + 1)
            eqs.append((m.group(1), stripped[m.end():], lineno, indent + m.end() + 1))
            continue
        if head in ("def", "vec"):
            m = _DEF.match(stripped)
            if not m:
                raise ParseError(f"expected {head} <name> = ...", lineno, indent + 1)
            items.append((m.group(1), m.group(2), stripped[m.end():], lineno,
                          indent + m.end() + 1))
            continue
        raise ParseError(f"unknown directive {head!r}", lineno, indent + 1)

    if states is None:
        raise ParseError("missing states line", 1, 1)
    params = params or []
    declared: dict = {}
    for kind, names in (("state", states), ("param", params)):
        for v in names:
            if v in declared:
                line = seen_heads["states" if kind == "state" else "params"]
                raise ParseError(f"duplicate name {v!r}", line, 1)
            declared[v] = kind
            if v.startswith(RESERVED_PREFIX):
                raise ParseError(f"names starting with {RESERVED_PREFIX!r} are reserved",
                                 seen_heads["states" if kind == "state" else "params"], 1)
    ctx = VariableContext(tuple(states), tuple(params), name or default_name)

    comps: dict = {}
    for st, src, lineno, col in eqs:
        if st not in ctx.states:
            raise ParseError(f"eq for undeclared state {st!r}", lineno, 1)
        if st in comps:
            raise ParseError(f"duplicate eq for state {st!r} (first on line {comps[st][1]})",
                             lineno, 1)
        comps[st] = (parse_expression(src, ctx, lineno, col), lineno)
    missing = [s for s in ctx.states if s not in comps]
    if missing:
        raise ParseError("missing eq for state " + ", ".join(repr(s) for s in missing),
                         seen_heads["states"], 1)
    f = VectorField(ctx, [comps[s][0] for s in ctx.states])

    nonneg = ()
    if nonneg_line:
        names, lineno = nonneg_line
        if names == ["all"]:
            nonneg = tuple(ctx.params)
        else:
            for p in names:
                if p not in ctx.params:
                    raise ParseError(f"nonneg names undeclared parameter {p!r}", lineno, 1)
            nonneg = tuple(names)
    qss_states = ()
    if qss_line:
        names, lineno = qss_line
        for s in names:
            if s not in ctx.states:
                raise ParseError(f"qss names undeclared state {s!r}", lineno, 1)
        qss_states = tuple(names)
    system = ParametricSystem(ctx, f, frozenset(nonneg), qss_states, name or default_name)

    defs, vecs = {}, {}
    for kind, nm, src, lineno, col in items:
        if nm in declared or nm in defs or nm in vecs:
            raise ParseError(f"duplicate name {nm!r}", lineno, 1)
        if kind == "def":
            defs[nm] = NamedFunction(nm, parse_expression(src, ctx, lineno, col))
        else:
            comps_v = parse_tuple(src, ctx, lineno, col)
            if len(comps_v) != ctx.nstates:
                raise ParseError(f"vec {nm!r} has {len(comps_v)} components, expected "
                                 f"{ctx.nstates}", lineno, col)
            vecs[nm] = VectorField(ctx, comps_v)
    return SystemSpec(name or default_name, ctx, system, defs, vecs, path)


def parse_system(path) -> SystemSpec:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror or exc}", 0, 0) from exc
    return parse_system_text(text, str(p), p.stem)


def render_system(spec: SystemSpec) -> str:
    """Canonical text form; parsing it gives back an equal SystemSpec."""
    ctx = spec.ctx
    lines = [f"system {spec.name}"]
    if ctx.params:
        lines.append("params " + " ".join(ctx.params))
    lines.append("states " + " ".join(ctx.states))
    if spec.system.nonneg:
        lines.append("nonneg " + " ".join(p for p in ctx.params if p in spec.system.nonneg))
    if spec.system.qss_states:
        lines.append("qss " + " ".join(spec.system.qss_states))
    for s, comp in zip(ctx.states, spec.f):
        lines.append(f"eq {s}' = {comp}")
    for nm, d in spec.defs.items():
        lines.append(f"def {nm} = {d.body}")
    for nm, v in spec.vecs.items():
        lines.append(f"vec {nm} = (" + ", ".join(str(c) for c in v) + ")")
    return "\n".join(lines) + "\n"


def bundled_systems_dir() -> Path:
    return Path(__file__).resolve().parent / "systems"


def resolve_system_path(path: str) -> Path:
    """Use ``path`` if it exists; otherwise fall back to a bundled fixture of
    the same file name (so ``examples/expara1.ode`` works anywhere)."""
    p = Path(path)
    if p.exists():
        return p
    cand = bundled_systems_dir() / p.name
    if cand.exists():
        return cand
    cand = bundled_systems_dir() / (p.name + ".ode")
    if cand.exists():
        return cand
    return p


def specialize(spec: SystemSpec, values: dict) -> SystemSpec:
    """Substitute numeric parameter values and drop those parameters from the
    context."""
    if not values:
        return spec
    ctx = spec.ctx
    for k in values:
        if k not in ctx.params:
            raise KeyError(f"unknown parameter '{k}'")
    new_ctx = VariableContext(ctx.states, tuple(p for p in ctx.params if p not in values), ctx.name)

    def move(p):
        return p.subs(values).embed(new_ctx)

    f = VectorField(new_ctx, [move(c) for c in spec.f])
    S = spec.system
    system = ParametricSystem(new_ctx, f, frozenset(p for p in S.nonneg if p not in values),
                              S.qss_states, S.name)
    defs = {k: NamedFunction(d.name, move(d.body), d.provenance) for k, d in spec.defs.items()}
    vecs = {k: VectorField(new_ctx, [move(c) for c in v]) for k, v in spec.vecs.items()}
    return SystemSpec(spec.name, new_ctx, system, defs, vecs, spec.path)
