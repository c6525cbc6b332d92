"""Parametric side-condition analysis for reaction systems.

The ring is Q[states, parameters] with a block order (states above
parameters).  Starting from a side condition phi, each node either proves
invariance of its variety, or splits on the factors of the remainder of X_f
applied to a basis element: parameter factors become parameter conditions,
state-involving factors are adjoined to the ideal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .groebner import (VarietyIdeal, block_order, contains_one, dimension, membership,
                       normal_form)
from .invariants import (INCONCLUSIVE, InvarianceCertificate, certify_invariance)
from .lie import VectorField, apply_field
from .polycore import Polynomial, Q, VariableContext, exact_divide, gcd, squarefree_factors


@dataclass
class NamedFunction:
    name: str
    body: Polynomial
    provenance: str = "user-declared"


@dataclass
class ParametricSystem:
    ctx: VariableContext
    f: VectorField
    nonneg: frozenset = frozenset()
    qss_states: tuple = ()
    name: str = "system"

    def __post_init__(self):
        self.nonneg = frozenset(self.nonneg)
        for p in self.nonneg:
            if p not in self.ctx.params:
                raise ValueError(f"nonnegativity flag on unknown parameter {p!r}")


def qss_conditions(S: ParametricSystem, targets: Sequence[Polynomial],
                   names: Sequence[str] | None = None) -> list:
    """phi = X_f(target) for each state-linear target."""
    out = []
    for i, t in enumerate(targets):
        if t.involves_params():
            raise ValueError(f"target {t} involves parameters")
        if any(sum(m) != 1 for m in t.terms):
            raise ValueError(f"target {t} is not a linear combination of state variables")
        body = apply_field(S.f, t)
        used = t.variables_used()
        prov = "generated-standard-QSS" if len(used) == 1 else "generated-total-QSS"
        name = names[i] if names else f"X_f({t})"
        out.append(NamedFunction(name, body, prov))
    return out


# ---- case tree ------------------------------------------------------------

LEAF_INVARIANT = "invariant"
LEAF_EMPTY = "empty"
LEAF_FINITE = "finite"
LEAF_INCONCLUSIVE = "inconclusive"
LEAF_NOT_INVARIANT = "not_invariant"
NODE_DEGENERATE = "degenerate"
NODE_PRUNED = "pruned"
NODE_SPLIT = "split"


@dataclass
class Component:
    generators: tuple
    dimension: int
    stationary_only: bool
    certificate: InvarianceCertificate
    solved: str | None = None

    @property
    def invariant(self) -> bool:
        return self.certificate.invariant


@dataclass
class CaseNode:
    label: str
    conditions: dict
    assumptions: tuple
    generators: tuple
    status: str
    children: list = field(default_factory=list)
    note: str = ""
    remainder: Polynomial | None = None
    certificate: InvarianceCertificate | None = None
    components: list = field(default_factory=list)
    depth: int = 0

    @property
    def condition_key(self) -> tuple:
        return condition_key(self.conditions)

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()


def condition_key(conds: dict) -> tuple:
    return tuple(sorted(f"{p}={v}" for p, v in conds.items()))


@dataclass
class Leaf:
    conditions: dict
    component: Component

    @property
    def key(self) -> tuple:
        return condition_key(self.conditions)


@dataclass
class CaseTree:
    system: ParametricSystem
    phi: NamedFunction
    root: CaseNode
    depth: int
    leaves: list
    inconclusive: bool
    notes: list = field(default_factory=list)

    def leaf_keys(self) -> set:
        return {l.key for l in self.leaves}


class _Explorer:
    def __init__(self, S: ParametricSystem, max_depth: int):
        self.S = S
        self.ctx = S.ctx
        self.order = block_order(self.ctx.states, self.ctx.params) if self.ctx.params \
            else block_order(self.ctx.states)
        self.max_depth = max_depth
        self.notes: list = []

    # conditions ------------------------------------------------------------
    def resolve_condition(self, cond: Polynomial):
        """Turn ``cond = 0`` into substitutions; returns (dict, note) or
        (None, reason) when infeasible, or ("nonlinear", reason)."""
        if cond.is_zero():
            return {}, ""
        if cond.is_constant():
            return None, f"condition {cond} = 0 is infeasible"
        used = cond.variables_used()
        if cond.total_degree() == 1 and all(p in self.S.nonneg for p in used):
            coeffs = [c for m, c in cond.terms.items() if any(m)]
            const = sum((c for m, c in cond.terms.items() if not any(m)), Q(0))
            if all(c > 0 for c in coeffs) or all(c < 0 for c in coeffs):
                sign = 1 if coeffs[0] > 0 else -1
                if const * sign > 0:
                    return None, f"{cond} = 0 has no nonnegative solution"
                if const == 0:
                    return {p: self.ctx.zero() for p in used}, ""
        for p in used:
            if cond.degree_in(p) != 1:
                continue
            coef = cond.diff(p)
            if coef.is_constant():
                rest = cond - coef * self.ctx.var(p)
                value = rest * (-1 / coef.constant_value())
                return {p: value}, ""
        return "nonlinear", f"nonlinear parameter condition {cond} = 0"

    def compose(self, conds: dict, new: dict) -> dict:
        out = {p: v.subs(new) for p, v in conds.items()}
        out.update(new)
        return out

    # tree ------------------------------------------------------------------
    def explore(self, gens, conds, assumptions, depth, label):
        f = self.S.f.subs(conds) if conds else self.S.f
        gens = [g.subs(conds) for g in gens]
        gens = [g for g in gens if not g.is_zero()]
        node = CaseNode(label, dict(conds), tuple(assumptions), tuple(gens), NODE_SPLIT, depth=depth)
        if not gens:
            node.status = NODE_DEGENERATE
            node.note = "side condition vanishes identically under these conditions"
            return node
        I = VarietyIdeal(tuple(gens), self.ctx).with_basis(self.order)
        node.generators = I.basis
        if contains_one(I):
            node.status = LEAF_EMPTY
            node.note = "unit ideal: empty variety"
            return node
        basis = list(I.basis)
        # parameter-only elements: empty unless a factor vanishes
        for b in basis:
            if not b.involves_states():
                node.note = f"parameter relation {b} = 0 required"
                for fac, _ in squarefree_factors(b):
                    node.children.append(self.condition_child(fac, basis, conds, assumptions,
                                                              depth, label))
                return node
        # parameter content of generators
        for i, b in enumerate(basis):
            cont = param_content(b)
            if cont.is_constant():
                continue
            node.note = f"parameter content {cont} in {b}"
            for fac, _ in squarefree_factors(cont):
                node.children.append(self.condition_child(fac, basis, conds, assumptions,
                                                          depth, label))
            prim = exact_divide(b, cont)
            rest = basis[:i] + [prim] + basis[i + 1:]
            new_assume = list(assumptions) + [fac for fac, _ in squarefree_factors(cont)]
            node.children.append(self.explore(rest, conds, new_assume, depth,
                                              f"{label} / {cont} != 0"))
            return node
        cert = certify_invariance(f, I)
        node.certificate = cert
        if cert.invariant:
            node.status = LEAF_INVARIANT
            node.components = self.components(I, f)
            return node
        if cert.kind == INCONCLUSIVE:
            node.status = LEAF_INCONCLUSIVE
            node.note = cert.note
            return node
        r = None
        for b in basis:
            rr = normal_form(apply_field(f, b), I)
            if not rr.is_zero():
                r = rr
                break
        node.remainder = r
        if dimension(I, self.ctx.states) <= 0:
            node.status = LEAF_FINITE
            node.note = "zero-dimensional variety (finite point set)"
            return node
        if depth >= self.max_depth:
            node.status = LEAF_INCONCLUSIVE
            node.note = "depth limit reached"
            return node
        cont = param_content(r)
        prim = exact_divide(r, cont) if not cont.is_constant() else r
        if not cont.is_constant():
            for fac, _ in squarefree_factors(cont):
                node.children.append(self.condition_child(fac, basis, conds, assumptions,
                                                          depth, label))
        for fac, _ in squarefree_factors(prim):
            if not fac.involves_states():
                continue
            node.children.append(self.explore(basis + [fac], conds, assumptions, depth + 1,
                                              f"{label} + <{fac}>"))
        node.children.append(CaseNode(f"{label} / no factor vanishes", dict(conds),
                                      tuple(assumptions), tuple(basis), LEAF_NOT_INVARIANT,
                                      note="remainder nonzero: variety not invariant",
                                      certificate=cert, depth=depth))
        return node

    def condition_child(self, fac, gens, conds, assumptions, depth, label):
        sub, why = self.resolve_condition(fac)
        tag = f"{label} | {fac} = 0"
        if sub is None:
            return CaseNode(tag, dict(conds), tuple(assumptions), tuple(gens), NODE_PRUNED, note=why,
                            depth=depth)
        if sub == "nonlinear":
            return CaseNode(tag, dict(conds), tuple(assumptions), tuple(gens), LEAF_INCONCLUSIVE,
                            note=why, depth=depth)
        for a in assumptions:
            if a.subs(sub).is_zero():
                return CaseNode(tag, dict(conds), tuple(assumptions), tuple(gens), NODE_PRUNED,
                                note=f"contradicts assumption {a} != 0", depth=depth)
        new = self.compose(conds, sub)
        if depth >= self.max_depth:
            return CaseNode(tag, new, tuple(assumptions), tuple(gens), LEAF_INCONCLUSIVE,
                            note="depth limit reached", depth=depth)
        return self.explore(list(gens), new, [a.subs(sub) for a in assumptions], depth + 1, tag)

    def components(self, I: VarietyIdeal, f: VectorField) -> list:
        basis = [b for b in I.basis]
        if len(basis) == 1:
            parts = [VarietyIdeal((fac,), self.ctx) for fac, _ in squarefree_factors(basis[0])
                     if fac.involves_states()]
        else:
            parts = [I]
        out = []
        for P in parts:
            P = P.with_basis(self.order)
            if contains_one(P):
                continue
            dim, stat = classify_leaf(P, f, self.order)
            cert = certify_invariance(f, P)
            out.append(Component(tuple(P.basis), dim, stat, cert,
                                 solved_form(P.basis, self.S.qss_states)))
        return out


def param_content(p: Polynomial) -> Polynomial:
    """Gcd of the coefficients of p viewed as a polynomial in the states."""
    n = p.ctx.nstates
    groups: dict = {}
    for m, c in p.terms.items():
        groups.setdefault(m[:n], {})[m] = c
    g = p.ctx.zero()
    for t in groups.values():
        coeff = Polynomial(p.ctx, {(0,) * n + m[n:]: c for m, c in t.items()})
        g = gcd(g, coeff)
        if g.is_constant():
            return p.ctx.one()
    return g


def classify_leaf(I: VarietyIdeal, f: VectorField, order=None) -> tuple:
    """(dimension over the closure in the states, stationary_only)."""
    if contains_one(I):
        raise ValueError("unit ideal has an empty variety")
    dim = dimension(I, f.ctx.states)
    stationary = all(membership(fi, I, "radical") for fi in f.components)
    return dim, stationary


def solved_form(gens: Sequence[Polynomial], prefer: Sequence[str] = ()) -> str | None:
    """'v = num/den' for the first generator linear in some state variable;
    variables in ``prefer`` are tried first."""
    for g in gens:
        ctx = g.ctx
        for v in list(prefer) + [v for v in ctx.states if v not in prefer]:
            if g.degree_in(v) != 1:
                continue
            a = g.diff(v)
            b = g - a * ctx.var(v)
            num = -b
            if a.is_constant():
                val = num * (1 / a.constant_value())
                return f"{v} = {val}"
            sign = a.primitive()
            scale = None
            for m, c in a.terms.items():
                if sign.terms.get(m):
                    scale = sign.terms[m] / c
                    break
            num = num * scale
            den = a * scale
            return f"{v} = ({num})/({den})"
    return None


def parametric_case_analysis(S: ParametricSystem, phi: NamedFunction, depth: int = 4) -> CaseTree:
    if phi.body.is_zero():
        raise ValueError("phi must be nonzero")
    if depth < 1:
        raise ValueError("depth must be at least 1")
    ex = _Explorer(S, depth)
    root = ex.explore([phi.body], {}, [], 0, "root")
    leaves = collect_leaves(root, ex.order)
    inconclusive = any(n.status == LEAF_INCONCLUSIVE for n in root.walk())
    return CaseTree(S, phi, root, depth, leaves, inconclusive, ex.notes)


def collect_leaves(root: CaseNode, order) -> list:
    """Invariant components of dimension >= 1, deduplicated and with
    subsumed special cases removed."""
    raw = []
    for node in root.walk():
        if node.status != LEAF_INVARIANT:
            continue
        for comp in node.components:
            if comp.invariant and comp.dimension >= 1:
                raw.append(Leaf(dict(node.conditions), comp))
    uniq = []
    seen = set()
    for l in raw:
        k = (l.key, tuple(str(g) for g in l.component.generators))
        if k not in seen:
            seen.add(k)
            uniq.append(l)
    kept = []
    for l2 in uniq:
        if any(l1 is not l2 and _subsumes(l1, l2, order) for l1 in uniq):
            continue
        kept.append(l2)
    kept.sort(key=lambda l: (len(l.conditions), l.key, [str(g) for g in l.component.generators]))
    return kept


def _subsumes(l1: Leaf, l2: Leaf, order) -> bool:
    c1, c2 = set(l1.key), set(l2.key)
    if not c1 <= c2 or (c1 == c2 and l1.component.generators == l2.component.generators):
        return False
    if c1 == c2:
        return False
    I2 = VarietyIdeal(l2.component.generators, l2.component.generators[0].ctx)
    for g in l1.component.generators:
        if not membership(g.subs(l2.conditions), I2, "radical"):
            return False
    return True


def refutation_samples(S: ParametricSystem, phi: NamedFunction, samples: Sequence[dict]) -> list:
    """Evidence for the 'only if' direction: at parameter points outside the
    listed cases, neither the zero set of phi nor any square-free factor of
    it is invariant.  Returns (point, [(component, certificate kind)])."""
    out = []
    for point in samples:
        f = S.f.subs(point)
        body = phi.body.subs(point)
        rows = []
        if body.is_zero():
            out.append((point, [("phi", "vanishes")]))
            continue
        parts = [body] + [fac for fac, _ in squarefree_factors(body) if fac.involves_states()]
        for p in parts:
            I = VarietyIdeal((p,), S.ctx)
            rows.append((str(p), certify_invariance(f, I).kind))
        out.append((point, rows))
    return out
