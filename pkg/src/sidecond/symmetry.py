"""Invariant sets from symmetry data: minor ideals, adjoint chains and the
planar determinant analysis."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

from .groebner import VarietyIdeal
from .invariants import ChainResult, InvarianceCertificate, certify_invariance, chain_stabilize
from .lie import VectorField, apply_field, bracket, divergence, field_minors, lie_bracket
from .linalg import solve
from .polycore import Polynomial, Q, exact_divide, gcd, squarefree_factors


class RelationMissing(ValueError):
    """Z-sets need a verified relation with every alpha_i = 0."""


@dataclass
class SymmetryRelation:
    """[g_i, f] = alpha_i f + sum_j sigma_ij g_j with polynomial cofactors."""

    f: VectorField
    G: tuple
    alphas: tuple
    sigmas: tuple
    degree_bound: int

    @property
    def kind(self) -> str:
        if all(s.is_zero() for row in self.sigmas for s in row):
            return "symmetry"
        return "orbital_reducible"

    @property
    def alphas_vanish(self) -> bool:
        return all(a.is_zero() for a in self.alphas)

    def verify(self) -> bool:
        for g, a, row in zip(self.G, self.alphas, self.sigmas):
            rhs = self.f.scale(a)
            for s, gj in zip(row, self.G):
                rhs = rhs + gj.scale(s)
            if bracket(g, self.f) != rhs:
                return False
        return True


def _state_monomials(n: int, bound: int) -> list:
    out = [m for m in product(range(bound + 1), repeat=n) if sum(m) <= bound]
    out.sort(key=lambda m: (sum(m),) + tuple(-e for e in reversed(m)))
    return out


def verify_relation(f: VectorField, G: Sequence[VectorField], degree_bound: int = 1):
    """Search cofactors alpha_i, sigma_ij of degree <= degree_bound.

    Each i is solved separately as an exact linear system in the unknown
    coefficients; alpha_i = 0 is tried first.  Returns a SymmetryRelation or
    None when some i has no solution at this bound.
    """
    if degree_bound < 0:
        raise ValueError("degree bound must be nonnegative")
    G = tuple(G)
    ctx = f.ctx
    n = ctx.nstates
    monos = [m + (0,) * len(ctx.params) for m in _state_monomials(n, degree_bound)]
    alphas, sigmas = [], []
    for g in G:
        target = bracket(g, f)
        sol = None
        for with_alpha in (False, True):
            basis_fields = ([f] if with_alpha else []) + list(G)
            sol = _solve_combination(target, basis_fields, monos, ctx)
            if sol is not None:
                if not with_alpha:
                    sol = [ctx.zero()] + sol
                break
        if sol is None:
            return None
        alphas.append(sol[0])
        sigmas.append(tuple(sol[1:]))
    return SymmetryRelation(f, G, tuple(alphas), tuple(sigmas), degree_bound)


def _solve_combination(target: VectorField, fields: list, monos: list, ctx):
    """Find polynomial multipliers c_k (spanned by ``monos``) with
    target = sum_k c_k * fields[k]; None if impossible."""
    if not fields:
        return [] if target.is_zero() else None
    unknowns = [(k, m) for k in range(len(fields)) for m in monos]
    products = []
    for k, m in unknowns:
        mono = Polynomial(ctx, {m: Q(1)})
        products.append([mono * comp for comp in fields[k]])
    rows: dict = {}
    for col, prod in enumerate(products):
        for comp_i, p in enumerate(prod):
            for mm, c in p.terms.items():
                rows.setdefault((comp_i, mm), {})[col] = c
    rhs_map = {}
    for comp_i, p in enumerate(target):
        for mm, c in p.terms.items():
            rhs_map[(comp_i, mm)] = c
            rows.setdefault((comp_i, mm), {})
    keys = sorted(rows)
    A = [[rows[kk].get(j, Q(0)) for j in range(len(unknowns))] for kk in keys]
    b = [rhs_map.get(kk, Q(0)) for kk in keys]
    x = solve(A, b)
    if x is None:
        return None
    out = [ctx.zero() for _ in fields]
    for (k, m), v in zip(unknowns, x):
        if v:
            out[k] = out[k] + Polynomial(ctx, {m: v})
    return out


@dataclass
class SymmetrySets:
    mode: str
    ideal: VarietyIdeal
    certificate: InvarianceCertificate
    relation: SymmetryRelation | None = None
    note: str = ""


def symmetry_invariant_sets(f: VectorField, G: Sequence[VectorField], mode: str = "y",
                            relation: SymmetryRelation | None = None,
                            degree_bound: int = 1) -> SymmetrySets:
    """Y: (r+1)-minors of (f, g_1..g_r).  Z: r-minors of (g_1..g_r), only
    under a verified relation with all alpha_i = 0."""
    mode = mode.lower()
    G = list(G)
    if not G:
        raise ValueError("need at least one field g")
    ctx = f.ctx
    r = len(G)
    n = ctx.nstates
    if mode == "y":
        if r + 1 > n:
            I = VarietyIdeal((), ctx)
            note = "more columns than states: no (r+1)-minors, whole space"
        else:
            I = VarietyIdeal(tuple(field_minors([f] + G, r + 1)), ctx)
            note = ""
        return SymmetrySets("y", I, certify_invariance(f, I), relation, note)
    if mode != "z":
        raise ValueError(f"unknown mode {mode!r}")
    if relation is None:
        relation = verify_relation(f, G, degree_bound)
    if relation is None:
        raise RelationMissing(f"no relation [g_i,f] = alpha_i f + sum sigma_ij g_j "
                              f"found at degree bound {degree_bound}")
    if not relation.verify():
        raise RelationMissing("supplied relation does not hold")
    if not relation.alphas_vanish:
        nz = [str(a) for a in relation.alphas if not a.is_zero()]
        raise RelationMissing("Z needs every alpha_i = 0, found alpha = " + ", ".join(nz))
    if r > n:
        I = VarietyIdeal((), ctx)
    else:
        I = VarietyIdeal(tuple(field_minors(G, r)), ctx)
    return SymmetrySets("z", I, certify_invariance(f, I), relation)


@dataclass
class PartialSymmetryResult:
    orbital: bool
    brackets: list
    conditions: list
    chain: ChainResult
    verdict: bool
    stopped_early: bool = False


def partial_symmetry_chain(g: VectorField, f: VectorField, max_k: int = 3, orbital: bool = False,
                           max_iter: int = 10) -> PartialSymmetryResult:
    if max_k < 1:
        raise ValueError("max_k must be at least 1")
    ctx = f.ctx
    brackets = []
    cur = f
    stopped = False
    for _ in range(max_k):
        cur = bracket(g, cur)
        brackets.append(cur)
        if cur.is_zero():
            stopped = True
            break
    conds = []
    for b in brackets:
        if orbital:
            if ctx.nstates >= 2:
                conds.extend(field_minors([f, b], 2))
        else:
            conds.extend(b.components)
    seen = []
    for c in conds:
        if not c.is_zero() and c not in seen:
            seen.append(c)
    chain = chain_stabilize(f, seen or [ctx.zero()], max_iter)
    verdict = bool(chain.stabilized and chain.nonempty and chain.certificate is not None
                   and chain.certificate.invariant)
    return PartialSymmetryResult(orbital, brackets, seen, chain, verdict, stopped)


@dataclass
class FactorVerdict:
    factor: Polynomial
    multiplicity: int
    invariant_f: bool
    invariant_g: bool
    cofactor_f: Polynomial | None
    cofactor_g: Polynomial | None
    from_hint: bool = False


@dataclass
class PlanarAnalysis:
    theta: Polynomial
    A: Polynomial | None
    B: Polynomial | None
    identity_holds: bool
    degenerate: bool
    factors: list = field(default_factory=list)
    involution: bool | None = None
    alpha: Polynomial | None = None
    beta: Polynomial | None = None
    rejected_hints: list = field(default_factory=list)


class HintRejected(ValueError):
    pass


def planar_analysis(f: VectorField, g: VectorField, hints: Sequence[Polynomial] = (),
                    strict_hints: bool = True) -> PlanarAnalysis:
    ctx = f.ctx
    if ctx.nstates != 2:
        raise ValueError("planar analysis needs exactly two state variables")
    theta = f[0] * g[1] - f[1] * g[0]
    if theta.is_zero():
        return PlanarAnalysis(theta, None, None, True, True)
    A = apply_field(g, theta) - theta * divergence(g)
    B = -(apply_field(f, theta) - theta * divergence(f))
    lhs = bracket(g, f).scale(theta)
    rhs = f.scale(A) + g.scale(B)
    identity = lhs == rhs
    factors = [(p, k, False) for p, k in squarefree_factors(theta) if not p.is_constant()]
    rejected = []
    for h in hints:
        if h.is_zero() or h.is_constant() or exact_divide(theta, h) is None:
            if strict_hints:
                raise HintRejected(f"hint {h} does not divide theta = {theta}")
            rejected.append(h)
            continue
        factors = _refine(factors, h.primitive())
    verdicts = []
    for p, k, hinted in factors:
        cf = exact_divide(apply_field(f, p), p)
        cg = exact_divide(apply_field(g, p), p)
        verdicts.append(FactorVerdict(p, k, cf is not None, cg is not None, cf, cg, hinted))
    involution = all(v.invariant_f and v.invariant_g for v in verdicts)
    alpha = exact_divide(A, theta)
    beta = exact_divide(B, theta)
    return PlanarAnalysis(theta, A, B, identity, False, verdicts, involution, alpha, beta, rejected)


def _refine(factors, h):
    """Split factors by gcd with a verified hint."""
    out = []
    for p, k, hinted in factors:
        d = gcd(p, h)
        if d.is_constant() or d == p.primitive():
            out.append((p, k, hinted or d == p.primitive()))
            continue
        q = exact_divide(p, d)
        out.append((d, k, True))
        out.append((q.primitive(), k, hinted))
    return out


def semi_invariant_cofactor(f: VectorField, sigma: Polynomial) -> Polynomial | None:
    """lambda with X_f(sigma) = lambda * sigma, or None."""
    if sigma.is_zero():
        raise ValueError("sigma must be nonzero")
    return exact_divide(apply_field(f, sigma), sigma)


def hamiltonian_field(sigma: Polynomial) -> VectorField:
    """h_sigma = (-d sigma/d x2, d sigma/d x1) in the plane."""
    ctx = sigma.ctx
    if ctx.nstates != 2:
        raise ValueError("Hamiltonian fields are planar")
    x1, x2 = ctx.states
    return VectorField(ctx, [-sigma.diff(x2), sigma.diff(x1)])
