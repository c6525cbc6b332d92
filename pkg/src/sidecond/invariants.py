"""Side-condition chains, invariance certificates and LaSalle-type relations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .groebner import (GREVLEX, GroebnerCapExceeded, MonomialOrder, VarietyIdeal, block_order,
                       contains_one, dimension, elimination_ideal, groebner_basis,
                       ideal_equal, membership, normal_form)
from .lie import VectorField, apply_field, jacobian, lie_derivative, matrix_minors
from .polycore import Q, Polynomial, VariableContext, squarefree_factors

INVARIANT_BY_COFACTORS = "invariant_by_cofactors"
INVARIANT_BY_RADICAL = "invariant_by_radical"
NOT_INVARIANT = "not_invariant"
INCONCLUSIVE = "inconclusive"


@dataclass
class InvarianceCertificate:
    """Outcome of an invariance check for V(I) under f.

    ``generators`` are the polynomials psi_j the certificate speaks about (the
    reduced basis of I, or of the saturated chain for the radical route) and
    ``cofactors[j][k]`` satisfy X_f(psi_j) = sum_k cofactors[j][k] * psi_k.
    """

    kind: str
    generators: tuple = ()
    cofactors: tuple = ()
    radical_attestations: tuple = ()
    witness: Polynomial | None = None
    witness_image: Polynomial | None = None
    note: str = ""

    @property
    def invariant(self) -> bool:
        return self.kind in (INVARIANT_BY_COFACTORS, INVARIANT_BY_RADICAL)

    def verify(self, f: VectorField) -> bool:
        """Re-expand every cofactor identity exactly."""
        for psi, row in zip(self.generators, self.cofactors):
            lhs = apply_field(f, psi)
            rhs = psi.ctx.zero()
            for nu, g in zip(row, self.generators):
                rhs = rhs + nu * g
            if lhs != rhs:
                return False
        return True


def certify_invariance(f: VectorField, I: VarietyIdeal, max_rounds: int = 20) -> InvarianceCertificate:
    """Three-valued invariance test for the variety of I under f.

    Cofactors are read off the division of X_f(psi_j) by the reduced basis.
    When some image lies only in the radical, the ideal is saturated under X_f
    (each new image must stay inside the radical) until it is closed; the
    closed ideal then carries the cofactors.  An image outside the radical
    refutes invariance over the algebraic closure.
    """
    ctx = f.ctx
    if I.is_zero():
        return InvarianceCertificate(INVARIANT_BY_COFACTORS, note="zero ideal: whole space")
    G = I.with_basis(I.order or GREVLEX)
    if contains_one(G):
        one = ctx.one()
        return InvarianceCertificate(INVARIANT_BY_COFACTORS, (one,), ((ctx.zero(),),),
                                     note="unit ideal: empty variety")
    rows, missing = _cofactor_rows(f, G)
    if not missing:
        return InvarianceCertificate(INVARIANT_BY_COFACTORS, G.basis, rows)
    attest = []
    gens = list(G.basis)
    frontier = [apply_field(f, G.basis[j]) for j in missing]
    for _ in range(max_rounds):
        new = []
        for img in frontier:
            if not membership(img, I, "radical"):
                return InvarianceCertificate(NOT_INVARIANT, witness=_witness_for(f, gens, img),
                                             witness_image=img)
            attest.append(img)
            new.append(img)
        J = VarietyIdeal(tuple(gens) + tuple(new), ctx).with_basis(GREVLEX)
        rows, missing = _cofactor_rows(f, J)
        if not missing:
            return InvarianceCertificate(INVARIANT_BY_RADICAL, J.basis, rows, tuple(attest),
                                         note="images lie in the radical; closed ideal carries cofactors")
        gens = list(J.basis)
        frontier = [apply_field(f, J.basis[j]) for j in missing]
    return InvarianceCertificate(INCONCLUSIVE, radical_attestations=tuple(attest),
                                 note=f"radical saturation did not close in {max_rounds} rounds")


def _witness_for(f, gens, img):
    for g in gens:
        if apply_field(f, g) == img:
            return g
    return img


def _cofactor_rows(f: VectorField, G: VarietyIdeal):
    rows, missing = [], []
    for j, psi in enumerate(G.basis):
        r, q = normal_form(apply_field(f, psi), G, with_cofactors=True)
        if r.is_zero():
            rows.append(tuple(q))
        else:
            rows.append(None)
            missing.append(j)
    return tuple(rows), missing


@dataclass
class ChainRound:
    index: int
    new_generators: tuple
    basis_size: int


@dataclass
class ChainResult:
    gammas: tuple
    stabilized: bool
    K: int | None
    ideal: VarietyIdeal
    empty: bool | None
    certificate: InvarianceCertificate | None
    rounds: list = field(default_factory=list)
    ideals: list = field(default_factory=list)

    @property
    def nonempty(self) -> bool:
        return self.empty is False


def chain_stabilize(f: VectorField, gammas: Sequence[Polynomial], max_iter: int = 10,
                    certify: bool = True) -> ChainResult:
    """Iterate I_{j+1} = I_j + <X_f of the new generators> until I_j = I_{j+1}."""
    if not gammas:
        raise ValueError("need at least one side condition")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    ctx = f.ctx
    gens = [g for g in gammas if not g.is_zero()]
    I = VarietyIdeal(tuple(gens), ctx)
    if not gens:
        I = VarietyIdeal((), ctx, (), GREVLEX)
        cert = certify_invariance(f, I) if certify else None
        return ChainResult(tuple(gammas), True, 0, I, False, cert,
                           [ChainRound(0, (), 0)], [I])
    I = I.with_basis()
    rounds = [ChainRound(0, tuple(gens), len(I.basis))]
    ideals = [I]
    new = gens
    for j in range(max_iter):
        images = [apply_field(f, g) for g in new]
        J = VarietyIdeal(I.generators + tuple(images), ctx).with_basis()
        if ideal_equal(I, J):
            empty = contains_one(I)
            cert = certify_invariance(f, I) if certify else None
            return ChainResult(tuple(gammas), True, j, I, empty, cert, rounds, ideals)
        new = [p for p in images if not normal_form(p, I).is_zero()]
        I = VarietyIdeal(I.generators + tuple(new), ctx).with_basis()
        rounds.append(ChainRound(j + 1, tuple(new), len(I.basis)))
        ideals.append(I)
    empty = True if contains_one(I) else None
    return ChainResult(tuple(gammas), False, None, I, empty, None, rounds, ideals)


def convert_differential(f: VectorField, phis: Sequence[Polynomial],
                         rhos: Sequence[Polynomial]) -> list:
    """theta_j = X_f(phi_j) - rho_j."""
    if len(phis) != len(rhos):
        raise ValueError(f"phi and rho lengths differ ({len(phis)} vs {len(rhos)})")
    return [apply_field(f, p) - r for p, r in zip(phis, rhos)]


# ---- LaSalle-type relations -----------------------------------------------

FIRST_INTEGRAL = "first_integral"
RELATION_FOUND = "relation_found"
NO_DEPENDENCE = "no_dependence"
ZERO_ELIMINATION = "zero_elimination"
ELIMINATION_CAP = "elimination_cap_exceeded"

# Budget for the elimination that produces mu.
RELATION_MAX_SPOLYS = 400
RELATION_MAX_TERMS = 1500


@dataclass
class LaSalleRelation:
    theta: Polynomial
    verdict: str
    k: int | None = None
    mu: Polynomial | None = None
    u_names: tuple = ()
    nondegeneracy: Polynomial | None = None
    Z: VarietyIdeal | None = None
    certificate: InvarianceCertificate | None = None
    Z_empty: bool | None = None
    Z_dimension: int | None = None
    lie_chain: tuple = ()
    mu_verified: bool = False
    other_relations: tuple = ()

    @property
    def definite(self) -> bool:
        return self.verdict in (FIRST_INTEGRAL, RELATION_FOUND)


def _u_names(ctx: VariableContext, count: int) -> list:
    prefix = "u"
    while any(f"{prefix}{i}" in ctx.index for i in range(count)):
        prefix = "_" + prefix
    return [f"{prefix}{i}" for i in range(count)]


def dependent(polys: Sequence[Polynomial], ctx: VariableContext) -> bool:
    """Jacobian criterion: all maximal minors vanish identically."""
    size = len(polys)
    if size > ctx.nstates:
        return True
    J = jacobian(polys, ctx)
    return all(m.is_zero() for m in matrix_minors(J, size))


def lasalle_relation(f: VectorField, theta: Polynomial, max_k: int = 3) -> LaSalleRelation:
    if theta.is_zero():
        raise ValueError("theta must be nonzero")
    ctx = f.ctx
    chain = [theta] + lie_derivative(f, theta, max_k + 1)
    if chain[1].is_zero():
        return LaSalleRelation(theta, FIRST_INTEGRAL, k=0, lie_chain=tuple(chain[:2]))
    k = None
    for kk in range(max_k + 1):
        if dependent(chain[:kk + 2], ctx):
            k = kk
            break
    if k is None:
        return LaSalleRelation(theta, NO_DEPENDENCE, lie_chain=tuple(chain))
    chain = chain[:k + 2]
    try:
        mu, others, uctx, unames = relation_polynomial(chain, ctx)
    except GroebnerCapExceeded:
        return LaSalleRelation(theta, ELIMINATION_CAP, k=k, lie_chain=tuple(chain))
    if mu is None:
        return LaSalleRelation(theta, ZERO_ELIMINATION, k=k, lie_chain=tuple(chain))
    verified = substitute_relation(mu, chain, ctx, unames).is_zero()
    top = unames[-1]
    d = mu.diff(top)
    nondeg = substitute_relation(d, [theta] + [ctx.zero()] * (k + 1), ctx, unames)
    Z = VarietyIdeal(tuple(chain[1:]), ctx).with_basis()
    cert = certify_invariance(f, Z)
    empty = contains_one(Z)
    dim = -1 if empty else dimension(Z, ctx.states)
    return LaSalleRelation(theta, RELATION_FOUND, k, mu, tuple(unames), nondeg, Z, cert,
                           empty, dim, tuple(chain), verified, tuple(others))


def relation_ctx(ctx: VariableContext, unames: Sequence[str]) -> VariableContext:
    """Context for relations: u-variables (highest index first) plus parameters."""
    return VariableContext(tuple(reversed(unames)), ctx.params, ctx.name)


def relation_polynomial(chain: Sequence[Polynomial], ctx: VariableContext):
    """Eliminate the states from <u_i - chain_i>; minimal-degree generator first."""
    unames = _u_names(ctx, len(chain))
    ext = ctx.extend(params=tuple(reversed(unames)))
    gens = [ext.var(u) - p.embed(ext) for u, p in zip(unames, chain)]
    E = elimination_ideal(VarietyIdeal(tuple(gens), ext), ctx.states,
                          RELATION_MAX_SPOLYS, RELATION_MAX_TERMS)
    nonzero = [g for g in E.generators if not g.is_zero()]
    uctx = relation_ctx(ctx, unames)
    if not nonzero:
        return None, [], uctx, unames
    lexu = MonomialOrder("lex")
    polys = [_to_relation_ctx(g, uctx) for g in nonzero]
    normed = [p.primitive(key=lexu.key(uctx)) for p in polys]
    normed.sort(key=lambda p: (p.total_degree(), [(m, c) for m, c in p.sorted_terms()]))
    return normed[0], normed[1:], uctx, unames


def _to_relation_ctx(p: Polynomial, uctx: VariableContext) -> Polynomial:
    out = {}
    for m, c in p.terms.items():
        named = {v: e for v, e in zip(p.ctx.variables, m) if e}
        out[tuple(named.get(v, 0) for v in uctx.variables)] = c
    return Polynomial(uctx, out)


def substitute_relation(mu: Polynomial, values: Sequence[Polynomial], ctx: VariableContext,
                        unames: Sequence[str]) -> Polynomial:
    """mu(values[0], values[1], ...) as a polynomial in ``ctx``."""
    total = ctx.zero()
    vals = dict(zip(unames, values))
    cache: dict = {}
    for m, c in mu.terms.items():
        term = ctx.const(c)
        for v, e in zip(mu.ctx.variables, m):
            if not e:
                continue
            if v in vals:
                key = (v, e)
                if key not in cache:
                    cache[key] = vals[v] ** e
                term = term * cache[key]
            else:
                term = term * ctx.var(v) ** e
        total = total + term
    return total


# ---- LaSalle search ---------------------------------------------------------

MAX_UNKNOWNS = 35
MAX_RESIDUAL = 20


@dataclass
class SearchCandidate:
    theta: Polynomial
    family: Polynomial
    free: tuple
    branch: str
    relation: LaSalleRelation
    flags: tuple = ()


@dataclass
class UnsolvedSystem:
    branch: str
    reason: str
    assignments: dict
    constraints: tuple
    family: Polynomial | None = None


@dataclass
class SearchResult:
    degree: int
    k_tested: int
    unknowns: tuple
    monomials: tuple
    constraint_count: int
    candidates: list
    unsolved: list
    cap_exceeded: bool
    notes: list = field(default_factory=list)


class CapExceeded(Exception):
    pass


def _monomials_up_to(n: int, degree: int) -> list:
    """Nonconstant exponent tuples of total degree <= degree, grevlex descending."""
    from itertools import product
    out = [m for m in product(range(degree + 1), repeat=n) if 0 < sum(m) <= degree]
    out.sort(key=lambda m: (sum(m),) + tuple(-e for e in reversed(m)), reverse=True)
    return out


def lasalle_search(f: VectorField, degree: int, max_k: int = 2) -> SearchResult:
    """Search for polynomial test functions of bounded degree admitting a
    LaSalle-type relation.

    Every nonconstant monomial up to ``degree`` gets an unknown coefficient.
    Dependence at the largest informative level k = min(max_k, n-2) is imposed
    through the coefficients (in x) of all (k+2)-minors; smaller k imply it.
    Branches fix the first nonzero coefficient to 1, then the linear stratum is
    solved exactly and small residual systems go to the Groebner engine.
    """
    if degree < 1:
        raise ValueError("degree must be at least 1")
    ctx = f.ctx
    if ctx.params:
        raise ValueError("lasalle search needs numeric parameters; substitute them first")
    n = ctx.nstates
    monos = _monomials_up_to(n, degree)
    names = [f"c{i}" for i in range(len(monos))]
    while any(v in ctx.index for v in names):
        names = ["_" + v for v in names]
    if len(monos) > MAX_UNKNOWNS:
        cctx = VariableContext(tuple(names))
        return SearchResult(degree, min(max_k, max(n - 2, 0)), tuple(names), tuple(monos), 0, [],
                            [UnsolvedSystem("root", f"{len(monos)} unknowns exceed cap {MAX_UNKNOWNS}",
                                            {}, ())], True)
    sctx = ctx.extend(params=tuple(names))
    fs = f.embed(sctx)
    theta = sctx.zero()
    for m, c in zip(monos, names):
        theta = theta + Polynomial(sctx, {tuple(m) + (0,) * len(names): Q(1)}) * sctx.var(c)
    k = min(max_k, n - 2)
    notes = []
    if k < 0:
        k = 0
        notes.append("one state variable: dependence is automatic")
    chain = [theta] + lie_derivative(fs, theta, k + 1)
    cctx = VariableContext(tuple(names))
    constraints = []
    if k + 2 <= n:
        J = jacobian(chain, sctx)
        for minor in matrix_minors(J, k + 2):
            constraints.extend(_coefficients_in_states(minor, n, cctx))
    constraints = _dedupe(constraints)
    result = SearchResult(degree, k, tuple(names), tuple(monos), len(constraints), [], [], False,
                          notes)
    families = []
    for lead in range(len(names)):
        assign = {names[i]: cctx.zero() for i in range(lead)}
        assign[names[lead]] = cctx.one()
        _solve_branch(constraints, assign, cctx, names, f"{names[lead]}=1", families, result)
    seen = set()
    for label, assign in families:
        fam = _family_poly(assign, names, monos, ctx, cctx)
        free = tuple(v for v in names if v not in assign)
        rep_assign = {v: (assign[v].subs({w: 0 for w in free}) if v in assign else cctx.zero())
                      for v in names}
        rep = ctx.zero()
        for m, v in zip(monos, names):
            c = rep_assign[v].constant_value()
            if c:
                rep = rep + Polynomial(ctx, {m: c})
        if rep.is_zero() or rep in seen:
            continue
        seen.add(rep)
        rel = lasalle_relation(f, rep, max_k)
        flags = []
        if rel.Z is not None:
            if rel.Z_empty:
                flags.append("Z empty")
            elif rel.Z_dimension is not None and rel.Z_dimension <= 0:
                flags.append("Z zero-dimensional")
        result.candidates.append(SearchCandidate(rep, fam, free, label, rel, tuple(flags)))
    return result


def _family_poly(assign, names, monos, ctx, cctx):
    """Candidate family as a polynomial in states with free unknowns as parameters."""
    free = [v for v in names if v not in assign]
    fctx = ctx.extend(params=tuple(free))
    out = fctx.zero()
    for m, v in zip(monos, names):
        coeff = assign.get(v, cctx.var(v))
        mono = Polynomial(fctx, {tuple(m) + (0,) * len(free): Q(1)})
        out = out + mono * _reembed(coeff, fctx)
    return out


def _reembed(p: Polynomial, target: VariableContext) -> Polynomial:
    out = {}
    for m, c in p.terms.items():
        e = [0] * target.nvars
        for v, k in zip(p.ctx.variables, m):
            if k:
                e[target.index[v]] = k
        out[tuple(e)] = c
    return Polynomial(target, out)


def _coefficients_in_states(p: Polynomial, n: int, cctx: VariableContext) -> list:
    groups: dict = {}
    for m, c in p.terms.items():
        groups.setdefault(m[:n], {})[m[n:]] = c
    return [Polynomial(cctx, t) for t in groups.values()]


def _dedupe(polys) -> list:
    seen = set()
    out = []
    for p in polys:
        if p.is_zero():
            continue
        q = p.primitive()
        if q not in seen:
            seen.add(q)
            out.append(q)
    return out


def _substitute_all(polys, assign):
    return _dedupe(p.subs(assign) for p in polys)


def _apply_assign(assign: dict, new: dict) -> dict:
    out = {v: p.subs(new) for v, p in assign.items()}
    out.update(new)
    return out


def _linear_stratum(constraints, assign, cctx, names):
    """Exhaust linear consequences; returns (constraints, assign) or None if infeasible."""
    while True:
        constraints = _substitute_all(constraints, assign)
        if any(p.is_constant() for p in constraints):
            return None
        linear = []
        for p in constraints:
            if p.total_degree() == 1:
                linear.append(p)
                continue
            sqf = squarefree_factors(p)
            if len(sqf) == 1 and sqf[0][0].total_degree() == 1:
                linear.append(sqf[0][0])
        if not linear:
            return constraints, assign
        solved = _echelon_solve(linear, cctx, names)
        if solved is None:
            return None
        assign = _apply_assign(assign, solved)


def _echelon_solve(linear, cctx, names):
    """Exact Gaussian elimination; columns in unknown order.  Returns
    {pivot: expression in free unknowns} or None for an inconsistent system."""
    cols = [v for v in names if any(p.degree_in(v) > 0 for p in linear)]
    ci = {v: i for i, v in enumerate(cols)}
    rows = []
    for p in linear:
        row = [Q(0)] * (len(cols) + 1)
        for m, c in p.terms.items():
            if not any(m):
                row[-1] += c
            else:
                for v, e in zip(cctx.variables, m):
                    if e:
                        row[ci[v]] += c
        rows.append(row)
    piv_rows = []
    r = 0
    for c in range(len(cols)):
        pr = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                fct = rows[i][c]
                rows[i] = [a - fct * b for a, b in zip(rows[i], rows[r])]
        piv_rows.append((c, r))
        r += 1
    for row in rows[r:]:
        if row[-1] != 0:
            return None
    out = {}
    for c, ri in piv_rows:
        row = rows[ri]
        expr = cctx.const(-row[-1])
        for j, v in enumerate(cols):
            if j != c and row[j] != 0:
                expr = expr - cctx.var(v) * row[j]
        out[cols[c]] = expr
    return out


def _rational_roots(p: Polynomial, v: str) -> list:
    """Rational roots of a univariate polynomial by the rational root test."""
    from math import gcd
    q = p.primitive()
    i = q.ctx.index[v]
    coeffs: dict = {}
    for m, c in q.terms.items():
        coeffs[m[i]] = int(c)
    low = min(coeffs)
    roots = [Q(0)] if low > 0 else []
    shifted = {e - low: c for e, c in coeffs.items()}
    a0, an = shifted[0], shifted[max(shifted)]
    if max(shifted) == 0:
        return roots

    def divisors(x):
        x = abs(x)
        ds = set()
        d = 1
        while d * d <= x:
            if x % d == 0:
                ds.add(d)
                ds.add(x // d)
            d += 1
        return sorted(ds)
    if abs(a0) > 10 ** 12 or abs(an) > 10 ** 12:
        return roots
    for num in divisors(a0):
        for den in divisors(an):
            if gcd(num, den) != 1:
                continue
            for s in (1, -1):
                r = Q(s * num, den)
                val = sum(Q(c) * r ** e for e, c in shifted.items())
                if val == 0 and r not in roots:
                    roots.append(r)
    return sorted(roots)


def _solve_branch(constraints, assign, cctx, names, label, families, result, depth=0):
    out = _linear_stratum(constraints, assign, cctx, names)
    if out is None:
        return
    residual, assign = out
    if not residual:
        families.append((label, assign))
        return
    split = _splitting_constraint(residual)
    if split is not None and depth <= 8:
        for fac in split:
            _solve_branch(residual + [fac], assign, cctx, names, f"{label}, {fac}=0",
                          families, result, depth + 1)
        return
    if len(residual) > MAX_RESIDUAL or depth > 8:
        result.unsolved.append(UnsolvedSystem(
            label, f"{len(residual)} residual constraints exceed cap {MAX_RESIDUAL}"
            if len(residual) > MAX_RESIDUAL else "branching depth exhausted",
            dict(assign), tuple(residual)))
        result.cap_exceeded = True
        return
    G = groebner_basis(VarietyIdeal(tuple(residual), cctx)).basis
    if len(G) == 1 and G[0].is_constant():
        return
    out = _linear_stratum(list(G), assign, cctx, names)
    if out is None:
        return
    residual, assign = out
    if not residual:
        families.append((label, assign))
        return
    G = groebner_basis(VarietyIdeal(tuple(residual), cctx)).basis
    if len(G) == 1 and G[0].is_constant():
        return
    for g in G:
        used = g.variables_used()
        if len(used) == 1:
            v = used[0]
            roots = _rational_roots(g, v)
            for r in roots:
                _solve_branch(list(G), _apply_assign(assign, {v: cctx.const(r)}), cctx, names,
                              f"{label}, {v}={_fmt(r)}", families, result, depth + 1)
            if g.total_degree() > len(roots):
                result.notes.append(f"branch {label}: non-rational roots of {g} not explored")
            return
    result.unsolved.append(UnsolvedSystem(label, "no univariate element for root branching",
                                          dict(assign), tuple(G)))
    result.cap_exceeded = True


def _splitting_constraint(constraints):
    """A constraint that factors into several square-free pieces with at least
    one linear piece; the simplest such constraint is chosen."""
    best = None
    for p in constraints:
        facs = [f for f, _ in squarefree_factors(p)]
        if len(facs) < 2 or not any(f.total_degree() == 1 for f in facs):
            continue
        score = (len(facs), sum(f.total_degree() for f in facs))
        if best is None or score < best[0]:
            best = (score, facs)
    return None if best is None else best[1]


def _fmt(r) -> str:
    r = Q(r)
    return str(int(r.numerator)) if r.denominator == 1 else f"{int(r.numerator)}/{int(r.denominator)}"
