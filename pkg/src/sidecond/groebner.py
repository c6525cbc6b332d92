"""Buchberger's algorithm, normal forms, membership and elimination."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .polycore import (Q, RESERVED_PREFIX, ContextError, Polynomial, VariableContext)


@dataclass(frozen=True)
class MonomialOrder:
    """Monomial order: ``grevlex``, ``lex`` or ``block``.

    For block orders ``blocks`` lists groups of variable names, most
    significant group first; inside a group graded reverse lex is used.
    """

    kind: str = "grevlex"
    blocks: tuple = ()

    def __post_init__(self):
        if self.kind not in ("grevlex", "lex", "block"):
            raise ValueError(f"unknown monomial order {self.kind!r}")
        object.__setattr__(self, "blocks", tuple(tuple(b) for b in self.blocks))

    def check(self, ctx: VariableContext):
        if self.kind != "block":
            return
        names = [v for b in self.blocks for v in b]
        if sorted(names) != sorted(ctx.variables) or len(set(names)) != len(names):
            raise ValueError("block order must list every context variable exactly once")

    def key(self, ctx: VariableContext):
        """A function mapping an exponent tuple to a flat integer tuple;
        larger tuple means larger monomial."""
        if self.kind == "grevlex":
            return _grevlex_flat
        if self.kind == "lex":
            return lambda m: m
        self.check(ctx)
        groups = [[ctx.index[v] for v in b] for b in self.blocks]

        def key(m):
            out = []
            for g in groups:
                out.append(sum(m[i] for i in g))
                out.extend(-m[i] for i in reversed(g))
            return tuple(out)
        return key

    def __str__(self):
        if self.kind == "block":
            return "block(" + " > ".join("[" + ",".join(b) + "]" for b in self.blocks) + ")"
        return self.kind


GREVLEX = MonomialOrder()


def _grevlex_flat(m):
    return (sum(m),) + tuple(-e for e in reversed(m))


def block_order(*groups) -> MonomialOrder:
    return MonomialOrder("block", tuple(tuple(g) for g in groups if g))


class GroebnerCapExceeded(RuntimeError):
    """Raised when Buchberger processes more S-polynomials than allowed."""


class BasisMissing(ValueError):
    pass


@dataclass
class VarietyIdeal:
    generators: tuple
    ctx: VariableContext = None
    basis: tuple | None = None
    order: MonomialOrder | None = None

    def __post_init__(self):
        self.generators = tuple(self.generators)
        if self.ctx is None:
            if not self.generators:
                raise ValueError("an ideal with no generators needs an explicit context")
            self.ctx = self.generators[0].ctx
        for g in self.generators:
            if g.ctx != self.ctx:
                raise ContextError("generators belong to different contexts")

    @property
    def nonzero_generators(self) -> tuple:
        return tuple(g for g in self.generators if not g.is_zero())

    def with_basis(self, order: MonomialOrder = GREVLEX) -> "VarietyIdeal":
        if self.basis is not None and self.order == order:
            return self
        return groebner_basis(self, order)

    def is_unit(self) -> bool:
        b = self.with_basis(self.order or GREVLEX).basis
        return len(b) == 1 and b[0].is_constant()

    def is_zero(self) -> bool:
        return not self.nonzero_generators

    def __str__(self):
        return "<" + ", ".join(str(g) for g in self.generators) + ">"


def ideal(gens: Sequence[Polynomial], ctx: VariableContext | None = None) -> VarietyIdeal:
    return VarietyIdeal(tuple(gens), ctx)


# ---- internal term-dict machinery --------------------------------------

class _Poly:
    """Working polynomial for the engine: terms plus cached leading data."""

    __slots__ = ("terms", "lm", "lc", "tail")

    def __init__(self, terms: dict, key):
        self.terms = terms
        self.lm = max(terms, key=key)
        self.lc = terms[self.lm]
        self.tail = [(m, c) for m, c in terms.items() if m != self.lm]


def _divides(a, b) -> bool:
    for x, y in zip(a, b):
        if x > y:
            return False
    return True


def _lcm(a, b):
    return tuple(x if x > y else y for x, y in zip(a, b))


def _reduce(terms: dict, basis: Sequence[_Poly], key, cofactors: bool = False, full=True):
    """Full reduction of ``terms`` by ``basis``; returns (remainder, quotients)."""
    rest = dict(terms)
    heap = [(_neg(key(m)), m) for m in rest]
    heapq.heapify(heap)
    rem: dict = {}
    quots = [dict() for _ in basis] if cofactors else None
    while heap:
        _, m = heapq.heappop(heap)
        c = rest.pop(m, None)
        if c is None:
            continue
        for gi, g in enumerate(basis):
            if _divides(g.lm, m):
                qm = tuple(x - y for x, y in zip(m, g.lm))
                qc = c / g.lc
                if cofactors:
                    q = quots[gi]
                    v = q.get(qm, 0) + qc
                    if v:
                        q[qm] = v
                    else:
                        q.pop(qm, None)
                for tm, tc in g.tail:
                    t = tuple(x + y for x, y in zip(tm, qm))
                    old = rest.get(t)
                    if old is None:
                        rest[t] = -qc * tc
                        heapq.heappush(heap, (_neg(key(t)), t))
                    else:
                        v = old - qc * tc
                        if v:
                            rest[t] = v
                        else:
                            del rest[t]
                break
        else:
            rem[m] = c
            if not full:
                rem.update(rest)
                break
    return rem, quots


def _neg(k):
    return tuple(-x for x in k)


def _spoly(f: _Poly, g: _Poly) -> dict:
    L = _lcm(f.lm, g.lm)
    mf = tuple(x - y for x, y in zip(L, f.lm))
    mg = tuple(x - y for x, y in zip(L, g.lm))
    out: dict = {}
    cf = 1 / f.lc
    cg = 1 / g.lc
    for m, c in f.tail:
        t = tuple(x + y for x, y in zip(m, mf))
        out[t] = out.get(t, 0) + c * cf
    for m, c in g.tail:
        t = tuple(x + y for x, y in zip(m, mg))
        v = out.get(t, 0) - c * cg
        if v:
            out[t] = v
        else:
            out.pop(t, None)
    return {m: c for m, c in out.items() if c}


def _monic(terms: dict, key) -> dict:
    lm = max(terms, key=key)
    inv = 1 / terms[lm]
    return {m: c * inv for m, c in terms.items()}


def _buchberger(polys: list, key, max_spolys: int | None = None,
                max_terms: int | None = None) -> list:
    """Gebauer-Moeller Buchberger; returns a reduced monic basis (list of dicts)."""
    G: list = []
    removed: set = set()
    P: set = set()

    def coprime(a, b):
        return all(not (x and y) for x, y in zip(a, b))

    def update(P):
        # install h = G[-1]
        hi = len(G) - 1
        h = G[hi].lm
        C = [i for i in range(hi) if i not in removed]
        D: list = []
        while C:
            i = C.pop(0)
            lij = _lcm(h, G[i].lm)
            if coprime(h, G[i].lm) or not any(
                    _divides(_lcm(h, G[j].lm), lij) for j in C + D):
                D.append(i)
        newP = set()
        for (i, j) in P:
            lij = _lcm(G[i].lm, G[j].lm)
            if (not _divides(h, lij) or _lcm(G[i].lm, h) == lij
                    or _lcm(G[j].lm, h) == lij):
                newP.add((i, j))
        for i in D:
            if not coprime(h, G[i].lm):
                newP.add((i, hi))
        for i in range(hi):
            if i not in removed and _divides(h, G[i].lm):
                removed.add(i)
        return newP

    def active():
        return [g for i, g in enumerate(G) if i not in removed]

    for t in polys:
        if not t:
            continue
        r, _ = _reduce(t, active(), key)
        if not r:
            continue
        G.append(_Poly(_monic(r, key), key))
        P = update(P)
    processed = 0
    while P:
        if max_spolys is not None and processed >= max_spolys:
            raise GroebnerCapExceeded(f"more than {max_spolys} S-polynomials")
        processed += 1
        i, j = min(P, key=lambda ij: (key(_lcm(G[ij[0]].lm, G[ij[1]].lm)), ij))
        P.discard((i, j))
        s = _spoly(G[i], G[j])
        if not s:
            continue
        r, _ = _reduce(s, active(), key)
        if not r:
            continue
        if max_terms is not None and len(r) > max_terms:
            raise GroebnerCapExceeded(f"intermediate polynomial with {len(r)} terms "
                                      f"(cap {max_terms})")
        G.append(_Poly(_monic(r, key), key))
        P = update(P)
    basis = active()
    # minimalize then interreduce
    basis.sort(key=lambda g: key(g.lm))
    minimal = []
    for g in basis:
        if not any(_divides(h.lm, g.lm) for h in minimal):
            minimal.append(g)
    reduced = []
    for idx, g in enumerate(minimal):
        others = minimal[:idx] + minimal[idx + 1:]
        tail, _ = _reduce(dict(g.tail), others, key)
        t = dict(tail)
        t[g.lm] = g.lc
        reduced.append(_monic(t, key))
    reduced.sort(key=lambda t: key(max(t, key=key)), reverse=True)
    return reduced


# ---- public operations -------------------------------------------------

def groebner_basis(I: VarietyIdeal, order: MonomialOrder = GREVLEX,
                   max_spolys: int | None = None, max_terms: int | None = None) -> VarietyIdeal:
    """Reduced Groebner basis of I, attached to a copy of I.

    ``max_spolys`` bounds the number of S-polynomials reduced and
    ``max_terms`` the size of any new basis element; past either,
    GroebnerCapExceeded is raised."""
    order.check(I.ctx)
    key = order.key(I.ctx)
    gens = [dict(g.terms) for g in I.generators if not g.is_zero()]
    basis = _buchberger(gens, key, max_spolys, max_terms)
    polys = tuple(Polynomial._raw(I.ctx, t) for t in basis)
    return VarietyIdeal(I.generators, I.ctx, polys, order)


def _working_basis(I: VarietyIdeal):
    if I.basis is None:
        raise BasisMissing("ideal has no Groebner basis attached")
    key = I.order.key(I.ctx)
    return [_Poly(dict(b.terms), key) for b in I.basis], key


def normal_form(p: Polynomial, I: VarietyIdeal, with_cofactors: bool = False):
    """Remainder of p modulo the attached basis; optionally the quotients.

    With ``with_cofactors`` the result is ``(r, [q_1, ...])`` satisfying
    ``p = sum q_i * basis_i + r``.
    """
    if p.ctx != I.ctx:
        raise ContextError("polynomial and ideal belong to different contexts")
    basis, key = _working_basis(I)
    r, q = _reduce(p.terms, basis, key, cofactors=with_cofactors)
    rem = Polynomial._raw(I.ctx, r)
    if not with_cofactors:
        return rem
    return rem, [Polynomial._raw(I.ctx, t) for t in q]


def rabinowitsch_context(ctx: VariableContext) -> tuple:
    name = RESERVED_PREFIX + "_t"
    i = 0
    while name in ctx.index:
        i += 1
        name = f"{RESERVED_PREFIX}_t{i}"
    return ctx.extend(params=(name,)), name


def membership(p: Polynomial, I: VarietyIdeal, mode: str = "ideal") -> bool:
    if mode == "ideal":
        J = I.with_basis(I.order or GREVLEX)
        return normal_form(p, J).is_zero()
    if mode != "radical":
        raise ValueError(f"unknown membership mode {mode!r}")
    if p.is_zero():
        return True
    # quick exit: ideal membership implies radical membership
    J = I.with_basis(I.order or GREVLEX)
    if normal_form(p, J).is_zero():
        return True
    ext, t = rabinowitsch_context(I.ctx)
    tv = ext.var(t)
    gens = [g.embed(ext) for g in I.generators] + [ext.one() - tv * p.embed(ext)]
    G = groebner_basis(VarietyIdeal(gens, ext))
    return len(G.basis) == 1 and G.basis[0].is_constant()


def contains_one(I: VarietyIdeal) -> bool:
    if I.is_zero():
        return False
    J = I.with_basis(I.order or GREVLEX)
    return len(J.basis) == 1 and J.basis[0].is_constant()


def ideal_equal(I: VarietyIdeal, J: VarietyIdeal) -> bool:
    if I.ctx != J.ctx:
        raise ContextError("ideals belong to different contexts")
    Ib = I.with_basis(I.order or GREVLEX) if not I.is_zero() else I
    Jb = J.with_basis(J.order or GREVLEX) if not J.is_zero() else J
    return _subset(I, Jb) and _subset(J, Ib)


def _subset(I: VarietyIdeal, Jb: VarietyIdeal) -> bool:
    gens = I.nonzero_generators
    if not gens:
        return True
    if Jb.is_zero():
        return False
    return all(normal_form(g, Jb).is_zero() for g in gens)


def elimination_ideal(I: VarietyIdeal, drop: Iterable[str], max_spolys: int | None = None,
                      max_terms: int | None = None) -> VarietyIdeal:
    """Generators of I intersected with the subring free of ``drop``."""
    drop = list(drop)
    for v in drop:
        if v not in I.ctx.index:
            raise KeyError(f"unknown variable {v!r}")
    keep = [v for v in I.ctx.variables if v not in drop]
    if not keep:
        raise ValueError("cannot eliminate every variable")
    order = block_order(drop, keep)
    if I.is_zero():
        return VarietyIdeal((), I.ctx, (), order)
    G = groebner_basis(I, order, max_spolys, max_terms)
    di = [I.ctx.index[v] for v in drop]
    kept = tuple(b for b in G.basis if not any(m[i] for m in b.terms for i in di))
    return VarietyIdeal(kept, I.ctx, kept, order)


def s_polynomial(f: Polynomial, g: Polynomial, order: MonomialOrder = GREVLEX) -> Polynomial:
    key = order.key(f.ctx)
    return Polynomial._raw(f.ctx, _spoly(_Poly(dict(f.terms), key), _Poly(dict(g.terms), key)))


def leading_monomial(p: Polynomial, order: MonomialOrder = GREVLEX):
    key = order.key(p.ctx)
    return max(p.terms, key=key)


def reduce_by(p: Polynomial, divisors: Sequence[Polynomial], order: MonomialOrder = GREVLEX):
    """Multivariate division of p by an arbitrary ordered list."""
    key = order.key(p.ctx)
    basis = [_Poly(dict(d.terms), key) for d in divisors]
    r, q = _reduce(p.terms, basis, key, cofactors=True)
    return Polynomial._raw(p.ctx, r), [Polynomial._raw(p.ctx, t) for t in q]


def dimension(I: VarietyIdeal, over: Sequence[str] | None = None) -> int:
    """Combinatorial dimension of V(I) counted in the variables ``over``.

    Other variables are treated as generic coefficients: the basis is taken in
    a block order with ``over`` first, and only the ``over``-parts of leading
    monomials count.  Returns -1 for an empty variety.
    """
    from itertools import combinations

    ctx = I.ctx
    over = list(ctx.variables if over is None else over)
    rest = [v for v in ctx.variables if v not in over]
    if I.is_zero():
        return len(over)
    order = block_order(over, rest) if rest else GREVLEX
    G = I.with_basis(order)
    key = order.key(ctx)
    idx = [ctx.index[v] for v in over]
    supports = []
    for b in G.basis:
        lm = max(b.terms, key=key)
        supports.append({i for i in idx if lm[i]})
    if any(not s for s in supports):
        return -1
    for size in range(len(idx), -1, -1):
        for S in combinations(idx, size):
            S = set(S)
            if not any(s <= S for s in supports):
                return size
    return -1
