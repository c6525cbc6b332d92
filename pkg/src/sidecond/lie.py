"""Lie derivatives, brackets, divergence and minors of field matrices."""

from __future__ import annotations

from itertools import combinations
from typing import Sequence

from .groebner import VarietyIdeal
from .polycore import ContextError, Polynomial, VariableContext


class VectorField:
    """One polynomial component per state variable; parameters stay inert."""

    __slots__ = ("ctx", "components")

    def __init__(self, ctx: VariableContext, components: Sequence):
        comps = tuple(c if isinstance(c, Polynomial) else ctx.const(c) for c in components)
        if len(comps) != ctx.nstates:
            raise ValueError(f"vector field needs {ctx.nstates} components, got {len(comps)}")
        for c in comps:
            if c.ctx != ctx:
                raise ContextError("component belongs to a different context")
        self.ctx = ctx
        self.components = comps

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def __eq__(self, other):
        return isinstance(other, VectorField) and self.ctx == other.ctx \
            and self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __add__(self, other):
        return VectorField(self.ctx, [a + b for a, b in zip(self, other)])

    def __sub__(self, other):
        return VectorField(self.ctx, [a - b for a, b in zip(self, other)])

    def __neg__(self):
        return VectorField(self.ctx, [-a for a in self])

    def scale(self, p) -> "VectorField":
        return VectorField(self.ctx, [a * p for a in self])

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def subs(self, values) -> "VectorField":
        return VectorField(self.ctx, [c.subs(values) for c in self])

    def embed(self, ctx: VariableContext) -> "VectorField":
        return VectorField(ctx, [c.embed(ctx) for c in self])

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self) + ")"

    __repr__ = __str__


def _check(f: VectorField, p):
    if f.ctx != p.ctx:
        raise ContextError("vector field and polynomial belong to different contexts")


def apply_field(f: VectorField, psi: Polynomial) -> Polynomial:
    """X_f(psi) = D psi . f, differentiating state variables only."""
    _check(f, psi)
    out = psi.ctx.zero()
    for v, fi in zip(f.ctx.states, f.components):
        if fi.is_zero():
            continue
        d = psi.diff(v)
        if not d.is_zero():
            out = out + d * fi
    return out


def lie_derivative(f: VectorField, psi: Polynomial, k: int = 1) -> list:
    """[X_f(psi), ..., X_f^k(psi)]."""
    if k < 1:
        raise ValueError("k must be positive")
    out = []
    cur = psi
    for _ in range(k):
        cur = apply_field(f, cur)
        out.append(cur)
    return out


def bracket(g: VectorField, f: VectorField) -> VectorField:
    """[g, f] = Df.g - Dg.f."""
    if g.ctx != f.ctx:
        raise ContextError("vector fields belong to different contexts")
    return VectorField(f.ctx, [apply_field(g, fi) - apply_field(f, gi) for fi, gi in zip(f, g)])


def lie_bracket(g: VectorField, f: VectorField, k: int = 1) -> list:
    """[(ad g)(f), ..., (ad g)^k(f)]."""
    if k < 1:
        raise ValueError("k must be positive")
    out = []
    cur = f
    for _ in range(k):
        cur = bracket(g, cur)
        out.append(cur)
    return out


def divergence(f: VectorField) -> Polynomial:
    out = f.ctx.zero()
    for v, fi in zip(f.ctx.states, f.components):
        out = out + fi.diff(v)
    return out


def jacobian(polys: Sequence[Polynomial], ctx: VariableContext) -> list:
    """Rows = polynomials, columns = state variables."""
    return [[p.diff(v) for v in ctx.states] for p in polys]


def determinant(M: Sequence[Sequence[Polynomial]]) -> Polynomial:
    """Exact determinant by cofactor expansion (matrices here are tiny)."""
    n = len(M)
    if n == 1:
        return M[0][0]
    if n == 2:
        return M[0][0] * M[1][1] - M[0][1] * M[1][0]
    ctx = M[0][0].ctx
    total = ctx.zero()
    for j in range(n):
        if M[0][j].is_zero():
            continue
        sub = [row[:j] + row[j + 1:] for row in M[1:]]
        term = M[0][j] * determinant(sub)
        total = total + term if j % 2 == 0 else total - term
    return total


def matrix_minors(M: Sequence[Sequence[Polynomial]], size: int) -> list:
    """All size x size minors, rows and columns in lexicographic tuple order."""
    nr, nc = len(M), len(M[0]) if M else 0
    if not 1 <= size <= min(nr, nc):
        raise ValueError(f"minor size {size} out of range for a {nr}x{nc} matrix")
    out = []
    for rows in combinations(range(nr), size):
        for cols in combinations(range(nc), size):
            out.append(determinant([[M[r][c] for c in cols] for r in rows]))
    return out


def field_minors(columns: Sequence[VectorField], size: int) -> list:
    """Minors of the n x r matrix whose columns are the given fields."""
    if not columns:
        raise ValueError("need at least one column")
    ctx = columns[0].ctx
    for c in columns:
        if c.ctx != ctx:
            raise ContextError("columns belong to different contexts")
    M = [[col[i] for col in columns] for i in range(ctx.nstates)]
    return matrix_minors(M, size)


def minor_ideal(columns: Sequence[VectorField], size: int) -> VarietyIdeal:
    return VarietyIdeal(tuple(field_minors(columns, size)), columns[0].ctx)
