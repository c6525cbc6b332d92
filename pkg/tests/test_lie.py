import pytest
from hypothesis import given, strategies as st

from sidecond.groebner import VarietyIdeal, ideal_equal
from sidecond.lie import (VectorField, apply_field, bracket, divergence, field_minors,
                          lie_bracket, lie_derivative, minor_ideal)
from sidecond.polycore import Polynomial, Q, VariableContext
from oracles import bracket_oracle, lie_derivative_oracle, same

CTX = VariableContext(("x1", "x2", "x3"))
x1, x2, x3 = CTX.gens()
PLANE = VariableContext(("x1", "x2"))
y1, y2 = PLANE.gens()
F26 = VectorField(CTX, [x1 - x2**2 + x3, x3, x1 + x1**2 + 2 * x2 * x3])


def polys(ctx, max_deg=2):
    n = ctx.nvars
    mono = st.tuples(*[st.integers(0, max_deg)] * n).filter(lambda m: sum(m) <= max_deg)
    return st.dictionaries(mono, st.integers(-4, 4).filter(bool), max_size=4).map(
        lambda d: Polynomial(ctx, {m: Q(c) for m, c in d.items()}))


def fields(ctx, max_deg=2):
    return st.lists(polys(ctx, max_deg), min_size=ctx.nstates, max_size=ctx.nstates).map(
        lambda cs: VectorField(ctx, cs))


def test_lie_derivative_examples():
    d1, d2 = lie_derivative(F26, x1, 2)
    assert d1 == x1 - x2**2 + x3
    assert d2 == (2 + x1) * x1 - x2**2 + x3
    assert lie_derivative(F26, CTX.const(5), 1) == [CTX.zero()]
    with pytest.raises(ValueError):
        lie_derivative(F26, x1, 0)


def test_lie_derivative_matches_sympy():
    psi = x1**2 * x3 - 3 * x2 + 1
    names = list(CTX.variables)
    for p in lie_derivative(F26, psi, 3):
        ref = lie_derivative_oracle(list(F26), str(psi), names)
        assert same(p, ref, names)
        psi = p


def test_bracket_examples():
    f = VectorField(PLANE, [y1 + y2 + y1**2 * y2, y2 + y1 * y2**2])
    g = VectorField(PLANE, [y1, -y2])
    assert list(bracket(g, f)) == [-2 * y2, PLANE.zero()]
    assert bracket(f, f).is_zero()
    f0 = VectorField(PLANE, [PLANE.one(), PLANE.zero()])
    g0 = VectorField(PLANE, [y1, PLANE.zero()])
    assert list(bracket(g0, f0)) == [-PLANE.one(), PLANE.zero()]
    chain = lie_bracket(g, f, 2)
    assert list(chain[1]) == [4 * y2, PLANE.zero()]


def test_parameters_are_inert():
    ctx = VariableContext(("s", "c"), ("k",))
    s, c, k = ctx.gens()
    f = VectorField(ctx, [-k * s, k * s])
    assert apply_field(f, k * s) == -k**2 * s
    assert divergence(f) == -k


def test_divergence_examples():
    assert divergence(VectorField(PLANE, [y1, y2])) == 2
    assert divergence(VectorField(PLANE, [y2, -y1])) == 0
    ctx = VariableContext(("s", "c"), ("e0", "k1", "km1", "k2"))
    s, c, e0, k1, km1, k2 = ctx.gens()
    f = VectorField(ctx, [-k1 * e0 * s + (k1 * s + km1) * c, k1 * e0 * s - (k1 * s + km1 + k2) * c])
    assert divergence(f) == f[0].diff("s") + f[1].diff("c")
    assert divergence(f) == -k1 * e0 + k1 * c - k1 * s - km1 - k2


def test_minor_ideal_examples():
    f = VectorField(PLANE, [y1 + y2, y2**2])
    g = VectorField(PLANE, [-y2, y1])
    I = minor_ideal([f, g], 2)
    assert list(I.generators) == [f[0] * g[1] - f[1] * g[0]]
    # alpha*(x1, x2) + beta*(-x2, x1) against g = (-x2, x1)
    alpha, beta = y1 + 3, y2**2
    fa = VectorField(PLANE, [alpha * y1 - beta * y2, alpha * y2 + beta * y1])
    assert field_minors([fa, g], 2) == [alpha * (y1**2 + y2**2)]
    c = VectorField(CTX, [x1, x2, x3])
    assert all(m.is_zero() for m in field_minors([c, c], 2))
    assert ideal_equal(minor_ideal([F26], 1), VarietyIdeal(tuple(F26), CTX))
    with pytest.raises(ValueError):
        minor_ideal([f, g], 3)


@given(fields(PLANE), fields(PLANE), fields(PLANE))
def test_jacobi_identity(a, b, c):
    total = bracket(a, bracket(b, c)) + bracket(b, bracket(c, a)) + bracket(c, bracket(a, b))
    assert total.is_zero()


@given(fields(CTX), polys(CTX), polys(CTX))
def test_leibniz_compatibility(f, p, q):
    assert apply_field(f, p * q) == p * apply_field(f, q) + q * apply_field(f, p)


@given(fields(PLANE), fields(PLANE), polys(PLANE, 3))
def test_bracket_is_commutator(g, f, psi):
    lhs = apply_field(bracket(g, f), psi)
    rhs = apply_field(g, apply_field(f, psi)) - apply_field(f, apply_field(g, psi))
    assert lhs == rhs


def test_bracket_matches_sympy():
    g = VectorField(CTX, [x2 * x3, x1**2, x3 - x1])
    names = list(CTX.variables)
    ref = bracket_oracle(list(g), list(F26), names)
    for comp, r in zip(bracket(g, F26), ref):
        assert same(comp, r, names)
