import itertools
import time

import pytest

from sidecond.groebner import VarietyIdeal, dimension, ideal_equal, membership
from sidecond.invariants import (ELIMINATION_CAP, FIRST_INTEGRAL, INVARIANT_BY_COFACTORS, INVARIANT_BY_RADICAL,
                                 NO_DEPENDENCE, NOT_INVARIANT, RELATION_FOUND, certify_invariance,
                                 chain_stabilize, convert_differential, dependent,
                                 lasalle_relation, lasalle_search, substitute_relation)
from sidecond.lie import VectorField, apply_field, lie_derivative
from sidecond.polycore import Q, VariableContext
from oracles import lie_derivative_oracle, same, sym

CTX = VariableContext(("x1", "x2", "x3"))
x1, x2, x3 = CTX.gens()
PLANE = VariableContext(("x1", "x2"))
y1, y2 = PLANE.gens()
F26 = VectorField(CTX, [x1 - x2**2 + x3, x3, x1 + x1**2 + 2 * x2 * x3])
F_LASALLE = VectorField(CTX, [x2 + x3 - x1 * x2 - 2 * x2 * x3 + x2**2 * x3 - x2 * x3**2 - x2**3,
                              x2 - x2**2 + x2 * x3, x1 + x3 + x2**2])
F_LASALLE_PRINTED = VectorField(CTX, [x2 + x3 - x1 * x2 - x2 * x3 - x2**2 * x3,
                                      x2 - x2**2 + x2 * x3, x1 + x3 + x2**2])


def excirc(beta):
    return VectorField(PLANE, [-y1 - y2 + y1**3 + y1 * y2**2,
                               (1 + beta) * y1 + y2 - y1**3 - y1**2 * y2 - y1 * y2**2 - y2**3])


def test_chain_parabola():
    res = chain_stabilize(F26, [x1])
    assert res.stabilized and res.K == 1 and res.nonempty
    assert ideal_equal(res.ideal, VarietyIdeal((x1, x2**2 - x3), CTX))
    assert res.certificate.kind == INVARIANT_BY_COFACTORS
    assert res.certificate.verify(F26)
    for a, b in zip(res.ideals, res.ideals[1:]):
        assert all(membership(g, b, "ideal") for g in a.generators)


def test_chain_circle_dichotomy():
    sigma = y1**2 + y2**2 - 1
    for beta, circle in ((1, True), (2, False)):
        f = excirc(beta)
        phi2 = apply_field(f, y1)
        gammas = convert_differential(f, [y1, phi2], [phi2, -y1])
        assert gammas[0].is_zero()
        res = chain_stabilize(f, gammas)
        assert res.stabilized
        assert res.certificate.invariant and res.certificate.verify(f)
        S = VarietyIdeal((sigma,), PLANE)
        on_circle = all(membership(g, S, "radical") for g in res.ideal.basis)
        assert on_circle is circle
        if not circle:
            assert membership(y1, res.ideal, "radical") and membership(y2, res.ideal, "radical")


def test_chain_damped_quartic_origin():
    f = VectorField(PLANE, [y2, -4 * y1**3 - y2])
    res = chain_stabilize(f, [-2 * y2**2])
    assert res.stabilized
    assert membership(y1, res.ideal, "radical") and membership(y2, res.ideal, "radical")
    assert all(membership(c, res.ideal, "radical") for c in f)


def test_chain_cap_reported():
    f = VectorField(PLANE, [PLANE.one(), y1])
    res = chain_stabilize(f, [y2 - y1**6], max_iter=2)
    assert not res.stabilized and res.K is None and res.certificate is None


def test_certificates():
    f = VectorField(PLANE, [y1 + y2 + y1**2 * y2, y2 + y1 * y2**2])
    c = certify_invariance(f, VarietyIdeal((y2,), PLANE))
    assert c.kind == INVARIANT_BY_COFACTORS
    assert c.cofactors == ((1 + y1 * y2,),)
    f0 = VectorField(PLANE, [PLANE.one(), PLANE.zero()])
    c = certify_invariance(f0, VarietyIdeal((y1,), PLANE))
    assert c.kind == NOT_INVARIANT and c.witness_image == 1
    c = certify_invariance(f0, VarietyIdeal((PLANE.one(),), PLANE))
    assert c.kind == INVARIANT_BY_COFACTORS and c.verify(f0)


def test_radical_route():
    # x^2 under x' = 1: the image 2x lies in the radical, yet the origin is
    # not invariant; saturation must find that.
    ctx = VariableContext(("x", "y"))
    x, y = ctx.gens()
    c = certify_invariance(VectorField(ctx, [ctx.one(), ctx.zero()]), VarietyIdeal((x**2,), ctx))
    assert c.kind == NOT_INVARIANT
    # x^2 under x' = x*y, y' = 1: images stay in <x>, which is invariant.
    f = VectorField(ctx, [y * x + x**2, ctx.one()])
    c = certify_invariance(f, VarietyIdeal((x**2,), ctx))
    assert c.invariant
    assert c.verify(f)
    f = VectorField(ctx, [y, ctx.zero()])
    c = certify_invariance(f, VarietyIdeal((x**2, y**2), ctx))
    assert c.kind == INVARIANT_BY_RADICAL and c.verify(f)


def test_convert_differential_examples():
    names = list(CTX.variables)
    g = convert_differential(F26, [x1**2 + x2], [x3])
    oracle = lie_derivative_oracle(list(F26), str(x1**2 + x2), names) - sym("x3", names)
    assert same(g[0], oracle, names)
    # The x2' = x3 contribution cancels rho exactly, so no -x3 term survives.
    assert g == [2 * x1**2 - 2 * x1 * x2**2 + 2 * x1 * x3]
    assert convert_differential(F26, [x1], [apply_field(F26, x1)]) == [CTX.zero()]
    with pytest.raises(ValueError):
        convert_differential(F26, [x1], [])


def test_differential_condition_chain_keeps_parabola():
    g = convert_differential(F26, [x1**2 + x2], [x3])
    res = chain_stabilize(F26, g)
    assert res.stabilized and res.certificate.invariant
    parabola = VarietyIdeal((x1, x2**2 - x3), CTX)
    assert all(membership(b, parabola, "radical") for b in res.ideal.basis)
    # with a stray -x3 the same chain collapses to the origin over the reals
    res = chain_stabilize(F26, [g[0] - x3])
    assert membership(x3, res.ideal, "radical")
    assert ideal_equal(res.ideal, VarietyIdeal((x1**2 + x1, x2**2 - x1, x3), CTX))


def test_lasalle_corrected_example():
    t = time.perf_counter()
    rel = lasalle_relation(F_LASALLE, x1 + x2 * x3)
    assert time.perf_counter() - t < 2
    assert rel.verdict == RELATION_FOUND and rel.k == 1
    assert str(rel.mu) == "u2 - u1 - u0"
    assert rel.mu_verified
    assert rel.lie_chain[1] == x2 + x3
    assert rel.lie_chain[2] == x1 + x2 + x3 + x2 * x3
    assert ideal_equal(rel.Z, VarietyIdeal((x1 - x3**2, x2 + x3), CTX))
    assert rel.certificate.invariant and rel.certificate.verify(F_LASALLE)
    assert rel.Z_dimension == 1


def test_lasalle_other_field_pins_recomputed_derivatives():
    names = list(CTX.variables)
    theta = x1 + x2 * x3
    d1 = lie_derivative(F_LASALLE_PRINTED, theta, 1)[0]
    assert same(d1, lie_derivative_oracle(list(F_LASALLE_PRINTED), str(theta), names), names)
    assert str(d1) == "x2^3 - 2*x2^2*x3 + x2*x3^2 + x2*x3 + x2 + x3"
    assert d1 != x2 + x3
    assert lasalle_relation(F_LASALLE_PRINTED, theta, max_k=1).verdict == NO_DEPENDENCE
    # four functions of three states are always dependent, but the relation
    # is too large for the elimination budget
    t = time.perf_counter()
    rel = lasalle_relation(F_LASALLE_PRINTED, theta)
    assert rel.verdict == ELIMINATION_CAP and rel.k == 2 and not rel.definite
    assert time.perf_counter() - t < 5


def test_lasalle_small_cases():
    f = VectorField(PLANE, [y2, -y1])
    assert lasalle_relation(f, y1**2 + y2**2).verdict == FIRST_INTEGRAL
    f = VectorField(PLANE, [y1, y2])
    rel = lasalle_relation(f, y1)
    assert rel.verdict == RELATION_FOUND and rel.k == 0
    assert str(rel.mu) == "u1 - u0"
    assert rel.certificate.invariant
    with pytest.raises(ValueError):
        lasalle_relation(f, PLANE.zero())


def test_relation_substitution_vanishes():
    rel = lasalle_relation(F_LASALLE, x1 + x2 * x3)
    assert substitute_relation(rel.mu, list(rel.lie_chain), CTX, rel.u_names).is_zero()
    for other in rel.other_relations:
        assert substitute_relation(other, list(rel.lie_chain), CTX, rel.u_names).is_zero()


def test_dependence_criterion():
    assert dependent([x1 + x2, (x1 + x2) ** 2], CTX)
    assert not dependent([x1, x2], CTX)


def test_z_points_on_grid():
    rel = lasalle_relation(F_LASALLE, x1 + x2 * x3)
    hits = 0
    for a, b, c in itertools.product(range(-3, 4), repeat=3):
        pt = {"x1": Q(a), "x2": Q(b), "x3": Q(c)}
        if all(g.evaluate(pt) == 0 for g in rel.Z.basis):
            hits += 1
            assert all(g.evaluate(pt) == 0 for g in rel.Z.generators)
            assert a == c * c and b == -c
    assert hits == 3


def test_lasalle_search_linear_field():
    f = VectorField(PLANE, [y1, y2])
    res = lasalle_search(f, 1, max_k=2)
    assert res.candidates
    for cand in res.candidates:
        assert cand.relation.verdict == RELATION_FOUND and cand.relation.k == 0


def test_lasalle_search_generic_quadratic_may_be_empty():
    f = VectorField(CTX, [x2**2 + 3 * x1 - 2, x1 * x3 - x2 + 1, x1**2 - x2 * x3 + 5])
    res = lasalle_search(f, 1, max_k=1)
    assert not res.cap_exceeded
    for cand in res.candidates:
        assert cand.relation.verdict in (RELATION_FOUND, FIRST_INTEGRAL)


def test_lasalle_search_recovers_theta():
    res = lasalle_search(F_LASALLE, 2)
    thetas = [c.theta for c in res.candidates]
    assert any(t.primitive() == (x1 + x2 * x3).primitive() for t in thetas)
    assert not res.unsolved


def test_lasalle_search_rejects_parameters():
    ctx = VariableContext(("x",), ("k",))
    with pytest.raises(ValueError):
        lasalle_search(VectorField(ctx, [ctx.var("k") * ctx.var("x")]), 1)


def test_stabilized_ideals_never_refuted():
    for f, g in ((F26, [x1]), (F_LASALLE, [x2 + x3]), (excirc(1), [y1**2 + y2**2 - 1])):
        res = chain_stabilize(f, g)
        assert res.stabilized
        assert res.certificate.kind != NOT_INVARIANT
        assert res.certificate.verify(f)


def test_dimension_of_lasalle_z():
    rel = lasalle_relation(F_LASALLE, x1 + x2 * x3)
    assert dimension(rel.Z) == 1
