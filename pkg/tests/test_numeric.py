import io
import math

import numpy as np
import pytest

from sidecond.lie import VectorField
from sidecond.numeric import (compile_poly, convergence_order, fmt17, integrate,
                              perturbation_study, residual_monitor, start_on_zero_set,
                              trajectory_rows, write_csv)
from sidecond.polycore import Q, VariableContext
from sidecond.qss import parametric_case_analysis
from sidecond.sysfile import bundled_systems_dir, parse_system


def load(name):
    return parse_system(bundled_systems_dir() / f"{name}.ode")


def excirc(beta):
    P = VariableContext(("x1", "x2"))
    x1, x2 = P.gens()
    return P, VectorField(P, [-x1 - x2 + x1**3 + x1 * x2**2,
                              (1 + beta) * x1 + x2 - x1**3 - x1**2 * x2 - x1 * x2**2 - x2**3])


def test_exponential_decay():
    spec = load("decay")
    traj = integrate(spec.f, {"k": 1}, [1.0], 1e-3, 1.0)
    assert len(traj.t) == 1001
    assert abs(traj.x[-1, 0] - math.exp(-1)) < 1e-8
    assert traj.t[-1] == pytest.approx(1.0)


def test_circle_solution_returns():
    P, f = excirc(1)
    traj = integrate(f, {}, [1.0, 0.0], 1e-3, 2 * math.pi)
    T_end = traj.t[-1]
    assert np.allclose(traj.x[-1], [math.cos(T_end), math.sin(T_end)], atol=1e-6)
    rows = residual_monitor(traj, [("sigma", P.var("x1")**2 + P.var("x2")**2 - 1)], P)
    assert rows[0].max_abs <= 1e-6


def test_michaelis_menten_half_step():
    spec = load("michaelis_menten")
    params = {"e0": 1, "k1": 1, "km1": 1, "k2": 1}
    a = integrate(spec.f, params, [1.0, 0.0], 1e-3, 5.0)
    b = integrate(spec.f, params, [1.0, 0.0], 5e-4, 5.0)
    assert np.all(np.diff(a.x[:, 0]) < 0)
    c = a.x[:, 1]
    peak = int(np.argmax(c))
    assert 0 < peak < len(c) - 1
    assert np.all(np.diff(c[:peak + 1]) >= 0) and np.all(np.diff(c[peak:]) <= 0)
    rel = np.abs(a.x[-1] - b.x[-1]) / np.abs(b.x[-1])
    assert np.all(rel < 1e-6)
    # check every common time point too
    assert np.max(np.abs(a.x - b.x[::2])) / np.max(np.abs(b.x)) < 1e-6


def test_first_integral_drift():
    spec = load("rotation")
    traj = integrate(spec.f, {}, [0.6, 0.8], 1e-3, 10.0)
    rows = residual_monitor(traj, [spec.get_def("circle")], spec.ctx)
    assert rows[0].max_abs <= 1e-6
    assert rows[0].name == "circle"


def test_parabola_residual():
    spec = load("expara1")
    # on x1 = 0, x3 = x2^2 the flow is x2' = x2^2, which blows up at t = 1/x2
    traj = integrate(spec.f, {}, [0.0, 0.3, 0.09], 1e-3, 1.0)
    rows = residual_monitor(traj, [spec.get_def("g"), spec.get_def("parabola")], spec.ctx)
    assert all(r.max_abs <= 1e-6 for r in rows)


def test_negative_control_without_qss():
    spec = load("michaelis_menten")
    params = {"e0": 10, "k1": 1, "km1": 1, "k2": 1}
    var, start = start_on_zero_set(spec.get_def("psi1").body, params, {"s": 1}, spec.ctx)
    assert var == "c"
    traj = integrate(spec.f, params, start, 1e-3, 10.0)
    row = residual_monitor(traj, [spec.get_def("psi1")], spec.ctx)[0]
    assert row.max_abs > 0.1


def test_knob_zero_on_certified_leaf():
    spec = load("michaelis_menten")
    tree = parametric_case_analysis(spec.system, spec.get_def("psi1"), depth=3)
    for leaf in tree.leaves:
        params = {p: 1 for p in spec.ctx.params}
        params.update({p: v.constant_value() for p, v in leaf.conditions.items()})
        gen = leaf.component.generators[0].subs({k: Q(v) for k, v in params.items()})
        gen = gen.embed(spec.ctx)
        var, start = start_on_zero_set(gen, params, {"s": 1}, spec.ctx)
        traj = integrate(spec.f, params, start, 1e-3, 10.0)
        row = residual_monitor(traj, [("leaf", gen)], spec.ctx)[0]
        assert row.max_abs <= 1e-6 and row.max_scaled <= 1e-5


def test_certified_leaves_keep_scaled_residual():
    spec = load("lindemann_hinsley")
    tree = parametric_case_analysis(spec.system, spec.get_def("phi"), depth=3)
    for leaf in tree.leaves:
        params = {"k1": 1, "km1": 2, "k2": 1}
        params.update({p: v.constant_value() for p, v in leaf.conditions.items()})
        gen = leaf.component.generators[0]
        var, start = start_on_zero_set(gen, params, {"a": 0.7, "b": 0.4}, spec.ctx)
        traj = integrate(spec.f, params, start, 1e-3, 10.0)
        row = residual_monitor(traj, [("leaf", gen)], spec.ctx)[0]
        assert row.max_scaled <= 1e-5


def test_perturbation_tables_monotone():
    mm = load("michaelis_menten")
    t = perturbation_study(mm.f, mm.get_def("psi1"), "e0", [1, 0.1, 0.01, 0.001], 10.0)
    assert t.monotone and t.solved_for == "c"
    assert [r[0] for r in t.rows] == [1, 0.1, 0.01, 0.001]
    lh = load("lindemann_hinsley")
    t = perturbation_study(lh.f, lh.get_def("phi"), "k2", [1, 0.1, 0.01], 10.0)
    assert t.monotone and t.solved_for == "b"


def test_lindemann_slow_dynamics_on_line():
    # near k2 -> 0 the line k1*a = km1*b stays nearly invariant and the total
    # a + b decays at rate k2*b
    lh = load("lindemann_hinsley")
    params = {"k1": 1, "km1": 1, "k2": 0.01}
    traj = integrate(lh.f, params, [0.5, 0.5], 1e-3, 10.0)
    row = residual_monitor(traj, [lh.get_def("line")], lh.ctx)[0]
    assert row.max_abs < 0.01
    total = traj.x.sum(axis=1)
    rate = -np.gradient(total, traj.h)
    assert np.allclose(rate, 0.01 * traj.x[:, 1], atol=1e-6)


def test_monotone_rule_allows_one_small_inversion():
    spec = load("decay")
    # phi = x: trajectory starts at 0 and stays there, all rows equal
    t = perturbation_study(spec.f, spec.get_def("level"), "k", [1, 0.5, 0.25], 1.0)
    assert t.monotone and all(r[1] == 0 for r in t.rows)


def test_rk4_order():
    spec = load("decay")
    order = convergence_order(spec.f, {"k": 1}, [1.0], 2.0, 0.1, exact=[math.exp(-2)])
    assert 3.7 <= order <= 4.3
    _, f = excirc(1)
    order = convergence_order(f, {}, [1.0, 0.0], 1.0, 0.05)
    assert 3.7 <= order <= 4.3


def test_truncation_flag():
    C = VariableContext(("x",))
    x = C.var("x")
    traj = integrate(VectorField(C, [x**2]), {}, [1.0], 1e-2, 3.0)
    assert traj.truncated and "non-finite" in traj.note
    assert np.all(np.isfinite(traj.x))
    assert len(traj.t) == len(traj.x) < 301


def test_integrate_errors():
    spec = load("decay")
    with pytest.raises(ValueError):
        integrate(spec.f, {"k": 1}, [1.0], 0.0, 1.0)
    with pytest.raises(ValueError):
        integrate(spec.f, {"k": 1}, [1.0], 2.0, 1.0)
    with pytest.raises((ValueError, KeyError)):
        integrate(spec.f, {}, [1.0], 0.1, 1.0)
    with pytest.raises(ValueError):
        integrate(spec.f, {"k": 1}, [1.0, 2.0], 0.1, 1.0)


def test_compiled_polynomial_matches_exact():
    spec = load("michaelis_menten")
    p = spec.get_def("psi1").body
    params = {"e0": Q(1, 3), "k1": Q(2), "km1": Q(1, 2), "k2": Q(5)}
    fn = compile_poly(p, params)
    pt = {"s": Q(3, 7), "c": Q(2, 9)}
    exact = float(p.evaluate({**pt, **params}))
    assert fn(np.array([3 / 7, 2 / 9])) == pytest.approx(exact, rel=1e-14)


def test_csv_full_precision():
    spec = load("decay")
    traj = integrate(spec.f, {"k": 1}, [1.0], 0.25, 1.0)
    buf = io.StringIO()
    write_csv(buf, ["t", "x"], trajectory_rows(traj))
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t,x"
    assert len(lines) == 6
    for line, (t, x) in zip(lines[1:], zip(traj.t, traj.x[:, 0])):
        a, b = line.split(",")
        assert float(a) == t and float(b) == x
    assert fmt17(0.1) == "0.10000000000000001"


def test_start_on_zero_set_needs_linear_state():
    P = VariableContext(("x", "y"))
    x, y = P.gens()
    with pytest.raises(ValueError):
        start_on_zero_set(x**2 + y**2 - 1, {}, {}, P)
    var, start = start_on_zero_set(x**2 + y - 1, {}, {"x": 0.5}, P)
    assert var == "y" and start == [0.5, 0.75]
