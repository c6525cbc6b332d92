import pytest
from hypothesis import given, strategies as st

from sidecond.parser import ParseError, parse_expression, parse_rational, parse_tuple
from sidecond.polycore import Polynomial, Q, VariableContext

MM = VariableContext(("s", "c"), ("e0", "k1", "km1", "k2"))
P3 = VariableContext(("x1", "x2", "x3"))


def test_michaelis_menten_expression():
    s, c, e0, k1, km1, k2 = MM.gens()
    p = parse_expression("k1*e0*s - (k1*s + km1 + k2)*c", MM)
    assert p == k1 * e0 * s - (k1 * s + km1 + k2) * c


def test_cancellation_and_powers():
    x1 = P3.var("x1")
    assert parse_expression("x1 - x1", P3).is_zero()
    assert parse_expression("(x1+1)^3", P3) == (x1 + 1) ** 3
    assert parse_expression("x1^3", P3) == x1 ** 3


def test_precedence():
    x1, x2, _ = P3.gens()
    assert parse_expression("-x1^2", P3) == -(x1**2)
    assert parse_expression("2^3^2", P3) == P3.const(2**9)
    assert parse_expression("x1 + x2*x1^2", P3) == x1 + x2 * x1**2
    assert parse_expression("-(x1 - x2) * 3", P3) == 3 * (x2 - x1)
    assert parse_expression("+x1 - -x2", P3) == x1 + x2


def test_rational_literals():
    x1 = P3.var("x1")
    assert parse_expression("3/4", P3) == P3.const(Q(3, 4))
    assert parse_expression("3/4*x1", P3) == x1.scale(Q(3, 4))
    assert parse_expression("x1/(2/3)", P3) == x1.scale(Q(3, 2))
    assert parse_expression("x1/2/2", P3) == x1.scale(Q(1, 4))
    assert parse_expression("(x1^2 - x1)/(1+1)", P3) == (x1**2 - x1).scale(Q(1, 2))


@pytest.mark.parametrize("src,msg,col", [
    ("x1/x2", "division by a non-literal", 3),
    ("x1/(x2 - x2 + 1)", "division by a non-literal", 3),
    ("x1^x2", "non-integer exponent", 4),
    ("x1^-1", "exponent must be a nonnegative integer literal", 4),
    ("x1 + foo", "unknown identifier 'foo'", 6),
    ("x1/0", "division by zero", 3),
    ("x1/(1-1)", "division by zero", 3),
    ("", "empty expression", 1),
    ("x1 x2", "unexpected 'x2'", 4),
    ("(x1 + 1", "expected ')'", 8),
    ("2 x1", "unexpected 'x1'", 3),
    ("x1 $ 2", "unexpected character '$'", 4),
    ("x1 +", "unexpected 'end of input'", 5),
])
def test_errors_carry_position(src, msg, col):
    with pytest.raises(ParseError) as info:
        parse_expression(src, P3, line=7)
    err = info.value
    assert msg in err.message
    assert err.line == 7 and err.column == col
    assert str(err).startswith(f"line 7, column {col}: ")


def test_tuples():
    x1, x2, x3 = P3.gens()
    assert parse_tuple("(x1, -x2, x3^2)", P3) == [x1, -x2, x3**2]
    with pytest.raises(ParseError):
        parse_tuple("(x1, x2", P3)
    with pytest.raises(ParseError):
        parse_tuple("x1, x2", P3)


def test_parse_rational():
    assert parse_rational("3") == 3
    assert parse_rational("-3/4") == Q(-3, 4)
    assert parse_rational("0.25") == Q(1, 4)
    assert parse_rational("1e-3") == Q(1, 1000)
    for bad in ("abc", "1/0", ""):
        with pytest.raises(ParseError):
            parse_rational(bad)


_coeff = st.fractions(min_value=-20, max_value=20, max_denominator=12)
_mono = st.tuples(*[st.integers(0, 3)] * MM.nvars)


@given(st.dictionaries(_mono, _coeff, max_size=6))
def test_render_parse_round_trip(terms):
    p = Polynomial(MM, {m: Q(c.numerator, c.denominator) for m, c in terms.items()})
    assert parse_expression(str(p), MM) == p
