import math

import numpy as np
import pytest

from hilfer_picard import (
    EvalDomainError,
    RhsNameError,
    RhsSyntaxError,
    builtin_rhs,
    estimate_lipschitz,
    eval_rhs,
    format_rhs,
    parse_rhs,
)
from hilfer_picard.rhs import Bin, Call, Neg, Num, Var

CORPUS = [
    ("0", 0.5, 0.5, 0.0),
    ("1.5", 0.0, 0.0, 1.5),
    ("x", 2.0, 9.0, 2.0),
    ("y", 2.0, 9.0, 9.0),
    ("2*y", 5.0, 3.0, 6.0),
    ("x*sin(y)+1", 2.0, 0.0, 1.0),
    ("x+y*2", 1.0, 3.0, 7.0),
    ("(x+y)*2", 1.0, 3.0, 8.0),
    ("x-y-1", 10.0, 3.0, 6.0),
    ("x-(y-1)", 10.0, 3.0, 8.0),
    ("x/y/2", 12.0, 3.0, 2.0),
    ("2^3^2", 0.0, 0.0, 512.0),
    ("(2^3)^2", 0.0, 0.0, 64.0),
    ("-x^2", 3.0, 0.0, -9.0),
    ("(-x)^2", 3.0, 0.0, 9.0),
    ("2^-1", 0.0, 0.0, 0.5),
    ("--x", 4.0, 0.0, 4.0),
    ("exp(0)", 1.0, 1.0, 1.0),
    ("exp(x)*cos(y)", 1.0, 0.0, math.e),
    ("log(exp(2))", 0.0, 0.0, 2.0),
    ("sqrt(x^2)", 3.0, 0.0, 3.0),
    ("abs(-3*y)", 0.0, 2.0, 6.0),
    ("pow(x, 3)", 2.0, 0.0, 8.0),
    ("pow(2, x+1)", 2.0, 0.0, 8.0),
    ("sin(x)^2+cos(x)^2", 0.77, 0.0, 1.0),
    ("1/(1+y^2)", 0.0, 1.0, 0.5),
    ("x*y - y/x", 2.0, 4.0, 6.0),
    ("3e-2*y", 0.0, 100.0, 3.0),
    ("2.5E+1", 0.0, 0.0, 25.0),
    (".5*x", 4.0, 0.0, 2.0),
    ("x^0.5", 9.0, 0.0, 3.0),
    ("-(x+y)", 1.0, 2.0, -3.0),
    ("-x+y", 1.0, 2.0, 1.0),
    ("x--y", 1.0, 2.0, 3.0),
    ("x- -y", 1.0, 2.0, 3.0),
    ("sin(cos(0))", 0.0, 0.0, math.sin(1.0)),
    ("x*(y+1)*(y-1)", 2.0, 3.0, 16.0),
    ("1+2*3^2", 0.0, 0.0, 19.0),
    ("(1+2)*3^2", 0.0, 0.0, 27.0),
    ("((1+2)*3)^2", 0.0, 0.0, 81.0),
    ("exp(-x^2)", 0.0, 0.0, 1.0),
    ("y^2-y", 0.0, 3.0, 6.0),
    ("pow(y, 0.5)*2", 0.0, 16.0, 8.0),
    ("x/2+y/4", 6.0, 8.0, 5.0),
    ("0.1*x+0.2*y", 1.0, 1.0, 0.30000000000000004),
    ("sqrt(abs(x-y))", 1.0, 5.0, 2.0),
    ("cos(0)*sin(0)", 0.0, 0.0, 0.0),
    ("1-2-3", 0.0, 0.0, -4.0),
    ("1-(2-3)", 0.0, 0.0, 2.0),
    ("2*-3", 0.0, 0.0, -6.0),
]


class TestParse:
    def test_zero_literal(self):
        assert parse_rhs("0") == Num(0.0)

    def test_scaled_variable(self):
        assert parse_rhs("2*y") == Bin("*", Num(2.0), Var("y"))

    def test_precedence_structure(self):
        e = parse_rhs("x*sin(y)+1")
        assert e == Bin("+", Bin("*", Var("x"), Call("sin", (Var("y"),))), Num(1.0))

    def test_power_is_right_associative(self):
        e = parse_rhs("x^y^2")
        assert e == Bin("^", Var("x"), Bin("^", Var("y"), Num(2.0)))

    def test_unary_minus_below_power(self):
        assert parse_rhs("-x^2") == Neg(Bin("^", Var("x"), Num(2.0)))

    def test_syntax_error_offset(self):
        with pytest.raises(RhsSyntaxError) as err:
            parse_rhs("y+")
        assert err.value.offset == 2
        assert err.value.expected

    def test_unbalanced_paren(self):
        with pytest.raises(RhsSyntaxError):
            parse_rhs("(x+y")

    def test_unknown_identifier(self):
        with pytest.raises(RhsNameError) as err:
            parse_rhs("x*tau")
        assert err.value.name == "tau"

    def test_unknown_character(self):
        with pytest.raises(RhsSyntaxError):
            parse_rhs("x$y")

    def test_wrong_arity(self):
        with pytest.raises(RhsSyntaxError):
            parse_rhs("sin(x, y)")
        with pytest.raises(RhsSyntaxError):
            parse_rhs("pow(x)")

    @pytest.mark.parametrize("text,x,y,val", CORPUS)
    def test_round_trip_structural_identity(self, text, x, y, val):
        tree = parse_rhs(text)
        assert parse_rhs(format_rhs(tree)) == tree


class TestEval:
    @pytest.mark.parametrize("text,x,y,val", CORPUS)
    def test_corpus_values(self, text, x, y, val):
        assert eval_rhs(parse_rhs(text), x, y) == pytest.approx(val, abs=1e-12)

    def test_vectorized_matches_scalar(self):
        e = parse_rhs("x*sin(y)+1/(2+y)")
        xs = np.linspace(0.0, 2.0, 7)
        ys = np.linspace(-1.0, 1.0, 7)
        vec = eval_rhs(e, xs, ys)
        for i in range(7):
            assert vec[i] == pytest.approx(eval_rhs(e, xs[i], ys[i]), rel=1e-15)

    def test_log_domain_error_names_node(self):
        with pytest.raises(EvalDomainError) as err:
            eval_rhs(parse_rhs("log(y)"), 1.0, -1.0)
        assert "log" in str(err.value)
        assert err.value.y == -1.0

    def test_division_by_zero_reported(self):
        with pytest.raises(EvalDomainError):
            eval_rhs(parse_rhs("1/y"), 0.0, 0.0)

    def test_array_domain_error_locates_point(self):
        with pytest.raises(EvalDomainError) as err:
            eval_rhs(parse_rhs("sqrt(y)"), np.array([0.0, 1.0]), np.array([4.0, -9.0]))
        assert err.value.y == -9.0


class TestEstimateLipschitz:
    def test_linear_slope(self):
        val = estimate_lipschitz(parse_rhs("3*y"), (0.0, 1.0), (-1.0, 1.0))
        assert val == pytest.approx(3.0 * 1.25, rel=1e-6)

    @pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
    def test_linear_family_within_documented_window(self, lam):
        val = estimate_lipschitz(parse_rhs(f"{lam}*y"), (0.0, 1.0), (-2.0, 2.0))
        assert lam <= val <= 1.25 * lam * (1.0 + 1e-6)

    def test_bounded_derivative(self):
        # lattice resolution limits how exactly max|cos| = 1 is hit
        val = estimate_lipschitz(parse_rhs("sin(y)"), (0.0, 1.0), (-10.0, 10.0))
        assert val == pytest.approx(1.25, abs=0.01)

    def test_zero_function(self):
        assert estimate_lipschitz(parse_rhs("0"), (0.0, 1.0), (-1.0, 1.0)) == 0.0

    def test_requires_enough_samples(self):
        with pytest.raises(ValueError):
            estimate_lipschitz(parse_rhs("y"), (0.0, 1.0), (-1.0, 1.0), samples=50)

    def test_domain_error_carries_location(self):
        with pytest.raises(EvalDomainError):
            estimate_lipschitz(parse_rhs("log(y)"), (0.0, 1.0), (-1.0, 1.0))


class TestBuiltins:
    def test_zero(self):
        assert builtin_rhs("zero") == Num(0.0)

    def test_linear(self):
        e = builtin_rhs("linear:2.5")
        assert e == Bin("*", Num(2.5), Var("y"))
        assert eval_rhs(e, 0.0, 4.0) == 10.0

    def test_unknown_name_passes_through(self):
        assert builtin_rhs("y+1") is None
