import math

import numpy as np
import pytest

from errors import DomainViolation, NumericOverflow, ParseError
from expr.evaluate import DOMAIN_REASON, OVERFLOW_REASON, evaluate, evaluate_batch, predict
from expr.nodes import (
    Binary,
    BinaryOp,
    Constant,
    Unary,
    UnaryOp,
    Variable,
    constants,
    depth,
    internal_count,
    exp,
    leaf_count,
    log,
    node_count,
    replace_subtree,
    with_constants,
    x,
)
from expr.parser import parse, print_infix, try_parse
from expr.random_tree import Grammar, random_expr
from expr.special import erf, erf_rational
from generators.tasks import f1, f2, f3, f4


def test_evaluate_f1_by_hand():
    assert evaluate(f1(), [0.0, 0.0]) == pytest.approx(1.0)
    assert evaluate(f1(), [1.0, 1.0]) == pytest.approx(2.4)


def test_evaluate_reports_domain_violation():
    with pytest.raises(DomainViolation):
        evaluate(log(x(2)), [0.0, 0.0, -1.0])
    with pytest.raises(DomainViolation):
        evaluate(1 / x(0), [0.0])


def test_evaluate_is_repeatable():
    row = [0.3, -1.7]
    first = evaluate(f4(), row)
    assert all(evaluate(f4(), row) == first for _ in range(5))


def test_evaluate_batch_counts_violations():
    report = evaluate_batch(Constant(3.0), np.zeros((5, 1)))
    assert report.values.tolist() == [3.0] * 5
    assert report.domain_violations == 0

    report = evaluate_batch(x(0), [[1.0], [2.0]])
    assert report.values.tolist() == [1.0, 2.0]

    report = evaluate_batch(1 / x(0), [[0.0], [2.0]])
    assert report.domain_violations == 1
    assert math.isnan(report.values[0])
    assert report.values[1] == pytest.approx(0.5)


def test_batch_matches_row_evaluation():
    rng = np.random.default_rng(3)
    X = rng.uniform(-3, 3, size=(50, 2))
    values = predict(f3(), X)
    for row, value in zip(X, values):
        assert evaluate(f3(), row) == pytest.approx(value, rel=1e-12)


def test_batch_rejects_too_few_columns():
    with pytest.raises(ValueError):
        evaluate_batch(f2(), np.zeros((3, 2)))


def test_overflow_is_not_a_domain_violation():
    report = evaluate_batch(exp(x(0)), [[1000.0], [0.0]])
    assert report.domain_violations == 0
    assert report.overflows == 1
    assert report.reasons == {OVERFLOW_REASON: 1}
    assert math.isnan(report.values[0]) and report.values[1] == 1.0
    with pytest.raises(NumericOverflow):
        evaluate(exp(x(0)), [1000.0])

    # inf - inf and log of it stay overflows
    blowup = log(exp(x(0)) - exp(x(0)))
    assert evaluate_batch(blowup, [[1000.0]]).reasons == {OVERFLOW_REASON: 1}
    assert evaluate_batch(x(0) ** x(1), [[10.0, 400.0]]).reasons == {OVERFLOW_REASON: 1}


def test_domain_reasons_for_partial_operators():
    report = evaluate_batch(log(x(0)) + exp(x(1)), [[-1.0, 0.0], [1.0, 1000.0], [1.0, 0.0]])
    assert report.reasons == {DOMAIN_REASON: 1, OVERFLOW_REASON: 1}
    assert report.values[2] == 1.0
    assert evaluate_batch(x(0) ** -1.0, [[0.0]]).reasons == {DOMAIN_REASON: 1}
    assert evaluate_batch(x(0) ** 0.5, [[-4.0]]).reasons == {DOMAIN_REASON: 1}
    assert evaluate_batch(x(0), [[2.0]]).reasons == {}


def test_node_counts():
    assert node_count(Constant(1.0)) == 1
    assert node_count(x(0) + x(1)) == 3
    assert node_count(f1()) == 15
    assert depth(x(0)) == 1
    assert depth(x(0) + 1) == 2


def test_replace_subtree_by_preorder_index():
    e = x(0) * (x(1) + 2.0)
    assert replace_subtree(e, 0, x(3)) == x(3)
    assert replace_subtree(e, 2, Constant(5.0)) == x(0) * 5.0
    assert replace_subtree(e, 4, x(2)) == x(0) * (x(1) + x(2))
    assert replace_subtree(e, 3, x(1)) == e
    assert replace_subtree(e, 1, x(0)).right is e.right
    for bad in (-1, 5):
        with pytest.raises(IndexError):
            replace_subtree(e, bad, x(0))


def test_with_constants_in_preorder():
    e = 2.0 * x(0) + log(3.0 + x(1))
    assert with_constants(e, [7.0, 8.0]) == 7.0 * x(0) + log(8.0 + x(1))
    with pytest.raises(ValueError):
        with_constants(e, [1.0])
    with pytest.raises(ValueError):
        with_constants(e, [1.0, 2.0, 3.0])


def test_rebuild_helpers_handle_very_deep_trees():
    deep = x(0)
    for i in range(5000):
        deep = Binary(BinaryOp.ADD, deep, Constant(float(i)))
    n = node_count(deep)
    assert depth(deep) == 5001
    shifted = with_constants(deep, [1.0] * 5000)
    assert constants(shifted) == [1.0] * 5000
    swapped = replace_subtree(deep, n - 1, x(1))
    assert node_count(swapped) == n
    assert swapped.right == x(1)


def test_constants_must_be_finite():
    with pytest.raises(ValueError):
        Constant(float("nan"))
    with pytest.raises(ValueError):
        Variable(-1)


def test_parse_simple_sum():
    assert parse("x0 + 1") == Binary(BinaryOp.ADD, Variable(0), Constant(1.0))
    assert parse("x_3") == Variable(3)
    assert parse("sin(x0)**2") == Binary(BinaryOp.POW, Unary(UnaryOp.SIN, Variable(0)), Constant(2.0))
    assert parse("-x0") == Unary(UnaryOp.NEG, Variable(0))
    assert parse("2 - -3") == Binary(BinaryOp.SUB, Constant(2.0), Constant(-3.0))


def test_parse_precedence():
    assert evaluate(parse("1 + 2 * 3"), []) == pytest.approx(7.0)
    assert evaluate(parse("2 ** 3 ** 2"), []) == pytest.approx(512.0)
    assert evaluate(parse("-2 ** 2"), []) == pytest.approx(-4.0)
    assert evaluate(parse("8 / 4 / 2"), []) == pytest.approx(1.0)
    assert evaluate(parse("1e-3 * 1000"), []) == pytest.approx(1.0)


def test_parse_error_position():
    with pytest.raises(ParseError) as info:
        parse("sin(")
    assert info.value.position == 4

    with pytest.raises(ParseError) as info:
        parse("x0 + $")
    assert info.value.position == 5

    with pytest.raises(ParseError):
        parse("foo(x0)")
    assert try_parse("x0 +") is None
    assert try_parse("") is None


def test_print_parse_round_trip_ground_truths():
    for make in (f1, f2, f3, f4):
        e = make()
        assert parse(print_infix(e)) == e


def test_print_uses_minimal_parentheses():
    assert print_infix(x(0) + x(1) * x(2)) == "x0 + x1 * x2"
    assert print_infix((x(0) + x(1)) * x(2)) == "(x0 + x1) * x2"
    assert print_infix(x(0) - (x(1) - x(2))) == "x0 - (x1 - x2)"
    assert parse(print_infix(-Constant(3.0))) == Unary(UnaryOp.NEG, Constant(3.0))


def test_round_trip_random_expressions():
    grammar = Grammar(n_features=3, max_depth=6)
    rng = np.random.default_rng(11)
    for _ in range(1000):
        e = random_expr(grammar, rng)
        assert parse(print_infix(e)) == e


def test_random_expr_depth_one_is_a_leaf():
    grammar = Grammar(n_features=2, max_depth=1)
    for seed in range(50):
        assert isinstance(random_expr(grammar, seed), (Constant, Variable))


def test_random_expr_is_deterministic():
    grammar = Grammar(n_features=4, max_depth=5)
    assert print_infix(random_expr(grammar, 7)) == print_infix(random_expr(grammar, 7))
    assert print_infix(random_expr(grammar, 7, "full")) == print_infix(random_expr(grammar, 7, "full"))


def test_random_expr_respects_bounds():
    grammar = Grammar(n_features=3, max_depth=6)
    rng = np.random.default_rng(0)
    X = rng.uniform(-1, 1, size=(4, 3))
    for _ in range(2000):
        e = random_expr(grammar, rng)
        assert depth(e) <= 6
        assert node_count(e) == leaf_count(e) + internal_count(e)
        assert predict(e, X).shape == (4,)


def test_erf_reference_values():
    assert erf(1.0) == pytest.approx(0.8427007929, abs=1e-7)
    assert erf(0.0) == 0.0
    assert erf(-1.0) == pytest.approx(-0.8427007929, abs=1e-7)
    assert erf(float("inf")) == 1.0


def test_erf_accuracy_on_grid():
    grid = np.linspace(-6.0, 6.0, 10_001)
    oracle = np.array([math.erf(v) for v in grid])
    assert np.max(np.abs(erf(grid) - oracle)) <= 1e-7
    assert np.max(np.abs(erf_rational(grid) - oracle)) <= 2e-7
