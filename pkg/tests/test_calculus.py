import math
import unittest
from typing import List, Tuple

import pytest
from hypothesis import given, settings, strategies as st

from structural_derivative.calculus import (
    Rule,
    all_passed,
    parse_rules,
    product_rule,
    quotient_rule,
    reciprocal_closed_form,
    reciprocal_rule,
    scaling_rule,
    self_similar_origin,
    square_identity,
    sum_counterexample,
    summarize,
    verify_all,
)
from structural_derivative.derivative import structural_derivative
from structural_derivative.errors import (
    DegenerateCase,
    InvalidConfig,
    ZeroDenominator,
)
from structural_derivative.structfn import (
    StructuralConfig,
    constant,
    function_from_name,
    identity,
    make_polynomial,
)
from structural_derivative.timescale import (
    FiniteSet,
    Integers,
    IntervalUnion,
    QuantumScale,
    Reals,
    TimeScale,
    UniformGrid,
)

ID = StructuralConfig(identity(), 1.0)
SQUARE = function_from_name("square")


class TestScalingRule(unittest.TestCase):
    def test_square(self) -> None:
        report = scaling_rule(SQUARE, 2, Integers(), ID, 2)
        self.assertEqual(report.rule, Rule.SCALING)
        self.assertEqual(report.lhs, 10.0)
        self.assertEqual(report.rhs, 10.0)
        self.assertEqual(report.residual, 0.0)
        self.assertTrue(report.passed)

    def test_unit_gamma(self) -> None:
        report = scaling_rule("exp", 1, Reals(), ID, 0.5)
        self.assertEqual(report.lhs, report.rhs)

    def test_squared_exponent(self) -> None:
        report = scaling_rule(identity(), 3, Integers(), StructuralConfig(identity(), 2), 0)
        self.assertEqual(report.lhs, 9.0)
        self.assertEqual(report.rhs, 9.0)

    def test_zero_gamma(self) -> None:
        report = scaling_rule(SQUARE, 0, Integers(), StructuralConfig(identity(), 0.5), 3)
        self.assertEqual(report.lhs, 0.0)
        self.assertTrue(report.passed)

    def test_negative_gamma_fractional_lambda(self) -> None:
        f = make_polynomial([1, 0, 1])
        report = scaling_rule(f, -2, Integers(), StructuralConfig(identity(), 0.5), 1)
        self.assertIsInstance(report.lhs, complex)
        self.assertTrue(report.passed)

    def test_dense(self) -> None:
        report = scaling_rule("sin", 2.5, Reals(), ID, 0.3)
        self.assertTrue(report.passed)


class TestProductRule(unittest.TestCase):
    def test_both_forms(self) -> None:
        report_a = product_rule(identity(), identity(), Integers(), ID, 2, form="A")
        report_b = product_rule(identity(), identity(), Integers(), ID, 2, form="B")
        self.assertEqual(report_a.rule, Rule.PRODUCT_FORM_A)
        self.assertEqual(report_b.rule, Rule.PRODUCT_FORM_B)
        for report in (report_a, report_b):
            self.assertEqual(report.lhs, 5.0)
            self.assertEqual(report.rhs, 5.0)
            self.assertTrue(report.passed)

    def test_unit_factor(self) -> None:
        report = product_rule(SQUARE, constant(1), Integers(), ID, 2)
        self.assertEqual(report.rhs, 5.0)
        self.assertEqual(report.residual, 0.0)

    def test_dense(self) -> None:
        report = product_rule("exp", "sin", Reals(), ID, 0.7, form="B")
        self.assertTrue(report.passed)

    def test_bad_form(self) -> None:
        with self.assertRaises(InvalidConfig):
            product_rule(identity(), identity(), Integers(), ID, 2, form="C")


class TestReciprocalRule(unittest.TestCase):
    def test_identity(self) -> None:
        report = reciprocal_rule(identity(), Integers(), ID, 2)
        self.assertAlmostEqual(report.lhs, -1 / 6, places=15)
        self.assertAlmostEqual(report.rhs, -1 / 6, places=15)
        self.assertTrue(report.passed)

    def test_constant(self) -> None:
        report = reciprocal_rule(constant(4), Integers(), ID, 2)
        self.assertEqual(report.lhs, 0.0)
        self.assertEqual(report.rhs, 0.0)

    def test_zero_denominator(self) -> None:
        with self.assertRaises(ZeroDenominator):
            reciprocal_rule(identity(), Integers(), ID, 0)
        with self.assertRaises(ZeroDenominator):
            reciprocal_rule(identity(), Integers(), ID, -1)

    def test_product_with_reciprocal_is_constant(self) -> None:
        f = make_polynomial([2, 1, 1])
        cfg = StructuralConfig(function_from_name("power:2"), 0.5)
        for t in [1, 2, 3]:
            value = structural_derivative(f * f.reciprocal(), Integers(), cfg, t).value
            self.assertLessEqual(abs(value), 1e-12)


class TestQuotientRule(unittest.TestCase):
    def test_square_over_identity(self) -> None:
        report = quotient_rule(SQUARE, identity(), Integers(), ID, 2)
        self.assertEqual(report.lhs, 1.0)
        self.assertEqual(report.rhs, 1.0)

    def test_unit_denominator(self) -> None:
        report = quotient_rule(SQUARE, constant(1), Integers(), ID, 2)
        self.assertEqual(report.lhs, 5.0)
        self.assertEqual(report.rhs, 5.0)

    def test_equal_functions(self) -> None:
        report = quotient_rule(identity(), identity(), Integers(), ID, 2)
        self.assertEqual(report.lhs, 0.0)
        self.assertEqual(report.rhs, 0.0)

    def test_zero_denominator(self) -> None:
        with self.assertRaises(ZeroDenominator):
            quotient_rule(SQUARE, identity(), Integers(), ID, 0)


class TestSumCounterexample(unittest.TestCase):
    def test_lambda_two(self) -> None:
        report = sum_counterexample(Integers(), StructuralConfig(identity(), 2), 0)
        self.assertEqual(report.lhs, 9.0)
        self.assertEqual(report.rhs, 5.0)
        self.assertTrue(report.applicable)
        self.assertTrue(report.passed)

    def test_lambda_half(self) -> None:
        report = sum_counterexample(Integers(), StructuralConfig(identity(), 0.5), 1)
        self.assertAlmostEqual(report.lhs, math.sqrt(3) * (math.sqrt(2) - 1), places=14)
        self.assertAlmostEqual(
            report.rhs, (1 + math.sqrt(2)) * (math.sqrt(2) - 1), places=14
        )
        self.assertTrue(report.passed)

    def test_linear_case_not_applicable(self) -> None:
        report = sum_counterexample(Integers(), ID, 2)
        self.assertEqual(report.lhs, report.rhs)
        self.assertFalse(report.applicable)
        self.assertFalse(report.passed)

    def test_degenerate(self) -> None:
        with self.assertRaises(DegenerateCase):
            sum_counterexample(Reals(), StructuralConfig(identity(), 2), 0)
        with self.assertRaises(DegenerateCase):
            sum_counterexample(
                UniformGrid(1, 0.5), StructuralConfig(identity(), 2), -0.5
            )


class TestWorkedExamples(unittest.TestCase):
    def test_square_identity(self) -> None:
        report = square_identity(Integers(), ID, 2)
        self.assertEqual(report.rule, Rule.SQUARE_FACTORIZATION)
        self.assertEqual(report.rhs, 5.0)
        self.assertTrue(report.passed)
        for lam in [0.5, 2.0]:
            for t in [0, 1, 5]:
                cfg = StructuralConfig(function_from_name("power:2"), lam)
                self.assertTrue(square_identity(Integers(), cfg, t).passed)

    def test_square_identity_dense(self) -> None:
        report = square_identity(Reals(), ID, 1.5)
        self.assertAlmostEqual(report.rhs, 3.0, delta=1e-9)
        self.assertTrue(report.passed)

    def test_reciprocal_closed_form_zero(self) -> None:
        with self.assertRaises(ZeroDenominator):
            reciprocal_closed_form(Integers(), ID, 0)

    def test_self_similar_origin(self) -> None:
        report = self_similar_origin(1, 0.5, 0.25, IntervalUnion(((0, 1),)), 1)
        self.assertTrue(report.applicable)
        self.assertTrue(report.passed)

        report = self_similar_origin(1, 0.5, 0.25, IntervalUnion(((0, 0), (1, 2))), 1)
        self.assertEqual(report.lhs, 1.0)
        self.assertEqual(report.rhs, 1.0)
        self.assertTrue(report.passed)

        report = self_similar_origin(2, 0.5, 0.5, IntervalUnion(((0, 1),)), 1)
        self.assertFalse(report.applicable)

    def test_self_similar_origin_scattered_power(self) -> None:
        report = self_similar_origin(3, 0.5, 0.25, FiniteSet((0, 4, 9)), 2)
        self.assertAlmostEqual(report.rhs, 9 * 4**0.75, places=12)
        self.assertTrue(report.passed)


class TestVerifyAll(unittest.TestCase):
    def test_product_on_integers(self) -> None:
        rules = parse_rules(["product"])
        reports = verify_all(rules, identity(), identity(), Integers(), ID, [1, 2, 3, 4, 5])
        self.assertEqual(len(reports), 10)
        self.assertEqual(
            [(r.rule, r.point) for r in reports],
            [(rule, float(t)) for rule in rules for t in [1, 2, 3, 4, 5]],
        )
        self.assertTrue(all_passed(reports))
        summary = summarize(reports)
        self.assertEqual(summary["product-a"]["max_residual"], 0.0)
        self.assertEqual(summary["product-b"]["checked"], 5)

    def test_workers_keep_order(self) -> None:
        args = (parse_rules(["all"]), "exp", "cos", Integers(), ID, [1, 2, 3])
        self.assertEqual(verify_all(*args), verify_all(*args, workers=4))

    def test_zero_denominator_not_applicable(self) -> None:
        reports = verify_all(
            [Rule.RECIPROCAL], identity(), identity(), Integers(), ID, [0, 1, 2]
        )
        self.assertFalse(reports[0].applicable)
        self.assertEqual(reports[0].error, "zero-denominator")
        self.assertTrue(all_passed(reports))
        self.assertEqual(summarize(reports)["reciprocal"]["not_applicable"], 1)

    def test_failures_are_reported(self) -> None:
        reports = verify_all(
            [Rule.SCALING], "sin", "sin", FiniteSet((0, 1, 4)), ID, [4]
        )
        self.assertEqual(reports[0].error, "not-in-kappa")
        self.assertTrue(reports[0].applicable)
        self.assertFalse(all_passed(reports))

    def test_self_similar_runs_once(self) -> None:
        reports = verify_all(
            [Rule.SELF_SIMILAR_ORIGIN],
            identity(),
            identity(),
            IntervalUnion(((0, 1),)),
            ID,
            [0.5, 1],
            self_similar={"c": 1, "beta": 0.5, "alpha": 0.25},
        )
        self.assertEqual(len(reports), 1)
        self.assertEqual(reports[0].point, 0.0)


class TestParseRules(unittest.TestCase):
    def test_groups(self) -> None:
        self.assertEqual(
            parse_rules(["product"]), [Rule.PRODUCT_FORM_A, Rule.PRODUCT_FORM_B]
        )
        self.assertNotIn(Rule.SELF_SIMILAR_ORIGIN, parse_rules(["all"]))
        self.assertEqual(
            parse_rules(["scaling", "product-a", "scaling"]),
            [Rule.SCALING, Rule.PRODUCT_FORM_A],
        )

    def test_unknown(self) -> None:
        with self.assertRaises(InvalidConfig):
            parse_rules(["chain"])
        with self.assertRaises(InvalidConfig):
            parse_rules([" "])


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("p", ["identity", "power:2"])
@pytest.mark.parametrize("t", [1, 2, 3])
def test_reciprocal_closed_form(lam: float, p: str, t: int) -> None:
    cfg = StructuralConfig(function_from_name(p), lam)
    report = reciprocal_closed_form(Integers(), cfg, t)
    assert report.passed
    assert report.lhs == pytest.approx(report.rhs, rel=1e-12)


@pytest.mark.parametrize("lam", [0.5, 2.0, 3.0])
def test_sum_counterexample_at_origin(lam: float) -> None:
    report = sum_counterexample(Integers(), StructuralConfig(identity(), lam), 0)
    assert report.passed
    assert abs(report.lhs - report.rhs) > 1e-9 * max(abs(report.lhs), abs(report.rhs))


@given(
    lam=st.sampled_from([0.5, 2.0, 3.0]),
    t=st.integers(min_value=0, max_value=50),
)
def test_sum_counterexample_certifies(lam: float, t: int) -> None:
    report = sum_counterexample(Integers(), StructuralConfig(identity(), lam), t)
    assert report.passed


SCALES_AND_POINTS = [
    (Integers(), [1.0, 2.0, 5.0, 10.0]),
    (UniformGrid(0.5), [0.5, 1.0, 4.5, 10.0]),
    (QuantumScale(2), [0.125, 1.0, 4.0, 32.0]),
    (FiniteSet((0.5, 1.0, 2.0, 3.5, 7.0)), [0.5, 1.0, 2.0, 3.5]),
]

coefficients = st.lists(
    st.floats(min_value=0.1, max_value=3.0), min_size=1, max_size=3
)


@settings(max_examples=200, deadline=None)
@given(
    f_coefficients=coefficients,
    g_coefficients=coefficients,
    scale_and_points=st.sampled_from(SCALES_AND_POINTS),
    p=st.sampled_from(["identity", "power:2", "power:0.5"]),
    lam=st.sampled_from([0.5, 1.0, 2.0]),
    point=st.integers(min_value=0, max_value=3),
)
def test_rule_suite_at_scattered_points(
    f_coefficients: List[float],
    g_coefficients: List[float],
    scale_and_points: Tuple[TimeScale, List[float]],
    p: str,
    lam: float,
    point: int,
) -> None:
    scale, points = scale_and_points
    t = points[point]
    f, g = make_polynomial(f_coefficients), make_polynomial(g_coefficients)
    cfg = StructuralConfig(function_from_name(p), lam)

    report_a = product_rule(f, g, scale, cfg, t, form="A")
    report_b = product_rule(f, g, scale, cfg, t, form="B")
    assert report_a.passed and report_b.passed
    assert report_a.rhs == pytest.approx(report_b.rhs, rel=1e-12)
    assert reciprocal_rule(f, scale, cfg, t).passed
    assert quotient_rule(f, g, scale, cfg, t).passed
    assert scaling_rule(f, 2.5, scale, cfg, t).passed
