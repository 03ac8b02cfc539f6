"""Calculus rules of the structural derivative as checkable identities.

Each check computes both sides of a rule at a point: ``lhs`` is the
structural derivative of the composed function evaluated directly, ``rhs``
is the rule's formula built from the derivatives of the parts. The rules
assume continuous functions; continuity is not checked, so a violated
hypothesis shows up as a failed report.

The rules rely on ``(f*g)**lam = f**lam * g**lam``, which holds on the
principal branch for positive values (and for any values when lam is an
integer).
"""
import concurrent.futures
import dataclasses
import enum
import logging
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence

from structural_derivative.derivative import (
    Branch,
    DerivativeResult,
    LimitSettings,
    structural_derivative,
)
from structural_derivative.errors import (
    ComputationError,
    DegenerateCase,
    InvalidConfig,
    ZeroDenominator,
    error_code,
)
from structural_derivative.settings import Settings
from structural_derivative.structfn import (
    RealFunction,
    Scalar,
    StructuralConfig,
    as_function,
    cpow,
    function_from_name,
    identity,
    make_power_p,
    make_self_similar,
)
from structural_derivative.timescale import TimeScale, as_timescale

logger = logging.getLogger(__name__)


class Rule(str, enum.Enum):
    SCALING = "scaling"
    PRODUCT_FORM_A = "product-a"
    PRODUCT_FORM_B = "product-b"
    RECIPROCAL = "reciprocal"
    QUOTIENT = "quotient"
    SUM_COUNTEREXAMPLE = "sum-counterexample"
    SQUARE_FACTORIZATION = "square"
    RECIPROCAL_CLOSED_FORM = "reciprocal-closed-form"
    SELF_SIMILAR_ORIGIN = "self-similar"


@dataclasses.dataclass(frozen=True)
class RuleReport:
    """Outcome of one rule check at one point.

    ``passed`` means ``residual <= tolerance``, except for the sum
    counterexample, which passes when the two sides are separated by more
    than the tolerance. Reports with ``applicable=False`` do not count
    towards pass/fail; ``error`` holds the code of the failure that made a
    check impossible.
    """

    rule: Rule
    point: float
    lhs: Optional[Scalar]
    rhs: Optional[Scalar]
    residual: Optional[float]
    tolerance: float
    passed: bool
    applicable: bool = True
    error: Optional[str] = None


def _tolerance(lhs: Scalar, rhs: Scalar, results: Iterable[DerivativeResult]) -> float:
    dense_error = sum(
        r.error_estimate for r in results if r.branch is Branch.DENSE_LIMIT
    )
    scale = max(1.0, abs(lhs), abs(rhs))
    return Settings.get().rule_tolerance * scale + 10.0 * dense_error


def _report(
    rule: Rule,
    t: float,
    lhs: Scalar,
    rhs: Scalar,
    results: Sequence[DerivativeResult],
    applicable: bool = True,
) -> RuleReport:
    residual = abs(lhs - rhs)
    tolerance = _tolerance(lhs, rhs, results)
    return RuleReport(
        rule=rule,
        point=t,
        lhs=lhs,
        rhs=rhs,
        residual=residual,
        tolerance=tolerance,
        passed=residual <= tolerance,
        applicable=applicable,
    )


def _require_nonzero(fn: RealFunction, t: float, s: float) -> None:
    at_t, at_s = fn(t), fn(s)
    scale = max(1.0, abs(at_t), abs(at_s))
    tol = Settings.get().zero_tolerance * scale
    if abs(at_t) <= tol or abs(at_s) <= tol:
        raise ZeroDenominator(
            f"{fn.label} vanishes at t={t!r} or sigma(t)={s!r}"
        )


def scaling_rule(
    f: Any,
    gamma: float,
    T: Any,
    cfg: StructuralConfig,
    t: float,
    settings: Optional[LimitSettings] = None,
) -> RuleReport:
    """``(gamma*f)^D = gamma**lam * f^D``.

    gamma = 0 is allowed: both sides vanish.
    """
    f, T = as_function(f), as_timescale(T)
    t = T.require(t)
    direct = structural_derivative(f.scaled(gamma), T, cfg, t, settings)
    of_f = structural_derivative(f, T, cfg, t, settings)
    rhs = cpow(gamma, cfg.lam) * of_f.value
    return _report(Rule.SCALING, t, direct.value, rhs, [direct, of_f])


def product_rule(
    f: Any,
    g: Any,
    T: Any,
    cfg: StructuralConfig,
    t: float,
    settings: Optional[LimitSettings] = None,
    form: str = "A",
) -> RuleReport:
    """Product rule in one of its two forms.

    Form A: ``f^D(t) g**lam(t) + f**lam(sigma(t)) g^D(t)``.
    Form B: ``f^D(t) g**lam(sigma(t)) + f**lam(t) g^D(t)``.
    """
    f, g, T = as_function(f), as_function(g), as_timescale(T)
    t = T.require(t)
    s = T.sigma(t)
    lam = cfg.lam
    direct = structural_derivative(f * g, T, cfg, t, settings)
    of_f = structural_derivative(f, T, cfg, t, settings)
    of_g = structural_derivative(g, T, cfg, t, settings)
    form = form.upper()
    if form == "A":
        rule = Rule.PRODUCT_FORM_A
        rhs = of_f.value * g.power(t, lam) + f.power(s, lam) * of_g.value
    elif form == "B":
        rule = Rule.PRODUCT_FORM_B
        rhs = of_f.value * g.power(s, lam) + f.power(t, lam) * of_g.value
    else:
        raise InvalidConfig(f"product rule form must be 'A' or 'B', got {form!r}")
    return _report(rule, t, direct.value, rhs, [direct, of_f, of_g])


def reciprocal_rule(
    f: Any,
    T: Any,
    cfg: StructuralConfig,
    t: float,
    settings: Optional[LimitSettings] = None,
) -> RuleReport:
    """``(1/f)^D = -f^D / (f**lam(sigma(t)) f**lam(t))``, for f(t) f(sigma(t)) != 0."""
    f, T = as_function(f), as_timescale(T)
    t = T.require(t)
    s = T.sigma(t)
    _require_nonzero(f, t, s)
    direct = structural_derivative(f.reciprocal(), T, cfg, t, settings)
    of_f = structural_derivative(f, T, cfg, t, settings)
    rhs = -of_f.value / (f.power(s, cfg.lam) * f.power(t, cfg.lam))
    return _report(Rule.RECIPROCAL, t, direct.value, rhs, [direct, of_f])


def quotient_rule(
    f: Any,
    g: Any,
    T: Any,
    cfg: StructuralConfig,
    t: float,
    settings: Optional[LimitSettings] = None,
) -> RuleReport:
    """``(f/g)^D = (f^D g**lam - f**lam g^D) / (g**lam(sigma(t)) g**lam(t))``."""
    f, g, T = as_function(f), as_function(g), as_timescale(T)
    t = T.require(t)
    s = T.sigma(t)
    lam = cfg.lam
    _require_nonzero(g, t, s)
    direct = structural_derivative(f / g, T, cfg, t, settings)
    of_f = structural_derivative(f, T, cfg, t, settings)
    of_g = structural_derivative(g, T, cfg, t, settings)
    numerator = of_f.value * g.power(t, lam) - f.power(t, lam) * of_g.value
    rhs = numerator / (g.power(s, lam) * g.power(t, lam))
    return _report(Rule.QUOTIENT, t, direct.value, rhs, [direct, of_f, of_g])


def sum_counterexample(
    T: Any,
    cfg: StructuralConfig,
    t: float,
    settings: Optional[LimitSettings] = None,
) -> RuleReport:
    """Certify that the derivative of f + g is not the sum of the derivatives.

    Uses f(t) = t and g(t) = 2t at a right-scattered point, where the direct
    derivative is ``3**lam * Q`` and the sum is ``(1 + 2**lam) * Q`` with
    ``Q = (sigma**lam - t**lam) / (p(sigma) - p(t))``. For lam = 1 both agree
    and the report is marked not applicable.

    Raises:
        DegenerateCase: If ``t`` is right-dense or ``Q`` vanishes.
    """
    T = as_timescale(T)
    t = T.require(t)
    s = T.sigma(t)
    if not s > t:
        raise DegenerateCase(f"sum counterexample needs a right-scattered point, t={t!r}")
    if cpow(s, cfg.lam) == cpow(t, cfg.lam):
        raise DegenerateCase(f"sigma**lam = t**lam at t={t!r}, both sides vanish")
    f, g = identity(), identity().scaled(2.0)
    direct = structural_derivative(f + g, T, cfg, t, settings)
    of_f = structural_derivative(f, T, cfg, t, settings)
    of_g = structural_derivative(g, T, cfg, t, settings)
    lhs, rhs = direct.value, of_f.value + of_g.value
    separation = abs(lhs - rhs)
    tolerance = Settings.get().separation_tolerance * max(abs(lhs), abs(rhs))
    applicable = cfg.lam != 1.0
    return RuleReport(
        rule=Rule.SUM_COUNTEREXAMPLE,
        point=t,
        lhs=lhs,
        rhs=rhs,
        residual=separation,
        tolerance=tolerance,
        passed=applicable and separation > tolerance,
        applicable=applicable,
    )


def square_identity(
    T: Any,
    cfg: StructuralConfig,
    t: float,
    settings: Optional[LimitSettings] = None,
) -> RuleReport:
    """Derivative of t**2 against ``(t)^D * (sigma(t)**lam + t**lam)``.

    This factorized form reduces to ``(t)^D * (sigma(t) + t)`` for lam = 1
    and to ``(t)^D * 2 t**lam`` at right-dense points. Valid for t >= 0 or
    integer lam.
    """
    T = as_timescale(T)
    t = T.require(t)
    s = T.sigma(t)
    direct = structural_derivative(function_from_name("square"), T, cfg, t, settings)
    of_t = structural_derivative(identity(), T, cfg, t, settings)
    rhs = of_t.value * (cpow(s, cfg.lam) + cpow(t, cfg.lam))
    return _report(Rule.SQUARE_FACTORIZATION, t, direct.value, rhs, [direct, of_t])


def reciprocal_closed_form(
    T: Any,
    cfg: StructuralConfig,
    t: float,
    settings: Optional[LimitSettings] = None,
) -> RuleReport:
    """Derivative of 1/t against ``-(t)^D / (t * sigma(t))**lam``."""
    T = as_timescale(T)
    t = T.require(t)
    s = T.sigma(t)
    _require_nonzero(identity(), t, s)
    reciprocal = function_from_name("reciprocal")
    direct = structural_derivative(reciprocal, T, cfg, t, settings)
    of_t = structural_derivative(identity(), T, cfg, t, settings)
    rhs = -of_t.value / cpow(t * s, cfg.lam)
    return _report(Rule.RECIPROCAL_CLOSED_FORM, t, direct.value, rhs, [direct, of_t])


def self_similar_origin(
    c: float,
    beta: float,
    alpha: float,
    T: Any,
    lam: float,
    settings: Optional[LimitSettings] = None,
) -> RuleReport:
    """Derivative at 0 of ``c * t**beta`` with ``p = t**alpha``.

    Expected value: 0 when 0 is right-dense and alpha < beta*lam, and
    ``c**lam * sigma(0)**(beta*lam - alpha)`` when 0 is right-scattered. A
    right-dense 0 with alpha >= beta*lam has no closed form to compare with
    and is reported as not applicable.
    """
    T = as_timescale(T)
    t = T.require(0.0)
    cfg = StructuralConfig(make_power_p(alpha), lam)
    result = structural_derivative(make_self_similar(c, beta), T, cfg, t, settings)
    s = T.sigma(t)
    applicable = True
    if s > t:
        expected = cpow(c, cfg.lam) * cpow(s, beta * cfg.lam - alpha)
    else:
        expected = 0.0
        applicable = alpha < beta * cfg.lam
    return _report(
        Rule.SELF_SIMILAR_ORIGIN, t, result.value, expected, [result], applicable
    )


RULE_GROUPS: Dict[str, List[Rule]] = {
    "product": [Rule.PRODUCT_FORM_A, Rule.PRODUCT_FORM_B],
    "all": [r for r in Rule if r is not Rule.SELF_SIMILAR_ORIGIN],
}


def parse_rules(names: Iterable[str]) -> List[Rule]:
    """Rule names to rules; ``product`` expands to both forms, ``all`` to
    every rule that takes a point."""
    rules: List[Rule] = []
    for name in names:
        name = name.strip()
        if not name:
            continue
        try:
            expanded = RULE_GROUPS.get(name) or [Rule(name)]
        except ValueError as failed_parse:
            choices = ", ".join([*RULE_GROUPS, *(r.value for r in Rule)])
            raise InvalidConfig(
                f"Unknown rule {name!r}, must be one of: {choices}"
            ) from failed_parse
        rules.extend(r for r in expanded if r not in rules)
    if not rules:
        raise InvalidConfig("no rules to verify")
    return rules


def _error_report(rule: Rule, t: float, error: ComputationError) -> RuleReport:
    applicable = not isinstance(error, (ZeroDenominator, DegenerateCase))
    if applicable:
        logger.warning("%s check failed at t=%r: %s", rule.value, t, error)
    return RuleReport(
        rule=rule,
        point=t,
        lhs=None,
        rhs=None,
        residual=None,
        tolerance=0.0,
        passed=False,
        applicable=applicable,
        error=error_code(error),
    )


def verify_all(
    rules: Sequence[Rule],
    f: Any,
    g: Any,
    T: Any,
    cfg: StructuralConfig,
    points: Sequence[float],
    settings: Optional[LimitSettings] = None,
    gamma: float = 2.0,
    self_similar: Optional[Dict[str, float]] = None,
    workers: int = 1,
) -> List[RuleReport]:
    """Run every rule at every point.

    Reports come back ordered by rule, then by point, regardless of
    ``workers``. ZeroDenominator and DegenerateCase outcomes are recorded as
    not applicable; other computation errors as failed checks.

    Args:
        rules: Rules to check.
        f, g: The functions the rules are applied to (g is used by the
            product and quotient rules).
        T: The time scale.
        cfg: Structural function and exponent.
        points: Points of T to check at. The self-similar rule runs once, at 0.
        settings: Dense-limit settings.
        gamma: Constant of the scaling rule.
        self_similar: ``{"c": .., "beta": .., "alpha": ..}`` for the
            self-similar rule.
        workers: Thread pool size.
    """
    f, g, T = as_function(f), as_function(g), as_timescale(T)
    ss = {"c": 1.0, "beta": 0.5, "alpha": 0.25, **(self_similar or {})}

    checks: Dict[Rule, Callable[[float], RuleReport]] = {
        Rule.SCALING: lambda t: scaling_rule(f, gamma, T, cfg, t, settings),
        Rule.PRODUCT_FORM_A: lambda t: product_rule(f, g, T, cfg, t, settings, "A"),
        Rule.PRODUCT_FORM_B: lambda t: product_rule(f, g, T, cfg, t, settings, "B"),
        Rule.RECIPROCAL: lambda t: reciprocal_rule(f, T, cfg, t, settings),
        Rule.QUOTIENT: lambda t: quotient_rule(f, g, T, cfg, t, settings),
        Rule.SUM_COUNTEREXAMPLE: lambda t: sum_counterexample(T, cfg, t, settings),
        Rule.SQUARE_FACTORIZATION: lambda t: square_identity(T, cfg, t, settings),
        Rule.RECIPROCAL_CLOSED_FORM: lambda t: reciprocal_closed_form(
            T, cfg, t, settings
        ),
        Rule.SELF_SIMILAR_ORIGIN: lambda t: self_similar_origin(
            ss["c"], ss["beta"], ss["alpha"], T, cfg.lam, settings
        ),
    }

    jobs = [
        (rule, t)
        for rule in rules
        for t in ([0.0] if rule is Rule.SELF_SIMILAR_ORIGIN else points)
    ]

    def run(job: Any) -> RuleReport:
        rule, t = job
        try:
            return checks[rule](t)
        except ComputationError as error:
            return _error_report(rule, t, error)

    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, jobs))
    return [run(job) for job in jobs]


def all_passed(reports: Iterable[RuleReport]) -> bool:
    return all(r.passed for r in reports if r.applicable)


def summarize(reports: Iterable[RuleReport]) -> Dict[str, Dict[str, Any]]:
    """Per rule: maximum residual over the applicable checks and counts."""
    summary: Dict[str, Dict[str, Any]] = {}
    for report in reports:
        entry = summary.setdefault(
            report.rule.value,
            {"max_residual": 0.0, "checked": 0, "passed": 0, "not_applicable": 0},
        )
        if not report.applicable:
            entry["not_applicable"] += 1
            continue
        entry["checked"] += 1
        entry["passed"] += int(report.passed)
        if report.residual is not None:
            entry["max_residual"] = max(entry["max_residual"], report.residual)
    return summary
