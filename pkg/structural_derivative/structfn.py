"""Scalars, target functions and structural functions.

Function values live in :data:`Scalar`: a ``float`` when the value is real,
a ``complex`` otherwise. Powers ``f**lam`` use the principal branch, so
fractional powers of negative values come out complex.
"""
import cmath
import collections.abc
import dataclasses
import math
import numbers
from functools import singledispatch
from typing import Any, Callable, Dict, List, Sequence, Tuple, Union

import numpy as np

from structural_derivative.errors import (
    DomainError,
    EvaluationError,
    InvalidConfig,
    PowUndefined,
    StructuralError,
    UnknownFunction,
)

Scalar = Union[float, complex]


def _fmt(x: float) -> str:
    return format(x, "g")


def as_scalar(z: Any) -> Scalar:
    """Normalize a number to a finite Scalar.

    Complex numbers with a zero imaginary part become floats.

    Raises:
        EvaluationError: If a component is NaN or infinite.
    """
    if isinstance(z, complex):
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise EvaluationError(f"non-finite value {z!r}")
        return z.real if z.imag == 0.0 else z
    x = float(z)
    if not math.isfinite(x):
        raise EvaluationError(f"non-finite value {x!r}")
    return x


def cpow(z: Scalar, lam: float) -> Scalar:
    """Principal-branch power ``exp(lam * Log(z))``.

    Positive real bases take the real fast path and return a float. Negative
    real bases with an integer exponent are real as well.

    Args:
        z: The base.
        lam: The exponent.

    Returns:
        Scalar: ``z**lam`` on the principal branch.

    Raises:
        PowUndefined: For zero raised to a negative power.
        EvaluationError: If the result overflows.
    """
    lam = float(lam)
    z = as_scalar(z)
    if lam == 1.0:
        return z
    try:
        if isinstance(z, float):
            if z > 0.0:
                return as_scalar(z**lam)
            if z == 0.0:
                if lam > 0.0:
                    return 0.0
                if lam == 0.0:
                    return 1.0
                raise PowUndefined(f"0 raised to the negative power {lam!r}")
            if lam.is_integer():
                return as_scalar(z**lam)
        return as_scalar(cmath.exp(lam * cmath.log(z)))
    except OverflowError as overflow:
        raise EvaluationError(f"{z!r} ** {lam!r} overflows") from overflow


@dataclasses.dataclass(frozen=True)
class RealFunction:
    """A function on the time scale, evaluated through ``__call__``.

    ``func`` must be deterministic and free of side effects; it may return
    complex values (fractional powers of negative arguments).
    """

    func: Callable[[float], Any]
    label: str

    def __call__(self, t: float) -> Scalar:
        try:
            value = self.func(t)
        except StructuralError:
            raise
        except (ArithmeticError, ValueError, TypeError) as failed_eval:
            raise EvaluationError(
                f"{self.label} cannot be evaluated at t={t!r}"
            ) from failed_eval
        try:
            return as_scalar(value)
        except EvaluationError as failed_eval:
            raise EvaluationError(
                f"{self.label} is not finite at t={t!r}"
            ) from failed_eval

    def power(self, t: float, lam: float) -> Scalar:
        """``f**lam`` at ``t``."""
        return cpow(self(t), lam)

    def scaled(self, gamma: float) -> "RealFunction":
        return RealFunction(lambda t: gamma * self(t), f"{_fmt(gamma)}*({self.label})")

    def reciprocal(self) -> "RealFunction":
        return RealFunction(lambda t: 1.0 / self(t), f"1/({self.label})")

    def __mul__(self, other: "RealFunction") -> "RealFunction":
        return RealFunction(
            lambda t: self(t) * other(t), f"({self.label})*({other.label})"
        )

    def __truediv__(self, other: "RealFunction") -> "RealFunction":
        return RealFunction(
            lambda t: self(t) / other(t), f"({self.label})/({other.label})"
        )

    def __add__(self, other: "RealFunction") -> "RealFunction":
        return RealFunction(
            lambda t: self(t) + other(t), f"({self.label})+({other.label})"
        )


@dataclasses.dataclass(frozen=True)
class SelfSimilarFn:
    """The self-similar function ``f(t) = c * t**beta`` of order beta.

    It satisfies ``f(a*t) = a**beta * f(t)`` for a > 0, ``f(0) = 0`` and
    ``c = f(1)``.
    """

    c: float
    beta: float

    def __post_init__(self) -> None:
        if not 0.0 < self.beta < 1.0:
            raise InvalidConfig(f"self-similar order must lie in (0, 1): {self.beta!r}")

    def __call__(self, t: float) -> Scalar:
        return self.c * cpow(t, self.beta)


@dataclasses.dataclass(frozen=True)
class StructuralConfig:
    """The pair (p, lambda) a structural derivative is taken with."""

    p: RealFunction
    lam: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", as_function(self.p))
        try:
            lam = float(self.lam)
        except (TypeError, ValueError) as failed_parse:
            raise InvalidConfig(f"Invalid lambda: {self.lam!r}") from failed_parse
        if not (math.isfinite(lam) and lam > 0.0):
            raise InvalidConfig(f"lambda must be positive, got {self.lam!r}")
        object.__setattr__(self, "lam", lam)


def identity() -> RealFunction:
    return RealFunction(lambda t: t, "t")


def constant(gamma: float) -> RealFunction:
    gamma = float(gamma)
    return RealFunction(lambda t: gamma, _fmt(gamma))


def make_power_p(alpha: float) -> RealFunction:
    """Structural function ``p(t) = t**alpha`` (fractal measure of t).

    ``p(0) = 0`` for alpha > 0, the continuous extension.
    """
    alpha = float(alpha)
    if alpha == 0.0 or not math.isfinite(alpha):
        raise InvalidConfig(f"power exponent must be finite and nonzero: {alpha!r}")
    return RealFunction(lambda t: cpow(t, alpha), f"t^{_fmt(alpha)}")


def make_stretched_exp_p(alpha: float) -> RealFunction:
    """Structural function ``p(t) = exp(t**alpha)``.

    The stretched exponential is usually named without a formula; this
    realization is a choice of this library. For non-integer alpha it is only
    defined for t >= 0.
    """
    alpha = float(alpha)
    if not (math.isfinite(alpha) and alpha > 0.0):
        raise InvalidConfig(f"stretched exponent must be positive: {alpha!r}")

    def stretched_exp(t: float) -> float:
        if t < 0.0 and not alpha.is_integer():
            raise DomainError(
                f"exp(t^{_fmt(alpha)}) is undefined for t={t!r} < 0"
            )
        return math.exp(t**alpha)

    return RealFunction(stretched_exp, f"exp(t^{_fmt(alpha)})")


def make_self_similar(c: float, beta: float) -> RealFunction:
    """Self-similar function ``c * t**beta`` with 0 < beta < 1."""
    fn = SelfSimilarFn(float(c), float(beta))
    return RealFunction(fn, f"{_fmt(fn.c)}*t^{_fmt(fn.beta)}")


def make_polynomial(coefficients: Sequence[float]) -> RealFunction:
    """Polynomial with coefficients in increasing degree, ``c0 + c1*t + ...``."""
    coeffs = np.asarray([float(c) for c in coefficients], dtype=float)
    if coeffs.size == 0:
        raise InvalidConfig("a polynomial needs at least one coefficient")
    label = "poly(" + ",".join(_fmt(c) for c in coeffs) + ")"
    return RealFunction(
        lambda t: float(np.polynomial.polynomial.polyval(t, coeffs)), label
    )


def make_shifted_square(c: float) -> RealFunction:
    """``(t - c)**2``."""
    c = float(c)
    return RealFunction(lambda t: (t - c) * (t - c), f"(t-{_fmt(c)})^2")


def _parse_numbers(text: str, sep: str, name: str) -> List[float]:
    try:
        return [float(x) for x in text.split(sep) if x.strip()]
    except ValueError as failed_parse:
        raise InvalidConfig(f"Invalid parameters for {name!r}: {text!r}") from failed_parse


# name -> (number of ":"-separated parameters, factory)
_REGISTRY: Dict[str, Tuple[int, Callable[..., RealFunction]]] = {
    "identity": (0, identity),
    "square": (0, lambda: make_polynomial([0.0, 0.0, 1.0])),
    "reciprocal": (0, lambda: RealFunction(lambda t: 1.0 / t, "1/t")),
    "sin": (0, lambda: RealFunction(math.sin, "sin(t)")),
    "cos": (0, lambda: RealFunction(math.cos, "cos(t)")),
    "exp": (0, lambda: RealFunction(math.exp, "exp(t)")),
    "const": (1, constant),
    "power": (1, make_power_p),
    "stretched-exp": (1, make_stretched_exp_p),
    "shifted-square": (1, make_shifted_square),
    "self-similar": (2, make_self_similar),
}

FUNCTION_NAMES = tuple(sorted([*_REGISTRY, "poly"]))


def function_from_name(name: str) -> RealFunction:
    """Look up a built-in function by registry name.

    Names are ``identity``, ``square``, ``reciprocal``, ``sin``, ``cos``,
    ``exp``, ``const:<gamma>``, ``power:<alpha>``, ``stretched-exp:<alpha>``,
    ``self-similar:<c>:<beta>``, ``shifted-square:<c>`` and
    ``poly:<c0>,<c1>,...``.

    Raises:
        UnknownFunction: If the name is not registered.
        InvalidConfig: If the parameters do not parse.
    """
    head, _, rest = name.strip().partition(":")
    if head == "poly":
        return make_polynomial(_parse_numbers(rest, ",", name))
    if head not in _REGISTRY:
        raise UnknownFunction(
            f"Unknown function {name!r}, must be one of: {', '.join(FUNCTION_NAMES)}"
        )
    arity, factory = _REGISTRY[head]
    params = _parse_numbers(rest, ":", name) if rest else []
    if len(params) != arity:
        raise InvalidConfig(f"{head!r} takes {arity} parameter(s), got {name!r}")
    return factory(*params)


@singledispatch
def as_function(obj: Any) -> RealFunction:
    """Coerce a RealFunction, a registry name, a number (constant function)
    or a plain callable to a RealFunction."""
    raise TypeError(
        "Invalid type, must be one of: RealFunction, str, number, or callable"
    )


@as_function.register(RealFunction)
def _function_identity(obj: RealFunction) -> RealFunction:
    return obj


@as_function.register(str)
def _function_from_string(obj: str) -> RealFunction:
    return function_from_name(obj)


@as_function.register(numbers.Real)
def _function_from_number(obj: numbers.Real) -> RealFunction:
    return constant(float(obj))


@as_function.register(collections.abc.Callable)
def _function_from_callable(obj: Callable[[float], Any]) -> RealFunction:
    return RealFunction(obj, getattr(obj, "__name__", repr(obj)))
