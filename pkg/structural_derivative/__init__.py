"""Structural derivatives on time scales"""

# flake8:noqa

from structural_derivative.timescale import (
    FiniteSet,
    Integers,
    IntervalUnion,
    QuantumScale,
    Reals,
    Side,
    TimeScale,
    UniformGrid,
    as_timescale,
)
from structural_derivative.structfn import (
    RealFunction,
    StructuralConfig,
    as_function,
    cpow,
    make_power_p,
    make_self_similar,
    make_stretched_exp_p,
)
from structural_derivative.derivative import (
    Branch,
    DerivativeResult,
    LimitSettings,
    fractal_derivative,
    fractional_order_derivative,
    hilger_derivative,
    shift_identity_check,
    structural_derivative,
)
from structural_derivative.calculus import Rule, RuleReport, verify_all
from structural_derivative.settings import set_lattice_tolerance, set_quantum_tolerance

from structural_derivative.version import __version__

__all__ = [
    "Branch",
    "DerivativeResult",
    "FiniteSet",
    "Integers",
    "IntervalUnion",
    "LimitSettings",
    "QuantumScale",
    "RealFunction",
    "Reals",
    "Rule",
    "RuleReport",
    "Side",
    "StructuralConfig",
    "TimeScale",
    "UniformGrid",
    "as_function",
    "as_timescale",
    "cpow",
    "fractal_derivative",
    "fractional_order_derivative",
    "hilger_derivative",
    "make_power_p",
    "make_self_similar",
    "make_stretched_exp_p",
    "set_lattice_tolerance",
    "set_quantum_tolerance",
    "shift_identity_check",
    "structural_derivative",
    "verify_all",
    "__version__",
]
