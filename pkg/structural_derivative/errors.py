"""Exceptions raised by structural_derivative.

Every exception has a stable ``code`` which the command line reports in its
machine-readable ``error`` field. :class:`SpecError` subclasses are caller
mistakes (bad time scale, bad point, bad function name); the CLI exits with 1
for them. :class:`ComputationError` subclasses come out of an evaluation; the
CLI exits with 2.
"""


class StructuralError(Exception):
    code = "structural-error"


class SpecError(StructuralError, ValueError):
    code = "spec-error"


class ComputationError(StructuralError, ArithmeticError):
    code = "computation-error"


class PointNotInScale(SpecError):
    code = "point-not-in-scale"


class InvalidTimeScale(SpecError):
    code = "invalid-timescale"


class InvalidConfig(SpecError):
    code = "invalid-config"


class UnknownFunction(SpecError):
    code = "unknown-function"


class InvalidJobSpec(SpecError):
    code = "invalid-job-spec"


class SideNotDense(ComputationError):
    code = "side-not-dense"


class NotInKappa(ComputationError):
    code = "not-in-kappa"


class PowUndefined(ComputationError):
    code = "pow-undefined"


class DomainError(ComputationError):
    code = "domain-error"


class EvaluationError(ComputationError):
    code = "evaluation-error"


class StructuralDegenerate(ComputationError):
    code = "structural-degenerate"


class DenseLimitDiverged(ComputationError):
    code = "dense-limit-diverged"


class ZeroDenominator(ComputationError):
    code = "zero-denominator"


class DegenerateCase(ComputationError):
    code = "degenerate-case"


def error_code(error: BaseException) -> str:
    """Machine-readable code of an exception, ``internal-error`` if foreign."""
    return getattr(error, "code", "internal-error")
