"""Job specifications and output records of the command line."""
from typing import Any, Dict, List, Literal, Optional, Type, TypeVar, Union

import packaging.version
import pydantic
from pydantic import BaseModel, Field

from structural_derivative.calculus import RuleReport
from structural_derivative.derivative import DerivativeResult, LimitSettings
from structural_derivative.errors import InvalidJobSpec, StructuralError, error_code
from structural_derivative.timescale import PointClass
from structural_derivative.utils import split_scalar

_PYDANTIC_2_0 = packaging.version.parse(
    pydantic.__version__
) >= packaging.version.parse("2.0.0")

ModelT = TypeVar("ModelT", bound=BaseModel)

ERROR_BRANCH = "error"


class _Model(BaseModel):
    class Config:
        if _PYDANTIC_2_0:
            populate_by_name = True
        else:
            allow_population_by_field_name = True


class JobSpec(_Model):
    """A job as read from a ``--config`` file; command line flags override it."""

    command: Optional[Literal["eval", "table", "verify", "classify"]] = None
    timescale: Union[Dict[str, Any], str] = "reals"
    """A time scale JSON object or a preset such as ``grid:0.5``"""
    function: str = "identity"
    function2: Optional[str] = None
    """Second function of the product and quotient rules"""
    structural: str = "identity"
    lam: float = Field(1.0, alias="lambda")
    points: Union[List[float], str] = ""
    """Explicit points, a comma separated list or a ``from:to:count`` range"""
    settings: Dict[str, Any] = Field(default_factory=dict)
    """Overrides of the dense-limit settings"""
    output: Literal["csv", "json"] = "csv"
    rules: List[str] = Field(default_factory=lambda: ["all"])
    gamma: float = 2.0
    c: float = 1.0
    beta: float = 0.5
    alpha: float = 0.25
    workers: int = 1

    class Config:
        extra = "forbid"

    def limit_settings(self) -> LimitSettings:
        known = set(LimitSettings.__dataclass_fields__)
        unknown = sorted(set(self.settings) - known)
        if unknown:
            raise InvalidJobSpec(
                f"Unknown settings {', '.join(unknown)}, must be among: "
                f"{', '.join(sorted(known))}"
            )
        return LimitSettings().with_overrides(**self.settings)


class EvalRecord(_Model):
    t: float
    value_re: Optional[float] = None
    value_im: Optional[float] = None
    branch: str
    error_estimate: Optional[float] = None
    error: Optional[str] = None

    @classmethod
    def from_result(cls, t: float, result: DerivativeResult) -> "EvalRecord":
        re, im = split_scalar(result.value)
        return cls(
            t=t,
            value_re=re,
            value_im=im,
            branch=result.branch.value,
            error_estimate=result.error_estimate,
        )

    @classmethod
    def from_error(cls, t: float, error: Exception) -> "EvalRecord":
        return cls(t=t, branch=ERROR_BRANCH, error=error_code(error))


class ClassifyRecord(_Model):
    t: float
    sigma: Optional[float] = None
    rho: Optional[float] = None
    mu: Optional[float] = None
    right: Optional[str] = None
    left: Optional[str] = None
    in_kappa: Optional[bool] = None
    error: Optional[str] = None

    @classmethod
    def from_point(
        cls, t: float, sigma: float, rho: float, point: PointClass, in_kappa: bool
    ) -> "ClassifyRecord":
        return cls(
            t=t,
            sigma=sigma,
            rho=rho,
            mu=sigma - t,
            right=point.right.value,
            left=point.left.value,
            in_kappa=in_kappa,
        )

    @classmethod
    def from_error(cls, t: float, error: StructuralError) -> "ClassifyRecord":
        return cls(t=t, error=error_code(error))


class ReportRecord(_Model):
    rule: str
    point: float
    lhs_re: Optional[float] = None
    lhs_im: Optional[float] = None
    rhs_re: Optional[float] = None
    rhs_im: Optional[float] = None
    residual: Optional[float] = None
    tolerance: float
    passed: bool
    applicable: bool
    error: Optional[str] = None

    @classmethod
    def from_report(cls, report: RuleReport) -> "ReportRecord":
        lhs_re, lhs_im = split_scalar(report.lhs)
        rhs_re, rhs_im = split_scalar(report.rhs)
        return cls(
            rule=report.rule.value,
            point=report.point,
            lhs_re=lhs_re,
            lhs_im=lhs_im,
            rhs_re=rhs_re,
            rhs_im=rhs_im,
            residual=report.residual,
            tolerance=report.tolerance,
            passed=report.passed,
            applicable=report.applicable,
            error=report.error,
        )


EVAL_COLUMNS = ["t", "value_re", "value_im", "branch", "error_estimate"]
CLASSIFY_COLUMNS = ["t", "sigma", "rho", "mu", "right", "left", "in_kappa", "error"]
REPORT_COLUMNS = [
    "rule",
    "point",
    "lhs_re",
    "lhs_im",
    "rhs_re",
    "rhs_im",
    "residual",
    "tolerance",
    "passed",
    "applicable",
    "error",
]


def parse_model(cls: Type[ModelT], data: Any) -> ModelT:
    """Validate ``data`` into ``cls`` on either major version of pydantic.

    Raises:
        InvalidJobSpec: If validation fails.
    """
    try:
        if _PYDANTIC_2_0:
            return cls.model_validate(data)  # type: ignore[attr-defined]
        return cls.parse_obj(data)
    except pydantic.ValidationError as failed_parse:
        raise InvalidJobSpec(f"Invalid {cls.__name__}: {failed_parse}") from failed_parse


def dump_model(model: BaseModel) -> Dict[str, Any]:
    if _PYDANTIC_2_0:
        return model.model_dump(by_alias=True)  # type: ignore[attr-defined]
    return model.dict(by_alias=True)
