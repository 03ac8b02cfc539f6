"""The structural derivative on a time scale.

For ``t`` in T^kappa, lambda > 0 and a structural function ``p``, the
structural derivative of ``f`` at ``t`` is

* at a right-scattered point, the exact quotient
  ``[f**lam(sigma(t)) - f**lam(t)] / [p(sigma(t)) - p(t)]``;
* at a right-dense point, the limit as s -> t within T of
  ``[f**lam(t) - f**lam(s)] / [p(t) - p(s)]``.

The Hilger derivative (lambda = 1, p = identity), the fractal derivative
(lambda = 1, p = t**alpha) and the fractional order derivative
(lambda = alpha, p = t**alpha) are special cases.
"""
import dataclasses
import enum
import logging
import math
from typing import Any, List, Optional, Sequence, Tuple

from structural_derivative.errors import (
    DenseLimitDiverged,
    InvalidConfig,
    NotInKappa,
    StructuralDegenerate,
)
from structural_derivative.settings import Settings
from structural_derivative.structfn import (
    RealFunction,
    Scalar,
    StructuralConfig,
    as_function,
    as_scalar,
    identity,
    make_power_p,
)
from structural_derivative.timescale import Side, TimeScale, as_timescale

logger = logging.getLogger(__name__)

# Largest error ratio accepted when extrapolating with an estimated order.
_MAX_ESTIMATED_RATIO = 1.0 - 1e-4


class Branch(str, enum.Enum):
    SCATTERED_EXACT = "scattered-exact"
    DENSE_LIMIT = "dense-limit"


@dataclasses.dataclass(frozen=True)
class LimitSettings:
    """Convergence control of the dense limit.

    A side has converged when two consecutive estimates differ by at most
    ``abs_tol + rel_tol * |estimate|``; the limit is accepted once every
    available side has converged (after at least ``min_iters`` samples) and
    the one-sided estimates agree within the same tolerance.
    """

    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    max_iters: int = 40
    min_iters: int = 4
    shrink_ratio: float = 0.5
    use_richardson: bool = True
    initial_step: Optional[float] = None
    """First distance |s - t| of the approach schedule; defaults to
    ``max(1, |t|) * Settings.approach_scale``."""

    def __post_init__(self) -> None:
        if not (self.abs_tol >= 0 and self.rel_tol >= 0):
            raise InvalidConfig("tolerances must be non-negative")
        if not 0.0 < self.shrink_ratio < 1.0:
            raise InvalidConfig(
                f"shrink_ratio must lie in (0, 1), got {self.shrink_ratio!r}"
            )
        if not 1 <= self.min_iters <= self.max_iters:
            raise InvalidConfig(
                f"need 1 <= min_iters <= max_iters, got "
                f"{self.min_iters!r} and {self.max_iters!r}"
            )
        if self.initial_step is not None and not self.initial_step > 0:
            raise InvalidConfig(f"initial_step must be positive: {self.initial_step!r}")

    def tolerance(self, value: Scalar) -> float:
        return self.abs_tol + self.rel_tol * abs(value)

    def with_overrides(self, **overrides: Any) -> "LimitSettings":
        """Copy with every override that is not None applied."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        return dataclasses.replace(self, **changes)


@dataclasses.dataclass(frozen=True)
class DerivativeResult:
    value: Scalar
    branch: Branch
    error_estimate: float = 0.0
    iterations: int = 0
    samples_used: Tuple[Tuple[float, Scalar], ...] = ()


def richardson_extrapolate(values: Sequence[Scalar], ratio: float) -> Scalar:
    """Extrapolate the limit of a sequence sampled on a geometric schedule.

    Uses the last three terms. The order of the leading error term is
    estimated from the ratio of consecutive differences, which makes the
    extrapolation exact for geometric error sequences (such as
    ``c * s**gamma`` with any gamma > 0). When that ratio is unusable the
    first-order formula for step ratio ``ratio`` is applied instead.

    Args:
        values: At least three approximations at shrinking steps.
        ratio: Ratio of the last two steps, used by the first-order formula.

    Returns:
        The extrapolated limit.
    """
    if len(values) < 3:
        raise ValueError("richardson_extrapolate requires at least three values.")
    q0, q1, q2 = values[-3:]
    d0, d1 = q1 - q0, q2 - q1
    if d1 == 0:
        return q2
    if d0 != 0:
        estimated = d1 / d0
        if isinstance(estimated, complex):
            if abs(estimated.imag) > 1e-6 * abs(estimated):
                estimated = math.nan
            else:
                estimated = estimated.real
        if 0.0 < estimated < _MAX_ESTIMATED_RATIO:
            return as_scalar(q2 + d1 * estimated / (1.0 - estimated))
    return as_scalar((q2 - ratio * q1) / (1.0 - ratio))


class _OneSidedLimit:
    """Quotient sequence and running estimate along one approach side."""

    def __init__(
        self,
        side: Side,
        t: float,
        points: Any,
        f: RealFunction,
        cfg: StructuralConfig,
        f_t: Scalar,
        p_t: Scalar,
        settings: LimitSettings,
    ):
        self.side = side
        self._t = t
        self._points = iter(points)
        self._f = f
        self._cfg = cfg
        self._f_t = f_t
        self._p_t = p_t
        self._settings = settings
        self.raw: List[Scalar] = []
        self.samples: List[Tuple[float, Scalar]] = []
        self.estimate: Optional[Scalar] = None
        self.step = math.inf

    def advance(self) -> None:
        s = next(self._points, None)
        if s is None:
            raise DenseLimitDiverged(
                f"approach sequence {self.side.value} ran out of points"
            )
        dp = self._p_t - self._cfg.p(s)
        if dp == 0:
            raise StructuralDegenerate(f"p(t) - p(s) vanishes at s={s!r}")
        quotient = as_scalar((self._f_t - self._f.power(s, self._cfg.lam)) / dp)
        self.raw.append(quotient)
        self.samples.append((s, quotient))

        settings = self._settings
        if settings.use_richardson and len(self.raw) >= 3:
            estimate = richardson_extrapolate(self.raw, self.step_ratio())
        else:
            estimate = quotient
        if self.estimate is not None:
            self.step = abs(estimate - self.estimate)
        self.estimate = estimate

    def step_ratio(self) -> float:
        """Ratio of the last two distances |s - t|, the schedule ratio if unusable."""
        if len(self.samples) < 2:
            return self._settings.shrink_ratio
        (previous, _), (last, _) = self.samples[-2:]
        ratio = abs(last - self._t) / abs(previous - self._t)
        if 0.0 < ratio < 1.0:
            return ratio
        return self._settings.shrink_ratio

    def converged(self) -> bool:
        return self.estimate is not None and self.step <= self._settings.tolerance(
            self.estimate
        )


def _scattered_quotient(
    f: RealFunction, cfg: StructuralConfig, t: float, s: float
) -> DerivativeResult:
    p_t = cfg.p(t)
    dp = cfg.p(s) - p_t
    if abs(dp) < Settings.get().degenerate_tolerance * max(1.0, abs(p_t)):
        raise StructuralDegenerate(
            f"p(sigma(t)) - p(t) = {dp!r} vanishes at t={t!r} for p={cfg.p.label}"
        )
    value = as_scalar((f.power(s, cfg.lam) - f.power(t, cfg.lam)) / dp)
    return DerivativeResult(value=value, branch=Branch.SCATTERED_EXACT)


def _dense_limit(
    f: RealFunction,
    T: TimeScale,
    cfg: StructuralConfig,
    t: float,
    settings: LimitSettings,
) -> DerivativeResult:
    sides = T.dense_sides(t)
    if not sides:
        raise DenseLimitDiverged(f"no points of {T!r} accumulate at {t!r}")
    scale = None
    if settings.initial_step is not None:
        scale = settings.initial_step / max(1.0, abs(t))

    f_t, p_t = f.power(t, cfg.lam), cfg.p(t)
    limits = [
        _OneSidedLimit(
            side,
            t,
            T.approach(t, side, scale=scale, ratio=settings.shrink_ratio),
            f,
            cfg,
            f_t,
            p_t,
            settings,
        )
        for side in sides
    ]

    spread = math.inf
    for iteration in range(1, settings.max_iters + 1):
        for limit in limits:
            limit.advance()
        if iteration < settings.min_iters or not all(x.converged() for x in limits):
            continue
        estimates = [x.estimate for x in limits]
        mean = as_scalar(sum(estimates) / len(estimates))  # type: ignore[arg-type]
        spread = max(abs(a - b) for a in estimates for b in estimates)  # type: ignore
        if spread <= settings.tolerance(mean):
            error_estimate = max([spread] + [x.step for x in limits])
            logger.debug(
                "dense limit at t=%r converged after %d iterations (error %.3g)",
                t,
                iteration,
                error_estimate,
            )
            return DerivativeResult(
                value=mean,
                branch=Branch.DENSE_LIMIT,
                error_estimate=error_estimate,
                iterations=iteration,
                samples_used=tuple(s for x in limits for s in x.samples),
            )

    if all(x.converged() for x in limits):
        detail = f"one-sided limits disagree by {spread:.3g}"
    else:
        detail = "last step " + ", ".join(
            f"{x.side.value}={x.step:.3g}" for x in limits
        )
    raise DenseLimitDiverged(
        f"no limit at t={t!r} within {settings.max_iters} iterations ({detail})"
    )


def structural_derivative(
    f: Any,
    T: Any,
    cfg: StructuralConfig,
    t: float,
    settings: Optional[LimitSettings] = None,
) -> DerivativeResult:
    """Structural derivative of ``f`` at ``t`` associated with ``cfg``.

    Args:
        f: The function, anything :func:`as_function` accepts.
        T: The time scale, anything :func:`as_timescale` accepts.
        cfg: Structural function ``p`` and exponent ``lam``.
        t: A point of T^kappa.
        settings: Dense-limit settings, defaults to ``LimitSettings()``.

    Returns:
        DerivativeResult: The value and the branch it was computed on.

    Raises:
        PointNotInScale: If ``t`` is not a point of ``T``.
        NotInKappa: If ``t`` is a left-scattered maximum of ``T``.
        StructuralDegenerate: If ``p`` does not separate ``t`` from the points
            the quotient is taken with.
        DenseLimitDiverged: If the dense limit does not settle, or the
            one-sided limits disagree.
        EvaluationError: If ``f`` or ``p`` cannot be evaluated.
    """
    f = as_function(f)
    T = as_timescale(T)
    settings = settings or LimitSettings()
    t = T.require(t)
    if not T.in_kappa(t):
        raise NotInKappa(f"{t!r} is a left-scattered maximum of {T!r}")
    s = T.sigma(t)
    if s > t:
        logger.debug("t=%r is right-scattered (sigma=%r)", t, s)
        return _scattered_quotient(f, cfg, t, s)
    return _dense_limit(f, T, cfg, t, settings)


def hilger_derivative(
    f: Any, T: Any, t: float, settings: Optional[LimitSettings] = None
) -> DerivativeResult:
    """The delta (Hilger) derivative: lambda = 1, p = identity."""
    return structural_derivative(f, T, StructuralConfig(identity(), 1.0), t, settings)


def fractal_derivative(
    f: Any, T: Any, alpha: float, t: float, settings: Optional[LimitSettings] = None
) -> DerivativeResult:
    """The fractal (Hausdorff) derivative: lambda = 1, p = t**alpha."""
    cfg = StructuralConfig(make_power_p(alpha), 1.0)
    return structural_derivative(f, T, cfg, t, settings)


def fractional_order_derivative(
    f: Any, T: Any, alpha: float, t: float, settings: Optional[LimitSettings] = None
) -> DerivativeResult:
    """The fractional order derivative: lambda = alpha, p = t**alpha."""
    if not alpha > 0:
        raise InvalidConfig(f"fractional order must be positive, got {alpha!r}")
    cfg = StructuralConfig(make_power_p(alpha), alpha)
    return structural_derivative(f, T, cfg, t, settings)


def shift_identity_check(
    f: Any,
    T: Any,
    cfg: StructuralConfig,
    t: float,
    settings: Optional[LimitSettings] = None,
) -> float:
    """Residual of ``f**lam(sigma(t)) = f**lam(t) + (p(sigma(t)) - p(t)) * D``.

    ``D`` is the structural derivative at ``t``. The residual is zero up to
    rounding at right-scattered points and exactly zero at right-dense ones.
    """
    f = as_function(f)
    T = as_timescale(T)
    result = structural_derivative(f, T, cfg, t, settings)
    s = T.sigma(t)
    lhs = f.power(s, cfg.lam)
    rhs = f.power(t, cfg.lam) + (cfg.p(s) - cfg.p(t)) * result.value
    return abs(lhs - rhs)

