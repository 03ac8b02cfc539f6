"""Time scales: nonempty closed subsets of the real line.

A :class:`TimeScale` answers membership queries and exposes the jump
operators of time-scale calculus:

* ``sigma(t) = inf{s in T : s > t}`` (``t`` itself at the maximum),
* ``rho(t) = sup{s in T : s < t}`` (``t`` itself at the minimum),
* ``mu(t) = sigma(t) - t``.

Dense limits need points of the time scale that converge to ``t``; those come
from :meth:`TimeScale.approach`.
"""
import bisect
import collections.abc
import dataclasses
import enum
import itertools
import json
import math
from abc import ABC, abstractmethod
from functools import singledispatch
from typing import Any, ClassVar, Dict, Iterator, List, Mapping, Optional, Tuple

from structural_derivative.errors import (
    EvaluationError,
    InvalidTimeScale,
    PointNotInScale,
    SideNotDense,
)
from structural_derivative.settings import Settings


class Side(str, enum.Enum):
    """Side from which an approach sequence converges to its point."""

    FROM_BELOW = "from-below"
    FROM_ABOVE = "from-above"
    TWO_SIDED = "two-sided"


class Density(str, enum.Enum):
    DENSE = "dense"
    SCATTERED = "scattered"


@dataclasses.dataclass(frozen=True)
class PointClass:
    """Classification of a point of a time scale.

    ``right`` is SCATTERED iff sigma(t) > t and ``left`` is SCATTERED iff
    rho(t) < t. At a maximum sigma(t) = t, so ``right`` reads DENSE there and
    ``is_max`` tells the two situations apart (likewise ``is_min``).
    """

    right: Density
    left: Density
    is_max: bool
    is_min: bool

    @property
    def right_scattered(self) -> bool:
        return self.right is Density.SCATTERED

    @property
    def left_scattered(self) -> bool:
        return self.left is Density.SCATTERED


class TimeScale(ABC):
    """Base class of all time-scale variants.

    Subclasses are frozen dataclasses, so instances are immutable values that
    can be shared between threads.
    """

    kind: ClassVar[str]

    @abstractmethod
    def _contains(self, x: float) -> bool:
        ...

    @abstractmethod
    def _sigma(self, t: float) -> float:
        ...

    @abstractmethod
    def _rho(self, t: float) -> float:
        ...

    @abstractmethod
    def project(self, x: float) -> float:
        """Nearest member of the time scale to ``x``; ties resolve downward."""

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        """JSON representation, inverted by :func:`as_timescale`."""

    @property
    def sup(self) -> Optional[float]:
        """The maximum, or None if the time scale is unbounded above."""
        return None

    @property
    def inf(self) -> Optional[float]:
        """The minimum, or None if the time scale has no least element."""
        return None

    def _toward(self, t: float, x: float) -> float:
        # Member of T strictly between t and x (x included), as close to x
        # as possible. Only meaningful on sides where t is dense.
        raise SideNotDense(f"{self!r} has no points accumulating at {t!r}")

    def contains(self, x: float) -> bool:
        """Membership test. Never raises."""
        try:
            x = float(x)
        except (TypeError, ValueError):
            return False
        if not math.isfinite(x):
            return False
        return self._contains(x)

    def require(self, t: float) -> float:
        """Returns ``t`` as a float, raising PointNotInScale if t is not in T."""
        if not self.contains(t):
            raise PointNotInScale(f"{t!r} is not a point of {self!r}")
        return float(t)

    def sigma(self, t: float) -> float:
        return self._sigma(self.require(t))

    def rho(self, t: float) -> float:
        return self._rho(self.require(t))

    def mu(self, t: float) -> float:
        t = self.require(t)
        return self._sigma(t) - t

    def classify(self, t: float) -> PointClass:
        t = self.require(t)
        return PointClass(
            right=Density.SCATTERED if self._sigma(t) > t else Density.DENSE,
            left=Density.SCATTERED if self._rho(t) < t else Density.DENSE,
            is_max=self.sup is not None and t == self.sup,
            is_min=self.inf is not None and t == self.inf,
        )

    def in_kappa(self, t: float) -> bool:
        """False exactly at a left-scattered maximum."""
        t = self.require(t)
        if self.sup is None or t != self.sup:
            return True
        return not self._rho(t) < t

    def dense_sides(self, t: float) -> Tuple[Side, ...]:
        """Sides from which points of the time scale accumulate at ``t``."""
        t = self.require(t)
        sides = []
        if self._sigma(t) == t and t != self.sup:
            sides.append(Side.FROM_ABOVE)
        if self._rho(t) == t and t != self.inf:
            sides.append(Side.FROM_BELOW)
        return tuple(sides)

    def approach(
        self,
        t: float,
        side: Side = Side.TWO_SIDED,
        scale: Optional[float] = None,
        ratio: float = 0.5,
    ) -> "ApproachSequence":
        """Points of the time scale converging to ``t`` from ``side``.

        The schedule is ``t +/- delta0 * ratio**k`` with
        ``delta0 = max(1, |t|) * scale``, each point pulled back into the
        time scale on the requested side of ``t``.

        Args:
            t: The point of the time scale to approach.
            side: FROM_ABOVE, FROM_BELOW or TWO_SIDED (interleaved).
            scale: Factor of the first step, defaults to
                ``Settings.approach_scale`` (1/16).
            ratio: Shrink ratio of the schedule, in (0, 1).

        Raises:
            SideNotDense: If the time scale has no points accumulating at
                ``t`` on a requested side.
        """
        available = self.dense_sides(t)
        wanted = (
            (Side.FROM_ABOVE, Side.FROM_BELOW) if side is Side.TWO_SIDED else (side,)
        )
        for s in wanted:
            if s not in available:
                raise SideNotDense(f"{t!r} is not {s.value}-dense in {self!r}")
        if not 0.0 < ratio < 1.0:
            raise ValueError(f"ratio must lie in (0, 1), got {ratio!r}")
        if scale is None:
            scale = Settings.get().approach_scale
        if not scale > 0:
            raise ValueError(f"scale must be positive, got {scale!r}")
        t = float(t)
        return ApproachSequence(
            timescale=self,
            t=t,
            side=side,
            delta0=max(1.0, abs(t)) * scale,
            ratio=ratio,
        )


@dataclasses.dataclass(frozen=True)
class ApproachSequence:
    """Re-iterable sequence of time-scale points s_k -> t, s_k != t.

    On each side the distance ``|s_k - t|`` is strictly decreasing. A
    TWO_SIDED sequence alternates above and below.
    """

    timescale: TimeScale
    t: float
    side: Side
    delta0: float
    ratio: float

    def __iter__(self) -> Iterator[float]:
        if self.side is Side.TWO_SIDED:
            pairs = zip(self._one_sided(1.0), self._one_sided(-1.0))
            return itertools.chain.from_iterable(pairs)
        sign = 1.0 if self.side is Side.FROM_ABOVE else -1.0
        return self._one_sided(sign)

    def _one_sided(self, sign: float) -> Iterator[float]:
        last_gap = math.inf
        for k in itertools.count():
            delta = self.delta0 * self.ratio**k
            target = self.t + sign * delta
            if delta == 0.0 or target == self.t:
                return
            s = self.timescale._toward(self.t, target)
            gap = abs(s - self.t)
            if 0.0 < gap < last_gap:
                last_gap = gap
                yield s

    def take(self, n: int) -> List[float]:
        return list(itertools.islice(self, n))


@dataclasses.dataclass(frozen=True)
class Reals(TimeScale):
    kind: ClassVar[str] = "reals"

    def _contains(self, x: float) -> bool:
        return True

    def _sigma(self, t: float) -> float:
        return t

    def _rho(self, t: float) -> float:
        return t

    def _toward(self, t: float, x: float) -> float:
        return x

    def project(self, x: float) -> float:
        return float(x)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind}


@dataclasses.dataclass(frozen=True)
class UniformGrid(TimeScale):
    """The lattice ``{offset + k*h : k in Z}``.

    Membership accepts points within ``Settings.lattice_tolerance`` of an
    integer index, so decimal inputs such as 0.3 on a 0.1 grid are members.
    Jump operators return the lattice value ``offset + k*h``.
    """

    kind: ClassVar[str] = "grid"

    h: float
    offset: float = 0.0

    def __post_init__(self) -> None:
        try:
            h, offset = float(self.h), float(self.offset)
        except (TypeError, ValueError) as failed_parse:
            raise InvalidTimeScale(f"Invalid grid parameters: {self!r}") from failed_parse
        if not (math.isfinite(h) and h > 0 and math.isfinite(offset)):
            raise InvalidTimeScale(f"grid step must be positive and finite: {self!r}")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "offset", offset)

    def _index(self, x: float) -> float:
        return (x - self.offset) / self.h

    def _point(self, k: int) -> float:
        return self.offset + k * self.h

    def _contains(self, x: float) -> bool:
        index = self._index(x)
        return abs(index - round(index)) <= Settings.get().lattice_tolerance

    def _sigma(self, t: float) -> float:
        return self._point(round(self._index(t)) + 1)

    def _rho(self, t: float) -> float:
        return self._point(round(self._index(t)) - 1)

    def project(self, x: float) -> float:
        return self._point(math.ceil(self._index(float(x)) - 0.5))

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "h": self.h, "offset": self.offset}


@dataclasses.dataclass(frozen=True)
class Integers(UniformGrid):
    kind: ClassVar[str] = "integers"

    h: float = dataclasses.field(default=1.0, init=False)
    offset: float = dataclasses.field(default=0.0, init=False)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind}


@dataclasses.dataclass(frozen=True)
class QuantumScale(TimeScale):
    """The quantum time scale ``{q**k : k in Z}``, optionally with 0.

    Powers of q are not exactly representable in general, so membership is
    decided on ``log_q(x)`` up to a relative ``tolerance`` (by default
    ``Settings.quantum_tolerance``).
    """

    kind: ClassVar[str] = "quantum"

    q: float
    include_zero: bool = False
    tolerance: Optional[float] = None

    def __post_init__(self) -> None:
        try:
            q = float(self.q)
        except (TypeError, ValueError) as failed_parse:
            raise InvalidTimeScale(f"Invalid quantum base: {self.q!r}") from failed_parse
        if not (math.isfinite(q) and q > 1):
            raise InvalidTimeScale(f"quantum base must be > 1, got {self.q!r}")
        if self.tolerance is not None and not self.tolerance > 0:
            raise InvalidTimeScale(f"tolerance must be positive: {self.tolerance!r}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "include_zero", bool(self.include_zero))

    @property
    def _tol(self) -> float:
        if self.tolerance is not None:
            return self.tolerance
        return Settings.get().quantum_tolerance

    def _exponent(self, x: float) -> float:
        return math.log(x) / math.log(self.q)

    def _nearest_exponent(self, x: float) -> Optional[int]:
        e = self._exponent(x)
        k = round(e)
        if abs(e - k) <= self._tol * max(1.0, abs(e)):
            return k
        return None

    def _power(self, k: int) -> float:
        try:
            return self.q**k
        except OverflowError as failed_power:
            raise EvaluationError(
                f"{self.q!r}**{k} is out of the floating point range"
            ) from failed_power

    def _contains(self, x: float) -> bool:
        if x == 0.0:
            return self.include_zero
        if x < 0.0:
            return False
        return self._nearest_exponent(x) is not None

    def _sigma(self, t: float) -> float:
        if t == 0.0:
            return 0.0
        return self._power(round(self._exponent(t)) + 1)

    def _rho(self, t: float) -> float:
        if t == 0.0:
            return 0.0
        return self._power(round(self._exponent(t)) - 1)

    def _toward(self, t: float, x: float) -> float:
        if t != 0.0 or x <= 0.0:
            return super()._toward(t, x)
        k = self._nearest_exponent(x)
        if k is None:
            k = math.floor(self._exponent(x))
        return self._power(k)

    @property
    def inf(self) -> Optional[float]:
        return 0.0 if self.include_zero else None

    def project(self, x: float) -> float:
        x = float(x)
        if x <= 0.0:
            if self.include_zero:
                return 0.0
            raise PointNotInScale(f"{x!r} has no nearest point in {self!r}")
        e = self._exponent(x)
        lower, upper = self._power(math.floor(e)), self._power(math.ceil(e))
        return lower if x - lower <= upper - x else upper

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "q": self.q,
            "include_zero": self.include_zero,
            "tolerance": self.tolerance,
        }


@dataclasses.dataclass(frozen=True)
class FiniteSet(TimeScale):
    kind: ClassVar[str] = "finite"

    points: Tuple[float, ...]

    def __post_init__(self) -> None:
        try:
            points = tuple(float(x) for x in self.points)
        except (TypeError, ValueError) as failed_parse:
            raise InvalidTimeScale(f"Invalid points: {self.points!r}") from failed_parse
        if not points:
            raise InvalidTimeScale("a finite time scale needs at least one point")
        if not all(math.isfinite(x) for x in points):
            raise InvalidTimeScale(f"points must be finite: {points!r}")
        if any(a >= b for a, b in zip(points, points[1:])):
            raise InvalidTimeScale(f"points must be strictly increasing: {points!r}")
        object.__setattr__(self, "points", points)

    def _index(self, x: float) -> Optional[int]:
        i = bisect.bisect_left(self.points, x)
        if i < len(self.points) and self.points[i] == x:
            return i
        return None

    def _contains(self, x: float) -> bool:
        return self._index(x) is not None

    def _sigma(self, t: float) -> float:
        i = self._index(t)
        assert i is not None
        return self.points[i + 1] if i + 1 < len(self.points) else t

    def _rho(self, t: float) -> float:
        i = self._index(t)
        assert i is not None
        return self.points[i - 1] if i > 0 else t

    @property
    def sup(self) -> Optional[float]:
        return self.points[-1]

    @property
    def inf(self) -> Optional[float]:
        return self.points[0]

    def project(self, x: float) -> float:
        x = float(x)
        i = bisect.bisect_left(self.points, x)
        if i == 0:
            return self.points[0]
        if i == len(self.points):
            return self.points[-1]
        lower, upper = self.points[i - 1], self.points[i]
        return lower if x - lower <= upper - x else upper

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "points": list(self.points)}


@dataclasses.dataclass(frozen=True)
class IntervalUnion(TimeScale):
    """A finite union of closed intervals.

    Overlapping or touching intervals are merged at construction, so the
    stored intervals are sorted and separated by strict gaps. Degenerate
    intervals ``[a, a]`` are isolated points.
    """

    kind: ClassVar[str] = "intervals"

    intervals: Tuple[Tuple[float, float], ...]

    def __post_init__(self) -> None:
        try:
            raw = sorted((float(a), float(b)) for a, b in self.intervals)
        except (TypeError, ValueError) as failed_parse:
            raise InvalidTimeScale(
                f"Invalid intervals: {self.intervals!r}"
            ) from failed_parse
        if not raw:
            raise InvalidTimeScale("an interval union needs at least one interval")
        merged: List[Tuple[float, float]] = []
        for a, b in raw:
            if not (math.isfinite(a) and math.isfinite(b)) or a > b:
                raise InvalidTimeScale(f"invalid interval [{a!r}, {b!r}]")
            if merged and a <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], b))
            else:
                merged.append((a, b))
        object.__setattr__(self, "intervals", tuple(merged))

    @property
    def _starts(self) -> List[float]:
        return [a for a, _ in self.intervals]

    def _component(self, x: float) -> Optional[int]:
        i = bisect.bisect_right(self._starts, x) - 1
        if i >= 0 and x <= self.intervals[i][1]:
            return i
        return None

    def _contains(self, x: float) -> bool:
        return self._component(x) is not None

    def _sigma(self, t: float) -> float:
        i = self._component(t)
        assert i is not None
        if t < self.intervals[i][1]:
            return t
        return self.intervals[i + 1][0] if i + 1 < len(self.intervals) else t

    def _rho(self, t: float) -> float:
        i = self._component(t)
        assert i is not None
        if t > self.intervals[i][0]:
            return t
        return self.intervals[i - 1][1] if i > 0 else t

    def _toward(self, t: float, x: float) -> float:
        i = self._component(t)
        assert i is not None
        a, b = self.intervals[i]
        if x > t and t < b:
            return min(x, b)
        if x < t and t > a:
            return max(x, a)
        return super()._toward(t, x)

    @property
    def sup(self) -> Optional[float]:
        return self.intervals[-1][1]

    @property
    def inf(self) -> Optional[float]:
        return self.intervals[0][0]

    def project(self, x: float) -> float:
        x = float(x)
        i = bisect.bisect_right(self._starts, x) - 1
        if i >= 0 and x <= self.intervals[i][1]:
            return x
        lower = self.intervals[i][1] if i >= 0 else None
        upper = self.intervals[i + 1][0] if i + 1 < len(self.intervals) else None
        if upper is None or (lower is not None and x - lower <= upper - x):
            assert lower is not None
            return lower
        return upper

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "intervals": [list(i) for i in self.intervals]}


def _build(kind: str, params: Mapping[str, Any]) -> TimeScale:
    try:
        if kind == Reals.kind:
            return Reals(**params)
        if kind == Integers.kind:
            return Integers(**params)
        if kind == UniformGrid.kind:
            return UniformGrid(**params)
        if kind == QuantumScale.kind:
            return QuantumScale(**params)
        if kind == FiniteSet.kind:
            return FiniteSet(**params)
        if kind == IntervalUnion.kind:
            return IntervalUnion(**params)
    except TypeError as failed_parse:
        raise InvalidTimeScale(
            f"Invalid parameters for time scale kind {kind!r}: {dict(params)!r}"
        ) from failed_parse
    raise InvalidTimeScale(f"Unknown time scale kind: {kind!r}")


def _parse_floats(text: str, count: Optional[int] = None) -> List[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as failed_parse:
        raise InvalidTimeScale(f"Invalid number list: {text!r}") from failed_parse
    if count is not None and len(values) != count:
        raise InvalidTimeScale(f"Expected {count} number(s), got {text!r}")
    return values


def parse_preset(text: str) -> TimeScale:
    """Parse a time-scale preset or a JSON object string.

    Presets: ``reals``, ``integers``, ``grid:<h>[:<offset>]``,
    ``quantum:<q>[:zero]``, ``finite:<x1>,<x2>,...``, ``interval:<a>:<b>``.
    """
    text = text.strip()
    if text.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as failed_parse:
            raise InvalidTimeScale(f"Invalid time scale JSON: {text!r}") from failed_parse
        return as_timescale(data)

    name, _, rest = text.partition(":")
    args = rest.split(":") if rest else []
    if name in (Reals.kind, Integers.kind) and not args:
        return _build(name, {})
    if name == UniformGrid.kind and 1 <= len(args) <= 2:
        values = _parse_floats(",".join(args), len(args))
        return UniformGrid(*values)
    if name == QuantumScale.kind and 1 <= len(args) <= 2:
        if len(args) == 2 and args[1] != "zero":
            raise InvalidTimeScale(f"Invalid quantum preset: {text!r}")
        (q,) = _parse_floats(args[0], 1)
        return QuantumScale(q=q, include_zero=len(args) == 2)
    if name == FiniteSet.kind and len(args) == 1:
        return FiniteSet(tuple(_parse_floats(args[0])))
    if name == "interval" and len(args) == 2:
        a, b = _parse_floats(",".join(args), 2)
        return IntervalUnion(((a, b),))
    raise InvalidTimeScale(f"Unknown time scale preset: {text!r}")


@singledispatch
def as_timescale(obj: Any) -> TimeScale:
    """Coerce a TimeScale, a preset/JSON string or a JSON mapping to a TimeScale."""
    raise TypeError("Invalid type, must be one of: TimeScale, str, or mapping")


@as_timescale.register(TimeScale)
def _timescale_identity(obj: TimeScale) -> TimeScale:
    return obj


@as_timescale.register(str)
def _timescale_from_string(obj: str) -> TimeScale:
    return parse_preset(obj)


@as_timescale.register(collections.abc.Mapping)
def timescale_from_dict(obj: Mapping[str, Any]) -> TimeScale:
    """Build a TimeScale from its JSON object ``{"kind": ..., parameters...}``."""
    params = dict(obj)
    kind = params.pop("kind", None)
    if not isinstance(kind, str):
        raise InvalidTimeScale(f"Time scale JSON needs a string 'kind': {obj!r}")
    if kind == FiniteSet.kind and "points" in params:
        params["points"] = tuple(params["points"])
    if kind == IntervalUnion.kind and "intervals" in params:
        params["intervals"] = tuple(tuple(i) for i in params["intervals"])
    return _build(kind, params)


def contains(T: TimeScale, x: float) -> bool:
    return T.contains(x)


def sigma(T: TimeScale, t: float) -> float:
    return T.sigma(t)


def rho(T: TimeScale, t: float) -> float:
    return T.rho(t)


def mu(T: TimeScale, t: float) -> float:
    return T.mu(t)


def classify(T: TimeScale, t: float) -> PointClass:
    return T.classify(t)


def in_kappa(T: TimeScale, t: float) -> bool:
    return T.in_kappa(t)


def approach(
    T: TimeScale,
    t: float,
    side: Side = Side.TWO_SIDED,
    scale: Optional[float] = None,
    ratio: float = 0.5,
) -> ApproachSequence:
    return T.approach(t, side, scale=scale, ratio=ratio)
