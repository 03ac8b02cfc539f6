from typing import Any, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from structural_derivative.errors import InvalidJobSpec
from structural_derivative.structfn import Scalar
from structural_derivative.timescale import TimeScale


def split_scalar(z: Optional[Scalar]) -> Tuple[Optional[float], Optional[float]]:
    """Real and imaginary part of a scalar, with negative zeros cleared."""
    if z is None:
        return None, None
    z = complex(z)
    return z.real + 0.0, z.imag + 0.0


def format_number(x: Any) -> str:
    """Shortest round-trip text of a number; empty for None.

    Matches the float repr ``json.dumps`` writes, so CSV and JSON output of
    the same job carry identical values.
    """
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def parse_range(text: str, timescale: TimeScale) -> List[float]:
    """Resolve a ``from:to:count`` range descriptor against a time scale.

    ``count`` evenly spaced values from ``from`` to ``to`` (both included)
    are projected onto their nearest member of the time scale, ties resolving
    downward. Repeated members are dropped, keeping first occurrences.

    Parameters
    ----------
    text: str
        The descriptor, e.g. ``0:1:11``.
    timescale: TimeScale
        Time scale the values are projected onto.

    Returns
    -------
    The resolved points, in the order of the range.
    """
    try:
        start, stop, count = text.split(":")
        values = np.linspace(float(start), float(stop), int(count))
    except ValueError as failed_parse:
        raise InvalidJobSpec(f"Invalid range descriptor: {text!r}") from failed_parse
    points: List[float] = []
    for x in values:
        t = timescale.project(float(x))
        if t not in points:
            points.append(t)
    return points


def parse_points(
    points: Union[str, Sequence[float], None], timescale: TimeScale
) -> List[float]:
    """Points of a job: a list, a comma separated string or a range descriptor.

    Every point is validated against the time scale.

    Raises
    ------
    InvalidJobSpec
        If the text does not parse.
    PointNotInScale
        If a point is not a member of the time scale.
    """
    if points is None:
        return []
    if isinstance(points, str):
        text = points.strip()
        if not text:
            return []
        if ":" in text:
            return parse_range(text, timescale)
        try:
            values: Iterable[float] = [float(x) for x in text.split(",") if x.strip()]
        except ValueError as failed_parse:
            raise InvalidJobSpec(f"Invalid point list: {points!r}") from failed_parse
    else:
        values = points
    return [timescale.require(t) for t in values]
