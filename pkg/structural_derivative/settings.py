from functools import lru_cache
import dataclasses


DEFAULT_QUANTUM_TOLERANCE = 1e-12
DEFAULT_LATTICE_TOLERANCE = 1e-9


def set_quantum_tolerance(tolerance: float) -> None:
    """Sets the relative tolerance used for QuantumScale membership
    within the process that loaded this module.

    Args:
      tolerance: Relative tolerance on log_q(x). QuantumScale instances
        that carry their own tolerance are not affected.
    """
    if not tolerance > 0:
        raise ValueError(f"tolerance must be positive, got {tolerance!r}")
    Settings.get().quantum_tolerance = tolerance


def set_lattice_tolerance(tolerance: float) -> None:
    """Sets the tolerance on the grid index used for UniformGrid membership
    within the process that loaded this module.

    Args:
      tolerance: Absolute tolerance on (x - offset) / h.
    """
    if not tolerance > 0:
        raise ValueError(f"tolerance must be positive, got {tolerance!r}")
    Settings.get().lattice_tolerance = tolerance


@dataclasses.dataclass
class Settings:
    """Process-wide numerical settings

    Values defined here are defaults. Anything passed explicitly to a
    function (a QuantumScale ``tolerance``, the ``scale`` of an approach
    sequence, the fields of a LimitSettings) takes precedence.
    """

    quantum_tolerance: float = DEFAULT_QUANTUM_TOLERANCE
    lattice_tolerance: float = DEFAULT_LATTICE_TOLERANCE
    degenerate_tolerance: float = 1e-14
    zero_tolerance: float = 1e-14
    approach_scale: float = 2.0**-4
    rule_tolerance: float = 1e-10
    separation_tolerance: float = 1e-9

    @staticmethod
    @lru_cache(maxsize=1)
    def get() -> "Settings":
        return Settings()
