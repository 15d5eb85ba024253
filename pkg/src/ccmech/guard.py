"""Combinatorial guard for exhaustive enumerations.

Brute-force routines (feasible-combination enumeration, equilibrium scans,
core checks) refuse instances whose evaluation count exceeds a cap. The cap
defaults to ten million evaluations and can be overridden with the
``CCF_MECH_MAX_ENUM`` environment variable.
"""

import os

from .errors import EnumerationGuardError

DEFAULT_MAX_ENUM = 10_000_000
ENV_VAR = "CCF_MECH_MAX_ENUM"


def max_enumeration() -> int:
    raw = os.environ.get(ENV_VAR)
    if raw is None:
        return DEFAULT_MAX_ENUM
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"{ENV_VAR} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ValueError(f"{ENV_VAR} must be positive, got {value}")
    return value


def check_enumeration(required: int) -> None:
    """Raise EnumerationGuardError if `required` evaluations exceed the cap."""
    limit = max_enumeration()
    if required > limit:
        raise EnumerationGuardError(required, limit)
