"""Exception types shared across the package."""


class ScenarioFormatError(ValueError):
    """A scenario file could not be parsed into the schema.

    The message is anchored to the offending field path (e.g.
    ``submissions[B].points[0].threshold``) so CLI users can fix the file.
    """


class ScenarioValidationError(ValueError):
    """A structurally well-formed scenario violates a semantic invariant."""


class NonConvergenceError(RuntimeError):
    """The fixed-point iteration exceeded its iteration budget.

    Only possible with continuous (matching) commitment functions; step-only
    scenarios terminate exactly.
    """

    def __init__(self, iterations: int, residual: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"no fixed point within {iterations} iterations "
            f"(last residual {residual:.3e})"
        )


class ClippedRegimeError(ValueError):
    """Closed-form payoffs requested outside the interior parameter regime."""


class EnumerationGuardError(RuntimeError):
    """An exhaustive enumeration would exceed the configured evaluation cap."""

    def __init__(self, required: int, limit: int):
        self.required = required
        self.limit = limit
        super().__init__(
            f"enumeration needs ~{required} evaluations, cap is {limit}; "
            f"coarsen the grid or raise CCF_MECH_MAX_ENUM"
        )
