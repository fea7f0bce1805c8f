"""Exception taxonomy shared by all momex modules.

Two families matter to callers: ValidationError (bad input, CLI exit code 2)
and NumericalError (a computation that cannot proceed at the requested
precision or order, CLI exit code 3).
"""


class MomexError(Exception):
    """Base class for all momex errors."""


class ValidationError(MomexError):
    """Input violates a documented precondition or invariant."""


class UnknownProblem(ValidationError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unknown builtin problem {name!r}")


class ParseError(ValidationError):
    """Problem file could not be parsed.

    Attributes
    ----------
    line : int
        1-based line number where parsing failed (0 if unknown).
    reason : str
    """

    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class NotNormalized(ValidationError):
    """Moment sequence passed where nu_0 = 1 is required."""


class NumericalError(MomexError):
    """A numeric stage failed; retrying at higher precision or lower order
    may succeed."""


class SingularHankel(NumericalError):
    """The Hankel system is exactly singular: the series is (at most) a sum of
    fewer exponentials than requested.

    Attributes
    ----------
    max_feasible_order : int
        Largest order with a nonsingular leading Hankel block; 0 when even the
        1x1 block vanishes.
    """

    def __init__(self, max_feasible_order):
        self.max_feasible_order = max_feasible_order
        super().__init__(
            f"singular Hankel system; max feasible order {max_feasible_order}")


class SingularMatrix(NumericalError):
    """Exactly singular linear system outside the Hankel-pencil path.

    Carries max_feasible_order like SingularHankel so callers can reduce.
    """

    def __init__(self, max_feasible_order):
        self.max_feasible_order = max_feasible_order
        super().__init__(
            f"singular matrix; max feasible order {max_feasible_order}")


class NoConvergence(NumericalError):
    """Root polishing stalled; raise the working precision.

    Attributes
    ----------
    root_index : int
        Index of the offending root in the unsorted root list.
    """

    def __init__(self, root_index):
        self.root_index = root_index
        super().__init__(f"root {root_index} did not converge; "
                         "increase working precision")


class IllConditioned(NumericalError):
    """Too few correct digits survive the solve at the current precision."""


class ZeroExponent(NumericalError):
    """A model exponent is zero where a division by it is required."""
