"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: validation problems exit 2,
infeasible search spaces exit 3, series convergence failures exit 4.
"""


class RelaylinkError(Exception):
    """Base class for all toolkit errors."""


class DomainError(RelaylinkError):
    """An argument is outside the mathematical domain of an operation."""


class ValidationError(RelaylinkError):
    """A configuration or query is structurally invalid.

    ``problems`` holds one message per violated field so a caller can
    report every issue at once instead of the first one found.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class InfeasibleError(RelaylinkError):
    """The requested search space contains no feasible allocation."""


class SearchSpaceError(RelaylinkError):
    """The search space is too large for exhaustive enumeration."""


class ConvergenceError(RelaylinkError):
    """A series failed to converge within its term budget.

    Carries the partial sum and the number of terms consumed so the
    caller can decide whether the partial value is still usable.
    """

    def __init__(self, message, partial_value, terms_used):
        self.partial_value = partial_value
        self.terms_used = terms_used
        super().__init__(
            f"{message} (partial value {partial_value!r} after {terms_used} terms)"
        )
