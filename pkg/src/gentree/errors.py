"""Exception hierarchy. The CLI maps these onto exit codes."""


class GentreeError(Exception):
    """Base class for all package errors."""


class DomainError(GentreeError, ValueError):
    """Invalid input: bad permutation, label, pattern, family or size."""


class ConsistencyError(DomainError):
    """A label or jump sequence does not follow the succession rule."""

    def __init__(self, msg, index=None):
        super().__init__(msg if index is None else f"{msg} (index {index})")
        self.index = index


class MembershipError(DomainError):
    """A permutation is not in the requested family."""


class FeasibilityError(DomainError):
    """No walk of the requested length satisfies the endpoint condition."""


class SolverError(DomainError):
    """The tilting equation could not be solved on the search interval."""


class SListError(DomainError):
    """Malformed S-list or a jump outside the tracked positions."""


class ConfigError(DomainError):
    """An under-powered or contradictory run configuration."""


class ResourceError(GentreeError):
    """A size cap or attempt budget was exceeded."""
