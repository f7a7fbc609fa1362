"""Exception types shared across the toolkit.

The CLI maps these onto its exit codes: validation and format problems
exit 2, infeasible or guarded computations exit 3, OS-level I/O exits 4.
"""


class A2XError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(A2XError):
    """A value violates one of its declared invariants."""


class FormatError(A2XError):
    """A byte stream or JSON document is not a well-formed container."""


class InfeasibleError(A2XError):
    """No assignment satisfies the requested constraints."""


class GuardError(A2XError):
    """A brute-force computation exceeds its safety guard."""
