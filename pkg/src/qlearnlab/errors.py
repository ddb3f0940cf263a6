"""Exception hierarchy shared by every module.

Precondition failures subclass ``ValueError`` so plain ``except ValueError``
keeps working for callers that do not care about the finer split.
"""


class LabError(Exception):
    """Base class for all library errors."""


class PreconditionError(LabError, ValueError):
    """An argument violates the documented precondition of an operation."""


class SizeLimitError(PreconditionError):
    """Input exceeds an enumeration or search cap."""


class DomainError(PreconditionError):
    """Operation is not defined for this label alphabet (e.g. VCdim with k != 2)."""


class InvalidCertificateError(PreconditionError):
    """A supplied tree or set does not pass its shattering verifier."""


class ProtocolViolation(PreconditionError):
    """An online adversary broke the rules of the protocol (e.g. realizability)."""


class InvariantError(LabError, RuntimeError):
    """An internal invariant failed. Indicates a bug, never bad input."""


class CircuitFaultError(InvariantError):
    """Residual ancilla amplitude or invalid basis pattern after a circuit."""


class ConfigError(LabError):
    """Malformed experiment configuration or input file."""
