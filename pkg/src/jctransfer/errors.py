"""Exception and warning types shared across the package."""


class PreconditionError(Exception):
    """A numerical precondition of an operation does not hold."""


class TruncationTooSmall(PreconditionError):
    """The Fock truncation discards more probability than allowed."""


class WindowOutOfRange(PreconditionError, ValueError):
    """A top-hat window leaves the retained Fock range."""


class DegenerateState(PreconditionError):
    """The field has no pair of consecutive populated Fock levels."""


class NotResonant(PreconditionError):
    """Atomic and photon frequencies differ; the block propagator needs resonance."""


class VacuumField(PreconditionError):
    """The field carries no photons, so no attractor time exists."""


class BasisNotOrthogonal(PreconditionError):
    """The pair of cat components overlaps too strongly to decode."""


class InvalidSpec(ValueError):
    """An experiment specification is malformed."""


class ConditionViolated(UserWarning):
    """The field does not meet the conditions behind the effective dynamics."""
