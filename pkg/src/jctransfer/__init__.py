"""Simulator for resonant atom-cavity state transfer in the Jaynes-Cummings model."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BasisNotOrthogonal,
    ConditionViolated,
    DegenerateState,
    InvalidSpec,
    NotResonant,
    PreconditionError,
    TruncationTooSmall,
    VacuumField,
    WindowOutOfRange,
)
from .fock import FieldState, FockBasisSpec, McsLabel, make_coherent, make_fock, make_mcs, make_tophat  # noqa: E402
from .dynamics import AtomFieldState, JcParams, attractor_time, check_conditions, effective_propagate, propagate_exact  # noqa: E402
from .protocols import QubitState, read_protocol, spin_echo_sequence, write_protocol  # noqa: E402

__all__ = [
    "__version__",
    "AtomFieldState",
    "BasisNotOrthogonal",
    "ConditionViolated",
    "DegenerateState",
    "FieldState",
    "FockBasisSpec",
    "InvalidSpec",
    "JcParams",
    "McsLabel",
    "NotResonant",
    "PreconditionError",
    "QubitState",
    "TruncationTooSmall",
    "VacuumField",
    "WindowOutOfRange",
    "attractor_time",
    "check_conditions",
    "effective_propagate",
    "make_coherent",
    "make_fock",
    "make_mcs",
    "make_tophat",
    "propagate_exact",
    "read_protocol",
    "spin_echo_sequence",
    "write_protocol",
]
