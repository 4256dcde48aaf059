"""Write (atom -> field cat) and spin-echo read protocols."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dynamics import AtomFieldState, JcParams, attractor_time, picture_phases, propagate_exact
from .errors import BasisNotOrthogonal
from .fock import FieldState, estimate_phi


@dataclass(frozen=True)
class QubitState:
    """Atomic state ``c1|g> + c2|e>``."""

    c1: complex
    c2: complex

    def __post_init__(self):
        norm = abs(self.c1) ** 2 + abs(self.c2) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"qubit amplitudes not normalised (|c1|^2+|c2|^2={norm!r})")

    @classmethod
    def normalized(cls, c1: complex, c2: complex) -> "QubitState":
        r = math.sqrt(abs(c1) ** 2 + abs(c2) ** 2)
        return cls(c1 / r, c2 / r)

    def branches(self, phi: float = 0.0) -> tuple[complex, complex]:
        """Weights ``(A, B)`` on the atomic states ``(|g> +- e^{i phi}|e>)/sqrt2``."""
        r = np.exp(-1j * phi)
        return (self.c1 + r * self.c2) / math.sqrt(2.0), (self.c1 - r * self.c2) / math.sqrt(2.0)

    @classmethod
    def from_branches(cls, a: complex, b: complex, phi: float = 0.0) -> "QubitState":
        c1 = (a + b) / math.sqrt(2.0)
        c2 = np.exp(1j * phi) * (a - b) / math.sqrt(2.0)
        return cls.normalized(complex(c1), complex(c2))

    def vector(self) -> np.ndarray:
        return np.array([self.c1, self.c2], dtype=complex)

    def distance_up_to_phase(self, other: "QubitState") -> float:
        """``min_theta || self - e^{i theta} other ||``."""
        ov = np.vdot(other.vector(), self.vector())
        return float(math.sqrt(max(2.0 - 2.0 * abs(ov), 0.0)))


@dataclass
class ProtocolTrace:
    checkpoints: list = field(default_factory=list)
    fidelity_curve: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        times = [t for t, _ in self.fidelity_curve]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("fidelity curve times must be strictly increasing")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time", "fidelity"])
        for t, f in self.fidelity_curve:
            w.writerow([f"{t:.12g}", f"{f:.12g}"])
        return buf.getvalue()

    def header_json(self) -> str:
        return json.dumps(self.meta, indent=2, sort_keys=True)


def flip_atom(state: AtomFieldState) -> AtomFieldState:
    """Apply ``-sigma_z = exp(i pi (sigma_z + 1)/2)``: ``|g> -> |g>``, ``|e> -> -|e>``."""
    return AtomFieldState(state.amps_g, -state.amps_e, state.basis)


def spin_echo_sequence(state0: AtomFieldState, t: float, params: JcParams) -> AtomFieldState:
    """``(-sigma_z) U(t) (-sigma_z) U(t) |state0>``.

    ``{sigma_z, H} = 0`` makes this the identity in the interaction picture
    and ``exp(-2 i omega (N - 1/2) t)`` in the Schrodinger picture.
    """
    mid = flip_atom(propagate_exact(state0, t, params))
    return flip_atom(propagate_exact(mid, t, params))


def cat_components(field: FieldState, params: JcParams, l: int = 0) -> tuple[FieldState, FieldState]:
    """``|Phi_+^l>, |Phi_-^l>``: the field with phases ``exp(-+ i sqrt(n) lambda t_l)``."""
    t_l = attractor_time(field, params, l)
    sq = np.sqrt(np.arange(field.basis.dim))
    phase = np.exp(-1j * sq * params.lam * t_l)
    return (
        FieldState(field.amps * phase, field.basis, field.nominal_mean),
        FieldState(field.amps * np.conj(phase), field.basis, field.nominal_mean),
    )


def target_write_state(
    qubit: QubitState,
    field: FieldState,
    params: JcParams,
    l: int = 0,
    phi: Optional[float] = None,
) -> AtomFieldState:
    """Idealised state at ``t_l``:
    ``(|g> - (-1)^l i e^{i phi}|e>)/sqrt2 (x) (A|Phi_+^l> + B|Phi_-^l>)``."""
    if phi is None:
        phi, _ = estimate_phi(field)
    a_amp, b_amp = qubit.branches(phi)
    plus, minus = cat_components(field, params, l)
    cat = a_amp * plus.amps + b_amp * minus.amps
    e_coef = -((-1) ** l) * 1j * np.exp(1j * phi)
    g, e = cat / math.sqrt(2.0), e_coef * cat / math.sqrt(2.0)
    if params.picture == "schrodinger":
        pg, pe = picture_phases(field.basis.dim, params.omega, attractor_time(field, params, l))
        g, e = g * pg, e * pe
    return AtomFieldState(g, e, field.basis)


def _fidelity_curve(start: AtomFieldState, target: AtomFieldState, times, params: JcParams):
    return [(float(t), abs(propagate_exact(start, t, params).inner(target))) for t in times]


def write_protocol(
    qubit: QubitState,
    field: FieldState,
    params: JcParams,
    n_points: int = 400,
    window: float = 2.0,
) -> tuple[AtomFieldState, ProtocolTrace]:
    """Evolve ``qubit (x) field`` exactly for ``tau``.

    The trace holds the overlap with :func:`target_write_state` on
    ``n_points`` times spanning ``[0, window * tau]`` together with the
    fidelity peak ``(t_m, F(t_m))``.
    """
    from .metrics import fidelity_peak

    tau = attractor_time(field, params)
    start = AtomFieldState.product(qubit.c1, qubit.c2, field)
    target = target_write_state(qubit, field, params)
    written = propagate_exact(start, tau, params)
    curve = _fidelity_curve(start, target, np.linspace(0.0, window * tau, n_points), params)
    t_m, f_m = fidelity_peak(lambda t: abs(propagate_exact(start, t, params).inner(target)), tau)
    trace = ProtocolTrace(
        checkpoints=[("initial", 0.0, start), ("written", tau, written)],
        fidelity_curve=curve,
        meta={
            "protocol": "write",
            "c1": [qubit.c1.real, qubit.c1.imag],
            "c2": [qubit.c2.real, qubit.c2.imag],
            "lambda": params.lam,
            "n_bar": field.n_bar,
            "tau": tau,
            "t_m": t_m,
            "F_t_m": f_m,
        },
    )
    return written, trace


def read_protocol(
    written: AtomFieldState,
    params: JcParams,
    tau: float,
    original: Optional[AtomFieldState] = None,
    n_points: int = 400,
    window: float = 2.0,
) -> tuple[AtomFieldState, ProtocolTrace]:
    """Flip the atom with ``-sigma_z`` and evolve for ``tau``.

    If ``original`` (the pre-write state) is given, the trace records the
    overlap with ``-sigma_z |original>`` on a grid over ``[0, window*tau]``.
    """
    start = flip_atom(written)
    recovered = propagate_exact(start, tau, params)
    trace = ProtocolTrace(
        checkpoints=[("flipped", 0.0, start), ("recovered", tau, recovered)],
        meta={"protocol": "read", "lambda": params.lam, "tau": tau},
    )
    if original is not None:
        target = flip_atom(original)
        trace.fidelity_curve = _fidelity_curve(start, target, np.linspace(0.0, window * tau, n_points), params)
        trace.meta["F_tau"] = abs(recovered.inner(target))
    return recovered, trace


def decode_qubit(
    final: AtomFieldState,
    field_basis: tuple[FieldState, FieldState],
    phi: float = 0.0,
    l: int = 0,
    max_overlap: float = 0.05,
) -> tuple[QubitState, float]:
    """Read ``(A, B)`` off a written state and convert back to ``(c1, c2)``.

    The atom is projected on the attractor ``(|g> - (-1)^l i e^{i phi}|e>)/sqrt2``
    and the remaining field is fitted by least squares to
    ``A|Phi_+> + B|Phi_->``.  Returns the qubit and the leakage, the share
    of the state's probability the fit does not capture.
    """
    plus, minus = field_basis
    ov = abs(plus.inner(minus)) / (plus.norm * minus.norm)
    if ov >= max_overlap:
        raise BasisNotOrthogonal(f"|<Phi_+|Phi_->| = {ov:.3g} >= {max_overlap}")
    e_coef = -((-1) ** l) * 1j * np.exp(1j * phi)
    v = (final.amps_g + np.conj(e_coef) * final.amps_e) / math.sqrt(2.0)
    basis = np.stack([plus.amps, minus.amps], axis=1)
    coef, *_ = np.linalg.lstsq(basis, v, rcond=None)
    captured = float(np.linalg.norm(basis @ coef) ** 2)
    total = final.norm ** 2
    leakage = max(0.0, 1.0 - captured / total)
    a_amp, b_amp = coef / np.linalg.norm(coef)
    return QubitState.from_branches(complex(a_amp), complex(b_amp), phi), leakage
