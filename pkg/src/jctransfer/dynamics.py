"""Resonant Jaynes-Cummings dynamics of one atom and one cavity mode.

The resonant Hamiltonian ``lambda (sigma_+ a + sigma_- a^dagger)`` only
couples ``|e, n>`` with ``|g, n+1>``, so the propagator is a set of 2x2
rotations with angle ``lambda t sqrt(n+1)``.  ``|g, 0>`` is dark, and on a
truncated basis ``|e, n_max>`` has no partner and is left untouched (this
is exactly what the truncated Hamiltonian matrix does as well).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from scipy.special import erf

from .errors import ConditionViolated, DegenerateState, NotResonant, VacuumField
from .fock import FieldState, FockBasisSpec, estimate_phi

Picture = Literal["interaction", "schrodinger"]


@dataclass(frozen=True)
class JcParams:
    lam: float
    omega: float = 1.0
    omega_a: Optional[float] = None
    picture: Picture = "interaction"

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"coupling must be positive, got {self.lam}")
        if self.omega_a is None:
            object.__setattr__(self, "omega_a", self.omega)
        if self.picture not in ("interaction", "schrodinger"):
            raise ValueError(f"unknown picture {self.picture!r}")

    @property
    def resonant(self) -> bool:
        return abs(self.omega - self.omega_a) <= 1e-12 * abs(self.omega)

    def require_resonant(self) -> None:
        if not self.resonant:
            raise NotResonant(
                f"omega={self.omega!r} and omega_a={self.omega_a!r} differ; "
                "only resonant dynamics is supported"
            )


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class AtomFieldState:
    """Joint atom-field state ``|g> (x) amps_g + |e> (x) amps_e``."""

    amps_g: np.ndarray
    amps_e: np.ndarray
    basis: FockBasisSpec

    def __post_init__(self):
        g, e = _frozen(self.amps_g), _frozen(self.amps_e)
        if g.shape != (self.basis.dim,) or e.shape != (self.basis.dim,):
            raise ValueError("amplitude vectors must match the basis dimension")
        object.__setattr__(self, "amps_g", g)
        object.__setattr__(self, "amps_e", e)

    @classmethod
    def product(cls, c1: complex, c2: complex, field: FieldState) -> "AtomFieldState":
        """``(c1|g> + c2|e>) (x) field``."""
        return cls(c1 * field.amps, c2 * field.amps, field.basis)

    @classmethod
    def from_vector(cls, vec: np.ndarray, basis: FockBasisSpec) -> "AtomFieldState":
        return cls(vec[: basis.dim], vec[basis.dim :], basis)

    def vector(self) -> np.ndarray:
        """Flat amplitudes ordered ``[g_0..g_nmax, e_0..e_nmax]`` (atom index major)."""
        return np.concatenate([self.amps_g, self.amps_e])

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amps_g, self.amps_g).real + np.vdot(self.amps_e, self.amps_e).real))

    def inner(self, other: "AtomFieldState") -> complex:
        """``<self|other>``."""
        return complex(np.vdot(self.amps_g, other.amps_g) + np.vdot(self.amps_e, other.amps_e))

    def scaled(self, c: complex) -> "AtomFieldState":
        return AtomFieldState(c * self.amps_g, c * self.amps_e, self.basis)

    def block_masses(self) -> np.ndarray:
        """Probability in each excitation block ``N = 0..n_max+1``."""
        pg = np.abs(self.amps_g) ** 2
        pe = np.abs(self.amps_e) ** 2
        out = np.zeros(self.basis.dim + 1)
        out[: self.basis.dim] += pg
        out[1:] += pe
        return out

    def mean_photon(self) -> float:
        n = np.arange(self.basis.dim)
        p = np.abs(self.amps_g) ** 2 + np.abs(self.amps_e) ** 2
        return float(np.dot(n, p) / p.sum())


def rotate_blocks(g: np.ndarray, e: np.ndarray, theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Resonant propagator with accumulated coupling ``theta = int lambda dt``.

    Works on any arrays whose last axis is the Fock index, so the two-cavity
    code can reuse it along either field.
    """
    k = np.sqrt(np.arange(1, g.shape[-1]))
    c = np.cos(theta * k)
    s = np.sin(theta * k)
    g2 = np.array(g, dtype=complex, copy=True)
    e2 = np.array(e, dtype=complex, copy=True)
    e2[..., :-1] = c * e[..., :-1] - 1j * s * g[..., 1:]
    g2[..., 1:] = c * g[..., 1:] - 1j * s * e[..., :-1]
    return g2, e2


def picture_phases(dim: int, omega: float, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal factors ``exp(-i omega (N - 1/2) t)`` on ``|g,n>`` and ``|e,n>``."""
    n = np.arange(dim)
    return np.exp(-1j * omega * (n - 0.5) * t), np.exp(-1j * omega * (n + 0.5) * t)


def _evolve(state: AtomFieldState, theta: float, t: float, params: JcParams) -> AtomFieldState:
    g, e = rotate_blocks(state.amps_g, state.amps_e, theta)
    if params.picture == "schrodinger":
        pg, pe = picture_phases(state.basis.dim, params.omega, t)
        g, e = g * pg, e * pe
    return AtomFieldState(g, e, state.basis)


def propagate_exact(state: AtomFieldState, t: float, params: JcParams) -> AtomFieldState:
    """Exact resonant evolution over time ``t``; O(n_max) per call."""
    params.require_resonant()
    return _evolve(state, params.lam * t, t, params)


@dataclass(frozen=True)
class CouplingSchedule:
    """Time-dependent coupling: constant, or ``lambda0 exp(-width^2 t^2)``."""

    kind: Literal["constant", "gaussian"]
    lambda0: float
    width: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "gaussian"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "gaussian" and not self.width > 0:
            raise ValueError("gaussian schedule needs a positive width")

    def coupling(self, t):
        if self.kind == "constant":
            return self.lambda0 * np.ones_like(np.asarray(t, dtype=float))
        return self.lambda0 * np.exp(-((self.width * np.asarray(t, dtype=float)) ** 2))

    def effective_time(self, t: float) -> float:
        """Accumulated coupling ``int_0^t lambda(s) ds`` (radians)."""
        if self.kind == "constant":
            return self.lambda0 * t
        w = self.width
        return float(self.lambda0 * math.sqrt(math.pi) / (2.0 * w) * erf(w * t))

    def saturation(self) -> float:
        """``lim_{t->inf}`` of :meth:`effective_time`."""
        if self.kind == "constant":
            return math.inf
        return self.lambda0 * math.sqrt(math.pi) / (2.0 * self.width)


def propagate_scheduled(
    state: AtomFieldState,
    t: float,
    schedule: CouplingSchedule,
    params: Optional[JcParams] = None,
) -> AtomFieldState:
    """Evolve under ``lambda(t)``.

    Hamiltonians at different times are multiples of one operator, so the
    evolution is the constant-coupling one at accumulated angle
    ``int lambda dt``.  ``params`` supplies frequencies and picture; its
    ``lam`` is ignored.
    """
    if params is None:
        params = JcParams(lam=schedule.lambda0)
    params.require_resonant()
    return _evolve(state, schedule.effective_time(t), t, params)


def attractor_time(field: FieldState, params: JcParams, l: int = 0) -> float:
    """``t_l = (2l+1) tau`` with ``tau = sqrt(n_bar) pi / lambda``."""
    n_bar = field.n_bar
    if n_bar <= 0:
        raise VacuumField("attractor time needs a field with photons")
    return (2 * l + 1) * math.sqrt(n_bar) * math.pi / params.lam


@dataclass(frozen=True)
class ConditionReport:
    phi: float
    residual: float
    n_bar: float
    delta_n: float
    max_prob: float
    phase_ok: bool
    spread_ok: bool
    sparse_ok: bool

    @property
    def passed(self) -> bool:
        return self.phase_ok and self.spread_ok and self.sparse_ok

    def problems(self) -> list[str]:
        out = []
        if not self.phase_ok:
            out.append(f"nearest-neighbour phase condition fails (residual={self.residual:.3g})")
        if not self.spread_ok:
            out.append(f"spread condition n_bar >> dn >> 1 fails (n_bar={self.n_bar:.3g}, dn={self.delta_n:.3g})")
        if not self.sparse_ok:
            out.append(f"populations not small (max |f_n|^2={self.max_prob:.3g})")
        return out


def check_conditions(
    field: FieldState,
    residual_max: float = 0.05,
    ratio_min: float = 1.2,
    spread_min: float = 3.0,
    max_prob_max: float = 0.25,
) -> ConditionReport:
    """Test a field against the conditions behind the effective dynamics.

    ``delta_n`` is twice the standard deviation of the photon-number
    distribution.  Thresholds default so coherent fields with
    ``alpha >= 3`` pass.
    """
    try:
        phi, residual = estimate_phi(field)
    except DegenerateState:
        phi, residual = 0.0, math.inf
    n_bar = field.mean_photon
    delta_n = 2.0 * field.photon_std
    max_prob = float(field.probabilities.max() / field.probabilities.sum())
    spread_ok = delta_n > spread_min and n_bar > ratio_min * delta_n
    return ConditionReport(
        phi=phi,
        residual=residual,
        n_bar=n_bar,
        delta_n=delta_n,
        max_prob=max_prob,
        phase_ok=residual < residual_max,
        spread_ok=spread_ok,
        sparse_ok=max_prob < max_prob_max,
    )


def effective_propagate(
    c1: complex,
    c2: complex,
    field: FieldState,
    phi: float,
    t: float,
    params: JcParams,
    check: bool = True,
    strict: bool = False,
) -> AtomFieldState:
    """Two-branch effective evolution of ``(c1|g> + c2|e>) (x) field``.

    The atom splits into ``(|g> +- e^{i phi}|e>)/sqrt2`` with weights
    ``A, B = (c1 +- e^{-i phi} c2)/sqrt2``.  The ``+`` branch sees photon
    energies ``+lambda sqrt(n)`` and an atomic phase
    ``exp(-i lambda t / (2 sqrt(n_bar)))`` on ``|e>``; the ``-`` branch the
    conjugate.  ``n_bar`` is ``field.n_bar``.

    When ``check`` is set, a field failing :func:`check_conditions` emits a
    :class:`ConditionViolated` warning (raised instead if ``strict``); the
    evolution is returned either way.
    """
    params.require_resonant()
    if check:
        report = check_conditions(field)
        if not report.passed:
            msg = "; ".join(report.problems())
            if strict:
                raise ConditionViolated(msg)
            warnings.warn(msg, ConditionViolated, stacklevel=2)
    n_bar = field.n_bar
    if n_bar <= 0:
        raise VacuumField("effective dynamics needs a field with photons")
    theta = params.lam * t
    rot = np.exp(1j * phi)
    a_amp = (c1 + c2 / rot) / math.sqrt(2.0)
    b_amp = (c1 - c2 / rot) / math.sqrt(2.0)
    sq = np.sqrt(np.arange(field.basis.dim))
    f_plus = field.amps * np.exp(-1j * sq * theta)
    f_minus = field.amps * np.exp(1j * sq * theta)
    atom_phase = np.exp(-1j * theta / (2.0 * math.sqrt(n_bar)))
    g = (a_amp * f_plus + b_amp * f_minus) / math.sqrt(2.0)
    e = rot * (a_amp * atom_phase * f_plus - b_amp * np.conj(atom_phase) * f_minus) / math.sqrt(2.0)
    if params.picture == "schrodinger":
        pg, pe = picture_phases(field.basis.dim, params.omega, t)
        g, e = g * pg, e * pe
    return AtomFieldState(g, e, field.basis)
