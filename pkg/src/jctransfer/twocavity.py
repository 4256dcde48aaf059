"""Two atoms in two separate cavities: entanglement transfer to the fields.

Amplitudes are stored as ``amps[atom_A, atom_B, n_a, n_b]`` with atom
index 0 = ``|g>`` and 1 = ``|e>``.  Each cell evolves with the single-cavity
block propagator; the joint Hamiltonian is never formed, and neither is
the field density matrix (purities come from Gram and reshape identities).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dynamics import CouplingSchedule, JcParams, picture_phases, rotate_blocks
from .fock import FieldState, FockBasisSpec, make_coherent


@dataclass(frozen=True)
class TwoCavityState:
    amps: np.ndarray
    basis: FockBasisSpec

    def __post_init__(self):
        arr = np.array(self.amps, dtype=complex)
        d = self.basis.dim
        if arr.shape != (2, 2, d, d):
            raise ValueError(f"expected shape (2, 2, {d}, {d}), got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "amps", arr)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def inner(self, other: "TwoCavityState") -> complex:
        return complex(np.vdot(self.amps, other.amps))

    def vector(self) -> np.ndarray:
        """Flat amplitudes in ``(A, B, n_a, n_b)`` row-major order."""
        return self.amps.ravel()

    def field_blocks(self) -> list[np.ndarray]:
        """The four field matrices ``M_k[n_a, n_b]``, one per atomic configuration."""
        return [self.amps[i, j] for i in range(2) for j in range(2)]

    def block_masses(self) -> np.ndarray:
        """Joint probability over (``N_A``, ``N_B``) excitation blocks."""
        d = self.basis.dim
        p = np.abs(self.amps) ** 2
        out = np.zeros((d + 1, d + 1))
        for i in range(2):
            for j in range(2):
                out[i : i + d, j : j + d] += p[i, j]
        return out


def product_state(
    atoms: np.ndarray, field_a: FieldState, field_b: FieldState
) -> TwoCavityState:
    """``atoms[A, B] (x) field_a (x) field_b``."""
    atoms = np.asarray(atoms, dtype=complex).reshape(2, 2)
    amps = atoms[:, :, None, None] * np.multiply.outer(field_a.amps, field_b.amps)[None, None]
    return TwoCavityState(amps, field_a.basis)


def make_bell_initial(alpha: complex, basis: FockBasisSpec) -> TwoCavityState:
    """Singlet ``(|e>_A|g>_B - |g>_A|e>_B)/sqrt2`` times ``|alpha>_a |alpha>_b``."""
    coh = make_coherent(alpha, basis)
    atoms = np.zeros((2, 2), dtype=complex)
    atoms[1, 0] = 1.0 / math.sqrt(2.0)
    atoms[0, 1] = -1.0 / math.sqrt(2.0)
    return product_state(atoms, coh, coh)


def _evolve_cell(amps: np.ndarray, cell: str, params: JcParams, t: float, theta: float) -> np.ndarray:
    # bring (atom, field) of the chosen cell to axes (-2, -1)
    order = (1, 3, 0, 2) if cell == "A" else (0, 2, 1, 3)
    x = np.transpose(amps, order)
    g, e = rotate_blocks(x[..., 0, :], x[..., 1, :], theta)
    if params.picture == "schrodinger":
        pg, pe = picture_phases(amps.shape[-1], params.omega, t)
        g, e = g * pg, e * pe
    y = np.stack([g, e], axis=-2)
    return np.transpose(y, np.argsort(order))


def propagate_two_cavity(
    state: TwoCavityState,
    t: float,
    params: JcParams,
    params_b: Optional[JcParams] = None,
    schedules: Optional[tuple[CouplingSchedule, CouplingSchedule]] = None,
) -> TwoCavityState:
    """``U_A(t) (x) U_B(t)``; ``params_b`` lets cavity B use its own coupling.

    With ``schedules`` each cavity follows its own time-dependent coupling
    and the constant ``lam`` values are ignored.
    """
    params_b = params_b or params
    params.require_resonant()
    params_b.require_resonant()
    if schedules is None:
        theta_a, theta_b = params.lam * t, params_b.lam * t
    else:
        theta_a, theta_b = (s.effective_time(t) for s in schedules)
    amps = _evolve_cell(state.amps, "A", params, t, theta_a)
    amps = _evolve_cell(amps, "B", params_b, t, theta_b)
    return TwoCavityState(amps, state.basis)


def purity_fields(state: TwoCavityState) -> float:
    """``Tr(rho_ab^2)`` after tracing out both atoms.

    With ``|phi> = sum_k |atoms_k> |v_k>``, ``Tr(rho_ab^2) = sum_jk |<v_j|v_k>|^2``.
    """
    v = np.stack([m.ravel() for m in state.field_blocks()])
    gram = v.conj() @ v.T
    return float(np.sum(np.abs(gram) ** 2) / state.norm ** 4)


def purity_single(state: TwoCavityState) -> tuple[float, float]:
    """``(Tr rho_a^2, Tr rho_b^2)`` for the individual cavity fields."""
    blocks = state.field_blocks()
    # drop photon numbers carrying no weight; they add nothing to either trace
    mass = sum(np.abs(m) ** 2 for m in blocks)
    keep_a = np.flatnonzero(mass.sum(axis=1) > 1e-40)
    keep_b = np.flatnonzero(mass.sum(axis=0) > 1e-40)
    blocks = [m[np.ix_(keep_a, keep_b)] for m in blocks]
    rho_a = sum(m @ m.conj().T for m in blocks)
    rho_b = sum(m.T @ m.conj() for m in blocks)
    z = state.norm ** 4
    return float(np.sum(np.abs(rho_a) ** 2) / z), float(np.sum(np.abs(rho_b) ** 2) / z)


@dataclass
class PurityCurve:
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def column(self, i: int) -> np.ndarray:
        return np.array([r[i] for r in self.rows])

    @property
    def t_over_tau(self) -> np.ndarray:
        return self.column(0)

    @property
    def p_ab(self) -> np.ndarray:
        return self.column(1)

    @property
    def p_a(self) -> np.ndarray:
        return self.column(2)

    @property
    def p_b(self) -> np.ndarray:
        return self.column(3)

    def to_csv(self) -> str:
        out = ["t_over_tau,p_ab,p_a,p_b"]
        out += [",".join(f"{v:.12g}" for v in row) for row in self.rows]
        return "\n".join(out) + "\n"

    def header_json(self) -> str:
        return json.dumps(self.meta, indent=2, sort_keys=True)


def cat_tau(alpha: complex, params: JcParams) -> float:
    """Time unit of the two-cavity study, ``tau = |alpha| pi / lambda``."""
    return abs(alpha) * math.pi / params.lam


def purity_curve(
    alpha: complex,
    t_grid: Sequence[float],
    params: JcParams,
    basis: Optional[FockBasisSpec] = None,
) -> PurityCurve:
    """Purities along ``t_grid`` (in units of ``tau``) from the singlet start.

    Each point is propagated from ``t = 0`` directly, so points are independent.
    """
    basis = basis or FockBasisSpec.for_alpha(alpha)
    start = make_bell_initial(alpha, basis)
    tau = cat_tau(alpha, params)
    rows = []
    for x in t_grid:
        st = propagate_two_cavity(start, float(x) * tau, params)
        pa, pb = purity_single(st)
        rows.append((float(x), purity_fields(st), pa, pb))
    return PurityCurve(rows, meta={"alpha": abs(alpha), "tau": tau, "n_max": basis.n_max})


def fitted_pa(t: float, alpha: float, lam: float) -> float:
    """Early-time fit ``0.5 exp(-lambda^2 t^2) + 0.5``."""
    return 0.5 * math.exp(-((lam * t) ** 2)) + 0.5


def fitted_pab(t: float, alpha: float, lam: float) -> float:
    """Revival fit ``0.5 sin^4(lambda t / 2 alpha) exp(-lambda^2 t^2 / 8 alpha^4) + 0.5``."""
    return 0.5 * math.sin(lam * t / (2.0 * alpha)) ** 4 * math.exp(-((lam * t) ** 2) / (8.0 * alpha ** 4)) + 0.5


def revival_width(t_over_tau: np.ndarray, p_ab: np.ndarray, baseline: float = 0.5, center: float = 1.0, half_window: float = 0.9) -> float:
    """Full width at half height of the ``p_ab`` revival around ``center``.

    Height is measured above ``baseline``; crossings are linearly interpolated.
    """
    t = np.asarray(t_over_tau, dtype=float)
    y = np.asarray(p_ab, dtype=float)
    sel = np.abs(t - center) <= half_window
    t, y = t[sel], y[sel]
    k = int(np.argmax(y))
    level = baseline + 0.5 * (y[k] - baseline)

    def crossing(idx):
        for i, j in zip(idx[:-1], idx[1:]):
            if (y[i] - level) * (y[j] - level) <= 0 and y[i] != y[j]:
                return t[i] + (level - y[i]) * (t[j] - t[i]) / (y[j] - y[i])
        raise ValueError("revival does not fall to half height inside the window")

    left = crossing(list(range(k, -1, -1)))
    right = crossing(list(range(k, t.size)))
    return float(right - left)
