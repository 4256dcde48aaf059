"""Figures of merit for the transfer protocols."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .dynamics import AtomFieldState, JcParams, effective_propagate, propagate_exact
from .fock import FieldState, estimate_phi
from .protocols import QubitState, flip_atom, target_write_state


def write_fidelity(t: float, qubit: QubitState, field: FieldState, params: JcParams) -> float:
    """``|<phi(0)| e^{iHt} |phi_W>|`` with ``phi_W`` the idealised written state."""
    start = AtomFieldState.product(qubit.c1, qubit.c2, field)
    target = target_write_state(qubit, field, params)
    return abs(propagate_exact(start, t, params).inner(target))


def read_fidelity(t: float, written: AtomFieldState, original: AtomFieldState, params: JcParams) -> float:
    """``|<psi(0)| e^{iHt} |psi_R>|`` with ``psi(0) = -sigma_z|written>`` and
    ``psi_R = -sigma_z|original>``."""
    start = flip_atom(written)
    target = flip_atom(original)
    return abs(propagate_exact(start, t, params).inner(target))


def fidelity_peak(
    fidelity: Callable[[float], float],
    tau: float,
    lo: float = 0.8,
    hi: float = 1.2,
    step: float = 1e-3,
) -> tuple[float, float]:
    """Locate the maximum of ``fidelity`` on ``[lo*tau, hi*tau]``.

    A grid of spacing ``step*tau`` brackets the maximum, then golden-section
    search refines it inside the neighbouring grid cells.
    """
    n = int(round((hi - lo) / step)) + 1
    ts = np.linspace(lo * tau, hi * tau, n)
    vals = np.array([fidelity(t) for t in ts])
    i = int(np.argmax(vals))
    if i == 0 or i == n - 1:
        return float(ts[i]), float(vals[i])
    res = minimize_scalar(
        lambda t: -fidelity(t),
        bracket=(ts[i - 1], ts[i], ts[i + 1]),
        method="golden",
        options={"xtol": 1e-10},
    )
    if -res.fun >= vals[i]:
        return float(res.x), float(-res.fun)
    return float(ts[i]), float(vals[i])


def loschmidt_echo(qubit: QubitState, field: FieldState, t: float, params: JcParams) -> float:
    """``|<psi0| e^{iHt} e^{-i H_1 t} |psi0>|`` for ``psi0 = qubit (x) field``.

    The effective evolution is the closed-form two-branch one of
    :func:`jctransfer.dynamics.effective_propagate`.
    """
    phi, _ = estimate_phi(field)
    start = AtomFieldState.product(qubit.c1, qubit.c2, field)
    exact = propagate_exact(start, t, params)
    approx = effective_propagate(qubit.c1, qubit.c2, field, phi, t, params, check=False)
    return abs(exact.inner(approx))


@dataclass(frozen=True)
class DissipationParams:
    kappa: float
    lam: float
    n_bar: float

    def __post_init__(self):
        if self.kappa < 0 or not self.lam > 0 or self.n_bar < 0:
            raise ValueError("need kappa >= 0, lambda > 0, n_bar >= 0")


def dissipation_factor(p: DissipationParams) -> float:
    """Cavity-loss factor at the revival ``t_R = 2 tau``:
    ``exp(-4 pi kappa n_bar^{3/2} / lambda)``.  Only ``kappa/lambda`` matters."""
    return math.exp(-4.0 * math.pi * p.kappa * p.n_bar ** 1.5 / p.lam)
