"""Quadrature distributions and Wigner functions of single-mode fields.

Conventions: ``x = (a + a^dagger)/sqrt2`` and ``p = (a - a^dagger)/(i sqrt2)``.
The position wavefunction is ``psi(x) = sum_n f_n phi_n(x)`` and the
momentum wavefunction ``psi(p) = sum_n f_n (-i)^n phi_n(p)``, where
``phi_n`` are the normalised oscillator eigenfunctions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import simpson
from scipy.special import gammaln

from .fock import FieldState, FockBasisSpec, McsLabel, make_mcs, poisson_tail
from .errors import TruncationTooSmall

PI_QUARTER = math.pi ** -0.25


def hermite_phi(n: int, p) -> np.ndarray:
    """Oscillator eigenfunction ``phi_n(p)`` by the normalised three-term recurrence.

    ``phi_{k+1} = sqrt(2/(k+1)) p phi_k - sqrt(k/(k+1)) phi_{k-1}``;
    stable for ``n <= 400`` and ``|p| <= 30``.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    p = np.asarray(p, dtype=float)
    prev = np.zeros_like(p)
    cur = PI_QUARTER * np.exp(-0.5 * p * p)
    for k in range(n):
        prev, cur = cur, math.sqrt(2.0 / (k + 1)) * p * cur - math.sqrt(k / (k + 1)) * prev
    return cur


def hermite_series(coeffs: np.ndarray, x) -> np.ndarray:
    """``sum_n coeffs[n] phi_n(x)`` accumulated during the recurrence (O(len(x)) memory)."""
    x = np.asarray(x, dtype=float)
    coeffs = np.asarray(coeffs)
    prev = np.zeros_like(x)
    cur = PI_QUARTER * np.exp(-0.5 * x * x)
    total = coeffs[0] * cur
    for k in range(coeffs.size - 1):
        prev, cur = cur, math.sqrt(2.0 / (k + 1)) * x * cur - math.sqrt(k / (k + 1)) * prev
        if coeffs[k + 1] != 0:
            total = total + coeffs[k + 1] * cur
    return total


def position_wavefunction(state: FieldState, x) -> np.ndarray:
    return hermite_series(state.amps, x)


def momentum_wavefunction(state: FieldState, p) -> np.ndarray:
    phase = (-1j) ** np.arange(state.basis.dim)
    return hermite_series(state.amps * phase, p)


@dataclass(frozen=True)
class QuadratureGrid:
    x_min: float
    x_max: float
    p_min: float
    p_max: float
    n_x: int
    n_p: int

    def __post_init__(self):
        bounds = (self.x_min, self.x_max, self.p_min, self.p_max)
        if not all(math.isfinite(b) for b in bounds):
            raise ValueError("grid bounds must be finite")
        if self.x_max <= self.x_min or self.p_max <= self.p_min:
            raise ValueError("grid bounds must be increasing")
        if self.n_x < 2 or self.n_p < 2:
            raise ValueError("grids need at least two points per axis")

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_x)

    @property
    def p(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.n_p)

    @classmethod
    def auto(cls, state: FieldState, n: int = 121, pad: float = 5.0) -> "QuadratureGrid":
        """Box of ``mean +- (3 sigma + pad/sqrt2)`` on each quadrature."""
        m = quadrature_moments(state)
        hx = 3.0 * m["sx"] + pad / math.sqrt(2.0)
        hp = 3.0 * m["sp"] + pad / math.sqrt(2.0)
        return cls(m["x"] - hx, m["x"] + hx, m["p"] - hp, m["p"] + hp, n, n)

    def to_dict(self) -> dict:
        return {
            "x_min": self.x_min, "x_max": self.x_max, "n_x": self.n_x,
            "p_min": self.p_min, "p_max": self.p_max, "n_p": self.n_p,
        }


def quadrature_moments(state: FieldState) -> dict:
    """Means and standard deviations of ``x`` and ``p``."""
    f = state.amps / state.norm
    n = np.arange(f.size)
    a1 = np.sum(np.sqrt(n[1:]) * np.conj(f[:-1]) * f[1:])
    a2 = np.sum(np.sqrt(n[1:-1] * n[2:]) * np.conj(f[:-2]) * f[2:]) if f.size > 2 else 0.0
    nn = float(np.dot(n, np.abs(f) ** 2))
    x1, p1 = math.sqrt(2.0) * a1.real, math.sqrt(2.0) * a1.imag
    x2 = (2.0 * np.real(a2) + 2.0 * nn + 1.0) / 2.0
    p2 = (-2.0 * np.real(a2) + 2.0 * nn + 1.0) / 2.0
    return {
        "x": x1,
        "p": p1,
        "sx": math.sqrt(max(x2 - x1 * x1, 0.0)),
        "sp": math.sqrt(max(p2 - p1 * p1, 0.0)),
    }


@dataclass
class DistributionTable:
    """Sampled momentum distribution ``P(p)`` or Wigner function ``W(x, p)``."""

    kind: str
    p: np.ndarray
    values: np.ndarray
    x: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("momentum", "wigner"):
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if self.kind == "wigner" and self.x is None:
            raise ValueError("a Wigner table needs an x grid")

    def integrate(self) -> float:
        if self.kind == "momentum":
            return float(simpson(self.values, x=self.p))
        return float(simpson(simpson(self.values, x=self.p, axis=1), x=self.x))

    def p_marginal(self) -> np.ndarray:
        """``int W dx`` along the p grid."""
        if self.kind != "wigner":
            raise ValueError("marginals are defined for Wigner tables")
        return simpson(self.values, x=self.x, axis=0)

    def to_csv(self) -> str:
        if self.kind == "momentum":
            rows = ["p,P"] + [f"{p:.12g},{v:.12g}" for p, v in zip(self.p, self.values)]
        else:
            rows = ["x,p,W"]
            for i, x in enumerate(self.x):
                rows += [f"{x:.12g},{p:.12g},{v:.12g}" for p, v in zip(self.p, self.values[i])]
        return "\n".join(rows) + "\n"

    def meta_json(self) -> str:
        info = {"kind": self.kind, "n_p": int(self.p.size), "p_range": [float(self.p[0]), float(self.p[-1])]}
        if self.x is not None:
            info.update(n_x=int(self.x.size), x_range=[float(self.x[0]), float(self.x[-1])])
        info.update(self.meta)
        return json.dumps(info, indent=2, sort_keys=True)


def momentum_distribution(
    label: McsLabel, p_grid, basis: Optional[FockBasisSpec] = None
) -> DistributionTable:
    """``P(p, gamma) = |sum_n f_n e^{-i g(n)} (-i)^n phi_n(p)|^2`` for ``|alpha, g>``."""
    basis = basis or FockBasisSpec.for_alpha(label.alpha)
    state = make_mcs(label, basis)
    p = np.asarray(p_grid, dtype=float)
    psi = momentum_wavefunction(state, p)
    return DistributionTable(
        "momentum", p, np.abs(psi) ** 2,
        meta={"alpha": [complex(label.alpha).real, complex(label.alpha).imag], "gamma": label.gamma},
    )


def _support(state: FieldState, rel: float = 1e-9) -> tuple[float, float]:
    reach = math.sqrt(2.0 * state.basis.n_max + 1.0) + 10.0
    probe = np.linspace(-reach, reach, 4001)
    amp = np.abs(position_wavefunction(state, probe))
    keep = probe[amp > rel * amp.max()]
    return float(keep[0]), float(keep[-1])


def _simpson_weights(n: int, h: float) -> np.ndarray:
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * h / 3.0


def wigner(
    state: FieldState,
    grid: QuadratureGrid,
    y_max: Optional[float] = None,
    dy: Optional[float] = None,
) -> DistributionTable:
    """``W(x,p) = (1/pi) int psi*(x+y) psi(x-y) e^{2ipy} dy`` by composite Simpson in ``y``.

    By default ``y`` spans the half-width of the position support (at least
    8) and ``dy`` resolves both the grid's largest ``|p|`` and the fastest
    oscillation the truncated basis can carry.
    """
    if y_max is None:
        s0, s1 = _support(state)
        y_max = max(8.0, 0.5 * (s1 - s0) + 1.0)
    if dy is None:
        k_max = max(abs(grid.p_min), abs(grid.p_max)) + math.sqrt(2.0 * state.basis.n_max + 1.0)
        dy = min(0.02, 0.2 / k_max)
    n_y = 2 * math.ceil(y_max / dy) + 1
    y = np.linspace(-y_max, y_max, n_y)
    w = _simpson_weights(n_y, y[1] - y[0])
    x, p = grid.x, grid.p
    f = state.amps / state.norm
    plus = hermite_series(f, (x[:, None] + y[None, :]).ravel()).reshape(x.size, n_y)
    minus = hermite_series(f, (x[:, None] - y[None, :]).ravel()).reshape(x.size, n_y)
    kernel = np.exp(2j * y[:, None] * p[None, :]) * w[:, None]
    values = np.real((np.conj(plus) * minus) @ kernel) / math.pi
    return DistributionTable("wigner", p, values, x=x, meta={"y_max": y_max, "dy": float(y[1] - y[0])})


def distribution_overlap(first: DistributionTable, second: DistributionTable) -> float:
    """``int min(P1, P2) dp`` on a shared momentum grid."""
    if first.kind != "momentum" or second.kind != "momentum":
        raise ValueError("overlap is defined for momentum distributions")
    if not np.array_equal(first.p, second.p):
        raise ValueError("distributions must share a grid")
    return float(np.trapezoid(np.minimum(first.values, second.values), first.p))


def _poisson_weights(alpha: complex, basis: Optional[FockBasisSpec]):
    mean = abs(alpha) ** 2
    basis = basis or FockBasisSpec.for_mean(mean)
    tail = poisson_tail(mean, basis.n_max)
    if tail >= basis.tail_tol:
        raise TruncationTooSmall(f"Poisson tail {tail:.3e} beyond n_max={basis.n_max}")
    n = np.arange(basis.dim)
    if mean == 0:
        w = np.zeros(basis.dim)
        w[0] = 1.0
    else:
        w = np.exp(-mean + n * math.log(mean) - gammaln(n + 1))
    return n, w


GEA_BANACLOCHE_ESTIMATE = (1.0 + math.pi ** 2 / 16.0) ** -0.25


def gea_banacloche_overlap(alpha: float, basis: Optional[FockBasisSpec] = None) -> tuple[float, float]:
    """Overlap between the exact ``sqrt(n)`` phases and their linearisation about ``alpha^2``.

    Returns ``(exact, closed_form)`` where ``exact`` sums
    ``|e^{-a^2} sum a^{2n}/n! exp(-i pi (a sqrt(n) - n/2))|`` and
    ``closed_form`` is the Gaussian-integral value ``(1 + pi^2/16)^{-1/4}``.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    n, w = _poisson_weights(alpha, basis)
    exact = abs(np.sum(w * np.exp(-1j * math.pi * (alpha * np.sqrt(n) - n / 2.0))))
    return float(exact), GEA_BANACLOCHE_ESTIMATE


def cat_overlap(alpha: complex, gamma: float, basis: Optional[FockBasisSpec] = None) -> complex:
    """``<alpha, gamma | alpha, -gamma> = e^{-|a|^2} sum |a|^{2n}/n! e^{2 i gamma sqrt(n)}``."""
    n, w = _poisson_weights(alpha, basis)
    return complex(np.sum(w * np.exp(2j * gamma * np.sqrt(n))))

