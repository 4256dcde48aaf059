"""Single-mode field states on a truncated Fock basis.

Amplitudes are stored as complex numpy vectors ``f[0..n_max]``.  Coherent
and modified coherent amplitudes come from a log-domain ratio recurrence,
so no factorial is ever formed and ``|alpha|`` of a few tens is safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional, Sequence, TextIO, Union

import numpy as np
from scipy.stats import poisson

from .errors import DegenerateState, TruncationTooSmall, WindowOutOfRange

GKind = Literal["zero", "sqrt", "custom"]


def poisson_tail(mean: float, n_max: int) -> float:
    """Probability mass of a Poisson(mean) distribution above ``n_max``."""
    if mean <= 0.0:
        return 0.0
    return float(poisson.sf(n_max, mean))


@dataclass(frozen=True)
class FockBasisSpec:
    n_max: int
    tail_tol: float = 1e-12

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 0:
            raise ValueError(f"n_max must be a non-negative integer, got {self.n_max}")
        if not 0.0 < self.tail_tol < 1.0:
            raise ValueError(f"tail_tol must lie in (0, 1), got {self.tail_tol}")
        object.__setattr__(self, "n_max", int(self.n_max))

    @property
    def dim(self) -> int:
        return self.n_max + 1

    @classmethod
    def for_mean(cls, n_bar: float, tail_tol: float = 1e-12) -> "FockBasisSpec":
        """Default truncation ``ceil(n_bar + 12 sqrt(n_bar))``, grown until
        the Poisson tail beyond it is below ``tail_tol``."""
        n_max = max(1, math.ceil(n_bar + 12.0 * math.sqrt(max(n_bar, 0.0))))
        while poisson_tail(n_bar, n_max) >= tail_tol:
            n_max += 1
        return cls(n_max, tail_tol)

    @classmethod
    def for_alpha(cls, alpha: complex, tail_tol: float = 1e-12) -> "FockBasisSpec":
        return cls.for_mean(abs(alpha) ** 2, tail_tol)


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FieldState:
    """Field amplitudes ``f_n`` on a truncated Fock basis.

    ``nominal_mean`` records the photon number the state was designed
    around (``|alpha|^2`` for coherent states, the window centre for
    top-hats).  Time scales such as the attractor time use it when set.
    """

    amps: np.ndarray
    basis: FockBasisSpec
    nominal_mean: Optional[float] = None

    def __post_init__(self):
        amps = _frozen(self.amps)
        if amps.ndim != 1 or amps.shape[0] != self.basis.dim:
            raise ValueError(
                f"expected {self.basis.dim} amplitudes, got shape {amps.shape}"
            )
        object.__setattr__(self, "amps", amps)

    @property
    def n_max(self) -> int:
        return self.basis.n_max

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    @property
    def mean_photon(self) -> float:
        p = self.probabilities
        return float(np.dot(np.arange(self.basis.dim), p) / p.sum())

    @property
    def photon_std(self) -> float:
        p = self.probabilities
        p = p / p.sum()
        n = np.arange(self.basis.dim)
        mean = np.dot(n, p)
        return float(math.sqrt(max(np.dot((n - mean) ** 2, p), 0.0)))

    @property
    def n_bar(self) -> float:
        """Nominal mean photon number if one was recorded, else the measured one."""
        if self.nominal_mean is not None:
            return float(self.nominal_mean)
        return self.mean_photon

    def inner(self, other: "FieldState") -> complex:
        """``<self|other>``."""
        return complex(np.vdot(self.amps, other.amps))

    def normalized(self) -> "FieldState":
        return FieldState(self.amps / self.norm, self.basis, self.nominal_mean)

    def to_csv(self, target: Union[str, TextIO]) -> None:
        """Write ``n,re,im`` rows."""
        lines = ["n,re,im"]
        lines += [f"{n},{a.real:.12g},{a.imag:.12g}" for n, a in enumerate(self.amps)]
        text = "\n".join(lines) + "\n"
        if isinstance(target, str):
            with open(target, "w") as fh:
                fh.write(text)
        else:
            target.write(text)


@dataclass(frozen=True)
class McsLabel:
    """Label of a modified coherent state ``|alpha, g>``.

    ``g_kind`` selects ``g(n) = 0``, ``g(n) = gamma*sqrt(n)`` or a custom
    table ``g(n) = table[n]``; every choice has ``g(0) = 0``.
    """

    alpha: complex
    gamma: float = 0.0
    g_kind: GKind = "sqrt"
    table: Optional[Sequence[float]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.g_kind not in ("zero", "sqrt", "custom"):
            raise ValueError(f"unknown g_kind {self.g_kind!r}")
        if self.g_kind == "custom":
            if self.table is None or len(self.table) == 0:
                raise ValueError("custom g_kind needs a table")
            if self.table[0] != 0.0:
                raise ValueError("custom g table must satisfy g(0) = 0")

    def g(self, n: np.ndarray) -> np.ndarray:
        return phase_function(self.g_kind, self.gamma, self.table)(n)


def phase_function(
    g_kind: GKind, gamma: float = 0.0, table: Optional[Sequence[float]] = None
) -> Callable[[np.ndarray], np.ndarray]:
    """Return ``g`` as a vectorised callable over Fock indices."""
    if g_kind == "zero":
        return lambda n: np.zeros(np.shape(n))
    if g_kind == "sqrt":
        return lambda n: gamma * np.sqrt(np.asarray(n, dtype=float))
    if g_kind == "custom":
        if table is None:
            raise ValueError("custom g_kind needs a table")
        tab = np.asarray(table, dtype=float)
        if tab[0] != 0.0:
            raise ValueError("custom g table must satisfy g(0) = 0")

        def g(n):
            n = np.asarray(n)
            if np.any(n >= tab.size):
                raise ValueError(f"custom g table has {tab.size} entries, index {n.max()} requested")
            return tab[n]

        return g
    raise ValueError(f"unknown g_kind {g_kind!r}")


def _check_tail(alpha: complex, basis: FockBasisSpec) -> None:
    tail = poisson_tail(abs(alpha) ** 2, basis.n_max)
    if tail >= basis.tail_tol:
        raise TruncationTooSmall(
            f"|alpha|={abs(alpha):.6g}: Poisson tail {tail:.3e} above n_max={basis.n_max} "
            f"exceeds tail_tol={basis.tail_tol:.1e}"
        )


def coherent_amplitudes(alpha: complex, n_max: int) -> np.ndarray:
    """Untruncated-normalisation coherent amplitudes for ``n = 0..n_max``.

    Uses ``log|f_n| = log|f_{n-1}| + log|alpha| - log(n)/2``.
    """
    out = np.zeros(n_max + 1, dtype=complex)
    r = abs(alpha)
    if r == 0.0:
        out[0] = 1.0
        return out
    n = np.arange(1, n_max + 1)
    steps = math.log(r) - 0.5 * np.log(n)
    logmag = np.concatenate(([-0.5 * r * r], -0.5 * r * r + np.cumsum(steps)))
    theta = np.angle(alpha)
    out[:] = np.exp(logmag) * np.exp(1j * theta * np.arange(n_max + 1))
    return out


def make_coherent(alpha: complex, basis: FockBasisSpec) -> FieldState:
    _check_tail(alpha, basis)
    amps = coherent_amplitudes(alpha, basis.n_max)
    amps /= np.linalg.norm(amps)
    return FieldState(amps, basis, nominal_mean=abs(alpha) ** 2)


def make_mcs(label: McsLabel, basis: FockBasisSpec) -> FieldState:
    """``|alpha, g>``: coherent amplitudes times ``exp(-i g(n))``."""
    base = make_coherent(label.alpha, basis)
    g = label.g(np.arange(basis.dim))
    if not np.any(g):
        return base
    return FieldState(base.amps * np.exp(-1j * g), basis, base.nominal_mean)


def tophat_window(n_bar: int, delta: int, closed: str = "left") -> tuple[int, int]:
    """Inclusive index bounds of the top-hat window.

    ``closed="left"`` is ``n_bar - delta/2 <= n < n_bar + delta/2``;
    ``closed="right"`` is ``n_bar - delta/2 < n <= n_bar + delta/2``.
    Both hold exactly ``delta`` levels for integer ``n_bar``.
    """
    half = delta / 2.0
    if closed == "left":
        lo = math.ceil(n_bar - half)
        hi = math.ceil(n_bar + half) - 1
    elif closed == "right":
        lo = math.floor(n_bar - half) + 1
        hi = math.floor(n_bar + half)
    else:
        raise ValueError(f"closed must be 'left' or 'right', got {closed!r}")
    return lo, hi


def make_tophat(
    n_bar: int, delta: int, basis: FockBasisSpec, closed: str = "left"
) -> FieldState:
    """Flat distribution ``1/sqrt(delta)`` over a window of ``delta`` levels."""
    if delta < 1:
        raise ValueError(f"delta must be positive, got {delta}")
    lo, hi = tophat_window(n_bar, delta, closed)
    if lo < 0 or hi > basis.n_max:
        raise WindowOutOfRange(
            f"window [{lo}, {hi}] leaves the retained range [0, {basis.n_max}]"
        )
    amps = np.zeros(basis.dim, dtype=complex)
    amps[lo : hi + 1] = 1.0 / math.sqrt(hi - lo + 1)
    return FieldState(amps, basis, nominal_mean=float(n_bar))


def make_fock(n: int, basis: FockBasisSpec) -> FieldState:
    if not 0 <= n <= basis.n_max:
        raise WindowOutOfRange(f"|{n}> outside [0, {basis.n_max}]")
    amps = np.zeros(basis.dim, dtype=complex)
    amps[n] = 1.0
    return FieldState(amps, basis)


def apply_annihilation(state: FieldState) -> FieldState:
    f = state.amps
    out = np.zeros_like(f)
    out[:-1] = np.sqrt(np.arange(1, f.size)) * f[1:]
    return FieldState(out, state.basis)


def apply_creation(state: FieldState) -> tuple[FieldState, float]:
    """Apply ``a^dagger``; also return the squared amplitude pushed past ``n_max``."""
    f = state.amps
    out = np.zeros_like(f)
    out[1:] = np.sqrt(np.arange(1, f.size)) * f[:-1]
    lost = float(abs(math.sqrt(f.size) * f[-1]) ** 2)
    return FieldState(out, state.basis), lost


def apply_number(state: FieldState) -> FieldState:
    return FieldState(np.arange(state.basis.dim) * state.amps, state.basis)


def apply_modified_annihilation(
    state: FieldState,
    g_kind: GKind = "sqrt",
    gamma: float = 0.0,
    table: Optional[Sequence[float]] = None,
) -> FieldState:
    """Deformed annihilator ``b|n> = exp(i[g(n) - g(n-1)]) sqrt(n) |n-1>``.

    With this phase convention ``|alpha, g>`` is the eigenstate of ``b``
    with eigenvalue ``alpha``, and ``[b, b^dagger] = 1``.
    """
    g = phase_function(g_kind, gamma, table)(np.arange(state.basis.dim))
    f = state.amps
    out = np.zeros_like(f)
    m = np.arange(f.size - 1)
    out[:-1] = np.exp(1j * (g[m + 1] - g[m])) * np.sqrt(m + 1) * f[1:]
    return FieldState(out, state.basis)


def estimate_phi(state: FieldState) -> tuple[float, float]:
    """Common nearest-neighbour phase ``phi`` with ``f_n ~ e^{i phi} f_{n-1}``.

    ``phi`` is the circular mean of ``arg(f_n / f_{n-1})`` weighted by
    ``|f_n|^2`` over pairs where both levels are populated.  The residual
    is the ``|f_n|^2``-weighted mean of ``|f_n - e^{i phi} f_{n-1}|^2``.
    """
    f = state.amps
    both = (f[1:] != 0) & (f[:-1] != 0)
    if not np.any(both):
        raise DegenerateState("need at least two consecutive populated Fock levels")
    ratio = f[1:][both] / f[:-1][both]
    w = np.abs(f[1:][both]) ** 2
    phi = float(np.angle(np.sum(w * ratio / np.abs(ratio))))
    w_all = np.abs(f[1:]) ** 2
    dev = np.abs(f[1:] - np.exp(1j * phi) * f[:-1]) ** 2
    residual = float(np.sum(w_all * dev) / np.sum(w_all))
    return phi, residual
