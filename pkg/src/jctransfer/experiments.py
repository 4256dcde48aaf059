"""Named reproduction experiments with deterministic CSV output.

Each experiment is a pure function of its resolved parameters.  Sweeps over
``alpha`` (or ``gamma``) can fan out to a process pool; results are always
assembled in parameter order, so output does not depend on ``workers``.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Callable, Optional

import numpy as np

from . import __version__
from .dynamics import AtomFieldState, JcParams, attractor_time, check_conditions, effective_propagate, propagate_exact
from .errors import InvalidSpec
from .fock import FieldState, FockBasisSpec, McsLabel, make_coherent, make_fock, make_mcs, make_tophat, poisson_tail, tophat_window
from .metrics import DissipationParams, dissipation_factor, fidelity_peak, loschmidt_echo, read_fidelity
from .phasespace import QuadratureGrid, cat_overlap, distribution_overlap, gea_banacloche_overlap, momentum_distribution, wigner
from .protocols import QubitState, flip_atom, read_protocol, target_write_state
from .twocavity import cat_tau, fitted_pa, fitted_pab, purity_curve, revival_width, propagate_two_cavity, make_bell_initial, purity_fields, purity_single

TWO_PI = 2.0 * math.pi

DEFAULTS: dict[str, dict[str, Any]] = {
    "mcs-distinguish": {
        "alpha": 7.0, "gamma_span": 4.0, "gamma_points": 161,
        "p_points": 241, "p_max": 0.0, "overlap_alphas": [3.0, 5.0, 7.0, 10.0],
    },
    "wigner-panel": {"alpha": 7.0, "grid_points": 121, "half_width": 0.0},
    "write-read": {
        "alphas": [3.0, 5.0, 7.0, 10.0], "lam": 1.0, "c1": 1.0, "c2": 1.0,
        "n_points": 400, "window": 2.0, "n_max": 0, "field": "coherent", "fock_n": 0,
    },
    "loschmidt": {
        "alphas": [3.0, 5.0, 7.0, 10.0], "lam": 1.0, "c1": 1.0, "c2": 1.0,
        "n_points": 400, "window": 8.0, "n_max": 0,
    },
    "tophat-table": {"n_bar": 49, "deltas": [5, 10, 20], "lam": 1.0, "c1": 1.0, "c2": 1.0, "n_max": 0},
    "entanglement": {"alphas": [3.0, 5.0, 7.0, 10.0], "lam": 1.0, "n_points": 400, "window": 2.0, "n_max": 0},
    "dissipation-table": {
        "n_bar": 25.0, "kappa_over_lambda": 1e-5,
        "fiber_kappa": 0.152, "optical_kappa": TWO_PI * 3.5, "cavity_lambda": TWO_PI * 75.0,
    },
    "gea-overlap": {"alphas": [3.0, 5.0, 7.0, 10.0, 12.0, 15.0, 20.0]},
}

EXPERIMENTS = tuple(DEFAULTS)


def _parse_scalar(raw: str, like: Any) -> Any:
    if isinstance(like, bool):
        if raw.lower() in ("1", "true", "yes"):
            return True
        if raw.lower() in ("0", "false", "no"):
            return False
        raise ValueError(raw)
    if isinstance(like, int):
        return int(raw)
    if isinstance(like, float):
        return float(raw)
    return raw


def parse_value(raw: Any, like: Any) -> Any:
    """Coerce ``raw`` (usually a string) to the type of the default ``like``."""
    if not isinstance(raw, str):
        if isinstance(like, list):
            return [_parse_scalar(str(v), like[0]) for v in raw]
        return _parse_scalar(str(raw), like)
    if isinstance(like, list):
        items = [s.strip() for s in raw.split(",") if s.strip()]
        if not items:
            raise ValueError("empty list")
        return [_parse_scalar(s, like[0]) for s in items]
    return _parse_scalar(raw.strip(), like)


@dataclass
class ExperimentSpec:
    name: str
    params: dict = field(default_factory=dict)
    out_dir: Optional[str] = None

    def resolved(self) -> dict:
        """Defaults overlaid with ``params``; unknown names or bad values raise InvalidSpec."""
        if self.name not in DEFAULTS:
            raise InvalidSpec(f"unknown experiment {self.name!r}; choose from {', '.join(EXPERIMENTS)}")
        defaults = DEFAULTS[self.name]
        unknown = sorted(set(self.params) - set(defaults))
        if unknown:
            raise InvalidSpec(f"unknown parameter(s) for {self.name}: {', '.join(unknown)}")
        out = dict(defaults)
        for key, raw in self.params.items():
            try:
                out[key] = parse_value(raw, defaults[key])
            except (TypeError, ValueError) as exc:
                raise InvalidSpec(f"bad value for {key}: {raw!r}") from exc
        return out


def _fmt(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


@dataclass
class ResultTable:
    name: str
    columns: dict
    meta: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"ragged columns in {self.name}: {lengths}")

    @property
    def n_rows(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0

    def column(self, key: str) -> np.ndarray:
        return np.asarray(self.columns[key])

    def rows(self) -> list[dict]:
        keys = list(self.columns)
        return [{k: self.columns[k][i] for k in keys} for i in range(self.n_rows)]

    def to_csv(self) -> str:
        keys = list(self.columns)
        lines = [",".join(keys)]
        for i in range(self.n_rows):
            lines.append(",".join(_fmt(self.columns[k][i]) for k in keys))
        return "\n".join(lines) + "\n"

    def write(self, out_dir: str) -> list[str]:
        os.makedirs(out_dir, exist_ok=True)
        paths = []
        path = os.path.join(out_dir, f"{self.name}.csv")
        with open(path, "w") as fh:
            fh.write(self.to_csv())
        paths.append(path)
        for key, table in self.extras.items():
            extra = os.path.join(out_dir, f"{self.name}.{key}.csv")
            with open(extra, "w") as fh:
                fh.write(table.to_csv())
            paths.append(extra)
        meta_path = os.path.join(out_dir, f"{self.name}.meta.json")
        with open(meta_path, "w") as fh:
            json.dump(self.meta, fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")
        paths.append(meta_path)
        return paths


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serialisable: {type(obj)}")


def _pool_map(fn: Callable, items: list, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _basis(alpha: float, n_max: int) -> FockBasisSpec:
    return FockBasisSpec(n_max) if n_max > 0 else FockBasisSpec.for_alpha(alpha)


def _qubit(p: dict) -> QubitState:
    return QubitState.normalized(complex(p["c1"]), complex(p["c2"]))


# ---------------------------------------------------------------- experiments


def _mcs_row(gamma: float, alpha: float, p_grid: np.ndarray, basis: FockBasisSpec) -> np.ndarray:
    return momentum_distribution(McsLabel(alpha, gamma), p_grid, basis).values


def _p_overlap(alpha: float, p_points: int) -> tuple[float, float, float]:
    basis = FockBasisSpec.for_alpha(alpha)
    p = np.linspace(-(math.sqrt(2.0) * alpha + 7.0), math.sqrt(2.0) * alpha + 7.0, max(p_points, 801))
    gamma = alpha * math.pi
    plus = momentum_distribution(McsLabel(alpha, gamma), p, basis)
    minus = momentum_distribution(McsLabel(alpha, -gamma), p, basis)
    return alpha, distribution_overlap(plus, minus), abs(cat_overlap(alpha, gamma, basis))


def run_mcs_distinguish(p: dict, workers: int = 1) -> ResultTable:
    alpha = p["alpha"]
    basis = FockBasisSpec.for_alpha(alpha)
    p_max = p["p_max"] if p["p_max"] > 0 else math.sqrt(2.0) * alpha + 6.0
    p_grid = np.linspace(-p_max, p_max, p["p_points"])
    unit = alpha * math.pi
    ratios = np.linspace(-p["gamma_span"], p["gamma_span"], p["gamma_points"])
    maps = _pool_map(partial(_mcs_row, alpha=alpha, p_grid=p_grid, basis=basis), list(ratios * unit), workers)
    cols = {"gamma_over_alpha_pi": [], "gamma": [], "p": [], "P": []}
    for r, vals in zip(ratios, maps):
        for pv, v in zip(p_grid, vals):
            cols["gamma_over_alpha_pi"].append(float(r))
            cols["gamma"].append(float(r * unit))
            cols["p"].append(float(pv))
            cols["P"].append(float(v))
    ov = _pool_map(partial(_p_overlap, p_points=p["p_points"]), list(p["overlap_alphas"]), workers)
    overlap = ResultTable(
        "mcs-distinguish.overlap",
        {"alpha": [o[0] for o in ov], "distribution_overlap": [o[1] for o in ov], "abs_cat_overlap": [o[2] for o in ov]},
    )
    return ResultTable("mcs-distinguish", cols, extras={"overlap": overlap})


def _wigner_panel_state(label: str, alpha: float, basis: FockBasisSpec) -> FieldState:
    return {
        "plus_alpha": lambda: make_coherent(alpha, basis),
        "minus_alpha": lambda: make_coherent(-alpha, basis),
        "plus_gamma": lambda: make_mcs(McsLabel(alpha, alpha * math.pi), basis),
        "minus_gamma": lambda: make_mcs(McsLabel(alpha, -alpha * math.pi), basis),
    }[label]()


def _wigner_panel_one(label: str, alpha: float, grid: QuadratureGrid) -> tuple[np.ndarray, float]:
    table = wigner(_wigner_panel_state(label, alpha, FockBasisSpec.for_alpha(alpha)), grid)
    return table.values, table.integrate()


def run_wigner_panel(p: dict, workers: int = 1) -> ResultTable:
    alpha = p["alpha"]
    h = p["half_width"] if p["half_width"] > 0 else math.sqrt(2.0) * alpha + 5.0
    n = p["grid_points"]
    grid = QuadratureGrid(-h, h, -h, h, n, n)
    labels = ["plus_alpha", "minus_alpha", "plus_gamma", "minus_gamma"]
    results = _pool_map(partial(_wigner_panel_one, alpha=alpha, grid=grid), labels, workers)
    cols = {"state": [], "x": [], "p": [], "W": []}
    for label, (values, _) in zip(labels, results):
        for i, xv in enumerate(grid.x):
            for k, pv in enumerate(grid.p):
                cols["state"].append(label)
                cols["x"].append(float(xv))
                cols["p"].append(float(pv))
                cols["W"].append(float(values[i, k]))
    norms = ResultTable("wigner-panel.norms", {"state": labels, "integral": [r[1] for r in results]})
    return ResultTable("wigner-panel", cols, meta={"grid": grid.to_dict()}, extras={"norms": norms})


def _write_read_one(alpha: float, p: dict) -> dict:
    params = JcParams(lam=p["lam"])
    basis = _basis(alpha, p["n_max"])
    if p["field"] == "coherent":
        fld = make_coherent(alpha, basis)
    elif p["field"] == "fock":
        fld = make_fock(p["fock_n"] or int(round(alpha * alpha)), basis)
    else:
        raise InvalidSpec(f"unknown field kind {p['field']!r}")
    qubit = _qubit(p)
    tau = attractor_time(fld, params)
    start = AtomFieldState.product(qubit.c1, qubit.c2, fld)
    target = target_write_state(qubit, fld, params)

    def f_w(t):
        return abs(propagate_exact(start, t, params).inner(target))

    def f_r(t):
        return read_fidelity(t, target, start, params)

    t_m, f_m = fidelity_peak(f_w, tau)
    written = propagate_exact(start, tau, params)
    recovered, _ = read_protocol(written, params, tau)
    ts = np.linspace(0.0, p["window"] * tau, p["n_points"])
    return {
        "alpha": alpha,
        "tau": tau,
        "t_m_over_tau": t_m / tau,
        "F_t_m": f_m,
        "F_W_tau": f_w(tau),
        "F_R_tau": f_r(tau),
        "echo_recovery": abs(recovered.inner(flip_atom(start))),
        "curve": [(t / tau, f_w(t), f_r(t)) for t in ts],
    }


def run_write_read(p: dict, workers: int = 1) -> ResultTable:
    res = _pool_map(partial(_write_read_one, p=p), list(p["alphas"]), workers)
    keys = ["alpha", "tau", "t_m_over_tau", "F_t_m", "F_W_tau", "F_R_tau", "echo_recovery"]
    summary = {k: [r[k] for r in res] for k in keys}
    curve = {"alpha": [], "t_over_tau": [], "F_W": [], "F_R": []}
    for r in res:
        for x, fw, fr in r["curve"]:
            curve["alpha"].append(r["alpha"])
            curve["t_over_tau"].append(x)
            curve["F_W"].append(fw)
            curve["F_R"].append(fr)
    return ResultTable("write-read", summary, extras={"curve": ResultTable("write-read.curve", curve)})


def _loschmidt_one(alpha: float, p: dict) -> dict:
    params = JcParams(lam=p["lam"])
    fld = make_coherent(alpha, _basis(alpha, p["n_max"]))
    qubit = _qubit(p)
    tau = attractor_time(fld, params)
    xs = np.linspace(0.0, p["window"], p["n_points"])
    ls = [loschmidt_echo(qubit, fld, x * tau, params) for x in xs]
    return {
        "alpha": alpha,
        "tau": tau,
        "L_tau": loschmidt_echo(qubit, fld, tau, params),
        "L_min": float(min(ls)),
        "t_min_over_tau": float(xs[int(np.argmin(ls))]),
        "curve": list(zip(xs.tolist(), ls)),
    }


def run_loschmidt(p: dict, workers: int = 1) -> ResultTable:
    res = _pool_map(partial(_loschmidt_one, p=p), list(p["alphas"]), workers)
    keys = ["alpha", "tau", "L_tau", "L_min", "t_min_over_tau"]
    summary = {k: [r[k] for r in res] for k in keys}
    curve = {"alpha": [], "t_over_tau": [], "L": []}
    for r in res:
        for x, v in r["curve"]:
            curve["alpha"].append(r["alpha"])
            curve["t_over_tau"].append(x)
            curve["L"].append(v)
    return ResultTable("loschmidt", summary, extras={"curve": ResultTable("loschmidt.curve", curve)})


def tophat_fidelity(n_bar: int, delta: int, params: JcParams, qubit: QubitState, basis: FockBasisSpec, closed: str) -> float:
    """Overlap at ``tau`` of the exact evolution with the two-branch prediction."""
    fld = make_tophat(n_bar, delta, basis, closed=closed)
    tau = attractor_time(fld, params)
    exact = propagate_exact(AtomFieldState.product(qubit.c1, qubit.c2, fld), tau, params)
    approx = effective_propagate(qubit.c1, qubit.c2, fld, 0.0, tau, params, check=False)
    return abs(exact.inner(approx))


def run_tophat_table(p: dict, workers: int = 1) -> ResultTable:
    params = JcParams(lam=p["lam"])
    qubit = _qubit(p)
    n_bar = p["n_bar"]
    deltas = list(p["deltas"])
    n_max = p["n_max"] or int(n_bar + max(deltas) + 20)
    basis = FockBasisSpec(n_max)
    cols = {k: [] for k in ("delta", "lo", "hi", "F_tau", "lo_left", "hi_left", "F_tau_left", "overlap_inverse_delta_amps")}
    for d in deltas:
        lo, hi = tophat_window(n_bar, d, "right")
        lo_l, hi_l = tophat_window(n_bar, d, "left")
        f = tophat_fidelity(n_bar, d, params, qubit, basis, "right")
        cols["delta"].append(d)
        cols["lo"].append(lo)
        cols["hi"].append(hi)
        cols["F_tau"].append(f)
        cols["lo_left"].append(lo_l)
        cols["hi_left"].append(hi_l)
        cols["F_tau_left"].append(tophat_fidelity(n_bar, d, params, qubit, basis, "left"))
        # amplitudes 1/delta instead of 1/sqrt(delta) scale both states by 1/sqrt(delta)
        cols["overlap_inverse_delta_amps"].append(f / d)
    return ResultTable("tophat-table", cols)


def _entanglement_one(alpha: float, p: dict) -> dict:
    params = JcParams(lam=p["lam"])
    basis = _basis(alpha, p["n_max"])
    xs = np.linspace(0.0, p["window"], p["n_points"])
    curve = purity_curve(alpha, xs, params, basis)
    tau = cat_tau(alpha, params)
    at_tau = propagate_two_cavity(make_bell_initial(alpha, basis), tau, params)
    pa_tau, pb_tau = purity_single(at_tau)
    t = curve.t_over_tau
    early = t <= 0.3
    rev = np.abs(t - 1.0) <= 0.5
    fit_a = np.array([fitted_pa(x * tau, alpha, params.lam) for x in t[early]])
    fit_ab = np.array([fitted_pab(x * tau, alpha, params.lam) for x in t[rev]])
    try:
        width = revival_width(t, curve.p_ab)
    except ValueError:
        width = float("nan")
    return {
        "alpha": alpha,
        "tau": tau,
        "p_ab_tau": purity_fields(at_tau),
        "p_a_tau": pa_tau,
        "p_b_tau": pb_tau,
        "revival_width": width,
        "early_pa_dev": float(np.max(np.abs(curve.p_a[early] - fit_a))),
        "revival_pab_dev": float(np.max(np.abs(curve.p_ab[rev] - fit_ab))),
        "rows": curve.rows,
    }


def run_entanglement(p: dict, workers: int = 1) -> ResultTable:
    res = _pool_map(partial(_entanglement_one, p=p), list(p["alphas"]), workers)
    keys = ["alpha", "tau", "p_ab_tau", "p_a_tau", "p_b_tau", "revival_width", "early_pa_dev", "revival_pab_dev"]
    summary = {k: [r[k] for r in res] for k in keys}
    curve = {"alpha": [], "t_over_tau": [], "p_ab": [], "p_a": [], "p_b": []}
    for r in res:
        for x, pab, pa, pb in r["rows"]:
            curve["alpha"].append(r["alpha"])
            curve["t_over_tau"].append(x)
            curve["p_ab"].append(pab)
            curve["p_a"].append(pa)
            curve["p_b"].append(pb)
    return ResultTable("entanglement", summary, extras={"curve": ResultTable("entanglement.curve", curve)})


def run_dissipation_table(p: dict, workers: int = 1) -> ResultTable:
    lam = p["cavity_lambda"]
    cases = [
        ("ratio", p["kappa_over_lambda"] * lam, lam),
        ("fiber", p["fiber_kappa"], lam),
        ("optical", p["optical_kappa"], lam),
    ]
    cols = {"case": [], "kappa": [], "lambda": [], "n_bar": [], "factor": []}
    for name, kappa, lam_c in cases:
        cols["case"].append(name)
        cols["kappa"].append(kappa)
        cols["lambda"].append(lam_c)
        cols["n_bar"].append(p["n_bar"])
        cols["factor"].append(dissipation_factor(DissipationParams(kappa, lam_c, p["n_bar"])))
    return ResultTable("dissipation-table", cols)


def run_gea_overlap(p: dict, workers: int = 1) -> ResultTable:
    cols = {"alpha": [], "exact": [], "closed_form": [], "gap": []}
    for a in p["alphas"]:
        exact, closed = gea_banacloche_overlap(a)
        cols["alpha"].append(a)
        cols["exact"].append(exact)
        cols["closed_form"].append(closed)
        cols["gap"].append(abs(exact - closed))
    return ResultTable("gea-overlap", cols)


RUNNERS: dict[str, Callable[[dict, int], ResultTable]] = {
    "mcs-distinguish": run_mcs_distinguish,
    "wigner-panel": run_wigner_panel,
    "write-read": run_write_read,
    "loschmidt": run_loschmidt,
    "tophat-table": run_tophat_table,
    "entanglement": run_entanglement,
    "dissipation-table": run_dissipation_table,
    "gea-overlap": run_gea_overlap,
}


def run(spec: ExperimentSpec, workers: int = 1) -> ResultTable:
    """Execute ``spec``; if ``spec.out_dir`` is set, write CSV and JSON sidecar there."""
    params = spec.resolved()
    start = time.perf_counter()
    table = RUNNERS[spec.name](params, workers)
    table.meta.update(
        experiment=spec.name,
        params=params,
        version=__version__,
        wall_time_s=round(time.perf_counter() - start, 3),
    )
    if spec.out_dir:
        table.write(spec.out_dir)
    return table


# ---------------------------------------------------------------- validation


def estimate_resources(spec: ExperimentSpec) -> dict:
    p = spec.resolved()
    alphas = p.get("alphas") or [p.get("alpha", 0.0)]
    if spec.name == "tophat-table":
        n_max = p["n_max"] or int(p["n_bar"] + max(p["deltas"]) + 20)
    else:
        n_max = max(p.get("n_max", 0) or FockBasisSpec.for_alpha(a).n_max for a in alphas)
    dim = n_max + 1
    if spec.name == "entanglement":
        state_bytes = 4 * dim * dim * 16
    else:
        state_bytes = 2 * dim * 16
    return {"n_max": n_max, "state_bytes": state_bytes, "grid_points": p.get("n_points", p.get("grid_points", 0))}


def validate(spec: ExperimentSpec, memory_limit: float = 2e9) -> list[str]:
    """Dry-run checks; returns human-readable warnings and never raises."""
    try:
        p = spec.resolved()
    except InvalidSpec as exc:
        return [f"InvalidSpec: {exc}"]
    warns: list[str] = []
    res = estimate_resources(spec)
    if res["state_bytes"] > memory_limit:
        warns.append(f"state needs {res['state_bytes'] / 1e9:.2f} GB")
    alphas = p.get("alphas") or ([p["alpha"]] if "alpha" in p else [])
    n_max = p.get("n_max", 0)
    if n_max and spec.name != "tophat-table":
        for a in alphas:
            tail = poisson_tail(a * a, n_max)
            if tail >= 1e-12:
                warns.append(
                    f"TruncationTooSmall: alpha={a:g} loses {tail:.2e} probability above n_max={n_max} "
                    f"(rule suggests n_max >= {FockBasisSpec.for_alpha(a).n_max})"
                )
    fields: list[tuple[str, FieldState]] = []
    if spec.name in ("write-read", "loschmidt"):
        for a in alphas:
            basis = FockBasisSpec.for_alpha(a) if not n_max else FockBasisSpec(n_max, 1.0 - 1e-15)
            if spec.name == "write-read" and p["field"] == "fock":
                k = p["fock_n"] or int(round(a * a))
                fields.append((f"fock |{k}>", make_fock(k, FockBasisSpec(max(basis.n_max, k)))))
            else:
                fields.append((f"coherent alpha={a:g}", make_coherent(a, basis)))
    elif spec.name == "tophat-table":
        basis = FockBasisSpec(res["n_max"])
        for d in p["deltas"]:
            try:
                fields.append((f"top-hat delta={d}", make_tophat(p["n_bar"], d, basis, closed="right")))
            except Exception as exc:
                warns.append(f"top-hat delta={d}: {exc}")
    for name, fld in fields:
        report = check_conditions(fld)
        for problem in report.problems():
            warns.append(f"{name}: {problem}")
    return warns
