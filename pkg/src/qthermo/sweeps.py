"""Parameter sweeps and figure tables.

A sweep evaluates one quantity along one parameter axis with everything else
held fixed; figures are pre-configured sweeps.  Rows come back in axis order.
"""
from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .counting import counting_fi_matrix
from .demux import hg_sensitivity, hg_sensitivity_full
from .equal_temp import qfi_equal
from .estimation import (
    individual_bound,
    inverse_mu,
    prior_gain,
    ratio_mu,
    simultaneous_bound,
)
from .gaussian_fisher import qfi_matrix
from .model import DiffractionGeometry, DomainError, SourcePair

__all__ = [
    "QUANTITIES",
    "AXES",
    "DEFAULT_PARAMS",
    "DEFAULT_CONVENTIONS",
    "SweepSpec",
    "Table",
    "evaluate_point",
    "run_sweep",
    "FIGURES",
    "figure_table",
]

QUANTITIES = ("qfi-equal", "qfi-matrix", "mu", "prior-gain", "hg-sensitivity", "counting-fi")
AXES = ("t1", "t2", "omega", "eta", "s", "d", "varpi")

DEFAULT_PARAMS = {"t1": 1.0, "t2": 1.0, "omega": 1.0, "eta": 0.5, "s": 0.5}
DEFAULT_CONVENTIONS = {
    "mu_convention": "resource",
    "beta_exponent": "negative",
    "f21_series": "gauss",
    "gamma_convention": "consistent",
}

COLUMNS = {
    "qfi-equal": ["qfi[1/T^2]", "qfi_low_t[1/T^2]", "qfi_high_t[1/T^2]"],
    "qfi-matrix": ["h11[1/T^2]", "h22[1/T^2]", "h12[1/T^2]"],
    "mu": ["mu[1]", "inv_mu[1]", "sim_bound[T^2]", "ind_bound[T^2]"],
    "prior-gain": ["f_prior[1/T^2]", "two_h11[1/T^2]", "gain[1]"],
    "hg-sensitivity": ["M[1/T^2]", "h_ii[1/T^2]", "M_over_h_ii[1]"],
    "counting-fi": ["f11[1/T^2]", "f22[1/T^2]", "f12[1/T^2]", "inv_sim_bound[1/T^2]"],
}


@dataclass
class SweepSpec:
    quantity: str
    axis: str
    start: float
    stop: float
    steps: int
    fixed: dict = field(default_factory=dict)
    conventions: dict = field(default_factory=dict)
    k_max: int | None = None
    which: int = 1
    nu: float = 1.0

    def validate(self):
        if self.quantity not in QUANTITIES:
            raise DomainError(f"unknown quantity {self.quantity!r}; choose from {QUANTITIES}")
        if self.axis not in AXES:
            raise DomainError(f"unknown axis {self.axis!r}; choose from {AXES}")
        if self.steps < 2:
            raise DomainError("steps must be >= 2")
        unknown = set(self.fixed) - set(AXES)
        if unknown:
            raise DomainError(f"unknown parameters {sorted(unknown)}")
        for key, value in self.conventions.items():
            if key not in DEFAULT_CONVENTIONS:
                raise DomainError(f"unknown convention {key!r}")
        for value in (self.start, self.stop):
            _objects({**self.params(), self.axis: value}, self.conv())

    def params(self) -> dict:
        out = dict(DEFAULT_PARAMS)
        out.update(self.fixed)
        if ("d" in self.fixed or self.axis in ("d", "varpi")) and "s" not in self.fixed:
            out.pop("s")
        return out

    def conv(self) -> dict:
        return {**DEFAULT_CONVENTIONS, **self.conventions}

    def axis_values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


def _objects(params: dict, conv: dict):
    pair = SourcePair(
        params["t1"], params["t2"], params["omega"], params["eta"], conv["gamma_convention"]
    )
    geom = DiffractionGeometry(params.get("s"), params.get("d"), params.get("varpi"))
    return pair, geom


def evaluate_point(quantity: str, params: dict, conv: dict, k_max=None, which: int = 1, nu: float = 1.0) -> list[float]:
    pair, geom = _objects(params, conv)
    s = geom.s
    if quantity == "qfi-equal":
        r = qfi_equal(pair.t1, pair.omega, pair.eta, s)
        return [r.qfi, r.qfi_low_t, r.qfi_high_t]
    if quantity == "qfi-matrix":
        h = qfi_matrix(pair, geom)
        return [h.h11, h.h22, h.h12]
    if quantity == "mu":
        h = qfi_matrix(pair, geom)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            sim = simultaneous_bound(h, nu)
        c = conv["mu_convention"]
        return [ratio_mu(h, c), inverse_mu(h, c), sim, individual_bound(h, nu)]
    if quantity == "prior-gain":
        g = prior_gain(pair.t1, pair.omega, pair.eta, s)
        return [g["f_prior"], g["two_h11"], g["gain"]]
    if quantity == "hg-sensitivity":
        if k_max is None:
            m = hg_sensitivity_full(pair, geom, which)
        else:
            m = hg_sensitivity(pair, geom, k_max, which, conv["beta_exponent"])
        h = qfi_matrix(pair, geom)
        hii = h.h11 if which == 1 else h.h22
        return [m, hii, m / hii]
    if quantity == "counting-fi":
        f = counting_fi_matrix(pair, geom, series=conv["f21_series"])
        inv_sim = max(f.det, 0.0) / (f.h11 + f.h22) / nu
        if f.det <= 1e-13 * f.h11 * f.h22:
            inv_sim = 0.0
        return [f.h11, f.h22, f.h12, inv_sim]
    raise DomainError(f"unknown quantity {quantity!r}")


class PointError(RuntimeError):
    """A numerical failure at a named parameter point."""


@dataclass
class Table:
    columns: list[str]
    rows: list[list[float]]
    meta: dict


def _eval_task(task):
    quantity, params, conv, k_max, which, nu = task
    try:
        return evaluate_point(quantity, params, conv, k_max, which, nu)
    except DomainError:
        raise
    except Exception as exc:  # reported with the point that failed
        raise PointError(f"{quantity} failed at {params}: {exc}") from exc


def _map(tasks, jobs: int):
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_eval_task, tasks))
    return [_eval_task(t) for t in tasks]


def run_sweep(spec: SweepSpec, jobs: int = 1) -> Table:
    spec.validate()
    conv = spec.conv()
    base = spec.params()
    xs = spec.axis_values()
    tasks = [
        (spec.quantity, {**base, spec.axis: float(x)}, conv, spec.k_max, spec.which, spec.nu)
        for x in xs
    ]
    results = _map(tasks, jobs)
    rows = [[float(x)] + r for x, r in zip(xs, results)]
    meta = {
        "kind": "sweep",
        "quantity": spec.quantity,
        "axis": {"name": spec.axis, "start": spec.start, "stop": spec.stop, "steps": spec.steps},
        "fixed": {k: v for k, v in base.items() if k != spec.axis},
        "conventions": conv,
        "k_max": spec.k_max,
        "which": spec.which,
        "nu": spec.nu,
        "version": __version__,
    }
    return Table([spec.axis] + COLUMNS[spec.quantity], rows, meta)


# ----------------------------------------------------------------- figures

def _s_grid(steps: int, start: float = 0.0, stop: float = 1.0) -> list[float]:
    return [float(x) for x in np.linspace(start, stop, steps)]


def _fig2(opts, jobs):
    p = {"omega": 1.0, "eta": 0.5, "t1": opts.get("t", 1.0)}
    p["t2"] = p["t1"]
    grid = _s_grid(opts.get("steps", 101))
    tasks = [("qfi-equal", {**p, "s": s}, opts["conv"], None, 1, 1.0) for s in grid]
    rows = [[s, r[0]] for s, r in zip(grid, _map(tasks, jobs))]
    return ["s", "qfi[1/T^2]"], rows, {"params": p, "caption_params": ["omega", "eta"], "artifact_defaults": ["t1"]}


def _fig3(opts, jobs):
    p = {"omega": 1.0, "eta": 0.5, "t1": opts.get("t", 1.0)}
    p["t2"] = p["t1"]
    grid = _s_grid(opts.get("steps", 101))
    tasks = [("prior-gain", {**p, "s": s}, opts["conv"], None, 1, 1.0) for s in grid]
    rows = [[s] + r for s, r in zip(grid, _map(tasks, jobs))]
    return ["s"] + COLUMNS["prior-gain"], rows, {"params": p, "caption_params": ["omega", "eta"], "artifact_defaults": ["t1"]}


def _fig4(opts, jobs):
    p = {"omega": 10.0, "eta": 0.5, "s": 0.5}
    lo, hi = opts.get("t_range", (1.0, 30.0))
    steps = opts.get("steps", 30)
    ts = _s_grid(steps, lo, hi)
    tasks, keys = [], []
    for t1 in ts:
        for t2 in ts:
            keys.append((t1, t2))
            tasks.append(("qfi-matrix", {**p, "t1": t1, "t2": t2}, opts["conv"], None, 1, 1.0))
    from .gaussian_fisher import FisherMatrix

    rows = []
    for (t1, t2), r in zip(keys, _map(tasks, jobs)):
        h = FisherMatrix(r[0], r[1], r[2])
        rows.append([t1, t2, ratio_mu(h, "resource"), ratio_mu(h, "literal")])
    meta = {"params": {**p, "t_range": [lo, hi]}, "caption_params": ["omega", "eta", "s"], "artifact_defaults": ["t_range"]}
    return ["t1", "t2", "mu_resource[1]", "mu_literal[1]"], rows, meta


def _eta_sweep(opts, jobs, quantity, pick, p, caption_params):
    etas = opts.get("etas", [0.1, 0.5, 0.9])
    grid = _s_grid(opts.get("steps", 101))
    cols = ["s"]
    values = {}
    for eta in etas:
        tasks = [(quantity, {**p, "eta": eta, "s": s}, opts["conv"], opts.get("k_max"), 1, 1.0) for s in grid]
        values[eta] = _map(tasks, jobs)
    columns = []
    for name, idx in pick:
        for eta in etas:
            columns.append((f"{name}[eta={eta:g}]", eta, idx))
    rows = [[s] + [values[eta][k][idx] for _, eta, idx in columns] for k, s in enumerate(grid)]
    cols += [c[0] for c in columns]
    meta = {"params": {**p, "etas": etas}, "caption_params": caption_params, "artifact_defaults": ["etas"]}
    return cols, rows, meta


def _fig5(opts, jobs):
    p = {"omega": 10.0, "t1": 8.0, "t2": 10.0}
    resource = dict(opts["conv"], mu_convention="resource")
    literal = dict(opts["conv"], mu_convention="literal")
    cols, rows, meta = _eta_sweep(dict(opts, conv=resource), jobs, "mu", [("inv_mu_resource", 1)], p, ["omega", "t1", "t2"])
    cols2, rows2, _ = _eta_sweep(dict(opts, conv=literal), jobs, "mu", [("inv_mu_literal", 1)], p, [])
    rows = [a + b[1:] for a, b in zip(rows, rows2)]
    return cols + cols2[1:], rows, meta


def _fig6(opts, jobs):
    p = {"omega": 10.0, "t1": 8.0, "t2": 10.0}
    return _eta_sweep(opts, jobs, "mu", [("ind_bound", 3)], p, ["omega", "t1", "t2"])


def _fig7(opts, jobs):
    p = {"omega": 1.0, "t1": 1.0, "t2": opts.get("t2", 1.0)}
    o = dict(opts)
    o.setdefault("etas", [0.1, 0.5, 1.0])
    cols, rows, meta = _eta_sweep(o, jobs, "hg-sensitivity", [("M_over_H11", 2)], p, ["omega", "t1"])
    meta["artifact_defaults"] += ["t2"]
    meta["k_max"] = opts.get("k_max")
    return cols, rows, meta


def _fig8(opts, jobs):
    p = {"omega": 1.0, "eta": 0.5}
    pairs = opts.get("pairs", [(1.0, 1.2), (1.0, 2.0), (0.5, 3.0)])
    grid = _s_grid(opts.get("steps", 51))
    cols = ["s"]
    per = []
    for t1, t2 in pairs:
        cols.append(f"inv_sim_bound[t1={t1:g},t2={t2:g}]")
        tasks = [("counting-fi", {**p, "t1": t1, "t2": t2, "s": s}, opts["conv"], None, 1, 1.0) for s in grid]
        per.append([r[3] for r in _map(tasks, jobs)])
    rows = [[s] + [col[k] for col in per] for k, s in enumerate(grid)]
    meta = {"params": {**p, "pairs": [list(x) for x in pairs]}, "caption_params": ["omega", "eta"], "artifact_defaults": ["pairs"]}
    return cols, rows, meta


FIGURES = {"fig2": _fig2, "fig3": _fig3, "fig4": _fig4, "fig5": _fig5, "fig6": _fig6, "fig7": _fig7, "fig8": _fig8}


def figure_table(name: str, opts: dict | None = None, jobs: int = 1) -> Table:
    if name not in FIGURES:
        raise DomainError(f"unknown figure {name!r}; choose from {sorted(FIGURES)}")
    opts = dict(opts or {})
    opts["conv"] = {**DEFAULT_CONVENTIONS, **opts.get("conv", {})}
    cols, rows, meta = FIGURES[name](opts, jobs)
    meta = {"kind": "figure", "figure": name, "conventions": opts["conv"], "version": __version__, **meta}
    return Table(cols, rows, meta)
