"""Parameter sweeps, figure presets and row serialization used by the CLI."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, TextIO

import numpy as np

from .observables import SensitivityCurve
from .optimizer import NoFeasiblePointError, optimize_dpso_t
from .params import MODES, DegenerateStateError, InterferometerParams
from .qfi import DegenerateLimitsError, limits, qfi_ideal, qfi_lossy

__all__ = [
    "QUANTITIES",
    "SWEEP_VARS",
    "FIGURES",
    "SweepSpec",
    "columns_for",
    "evaluate_row",
    "run_sweep",
    "figure_spec",
    "write_rows",
]

QUANTITIES = ("sensitivity", "qfi", "qfi_lossy", "limits")
SWEEP_VARS = ("phi", "alpha", "g", "T", "eta", "t")
PARAM_COLUMNS = ["point", "mode", "m", "g", "alpha", "s", "t", "T", "phi", "eta", "t_optimized"]
QUANTITY_COLUMNS = {
    "sensitivity": ["delta_phi"],
    "qfi": ["F"],
    "qfi_lossy": ["F_L"],
    "limits": ["delta_phi", "F", "F_L", "N", "qcrb", "sql", "hl", "v"],
}
# Which t-objective a D-PSO row optimizes for each quantity.
_T_OBJECTIVE = {"sensitivity": "sensitivity", "limits": "sensitivity", "qfi": "qfi", "qfi_lossy": "qfi_lossy"}


def columns_for(quantity: str) -> list[str]:
    return PARAM_COLUMNS + QUANTITY_COLUMNS[quantity] + ["status"]


@dataclass(frozen=True)
class SweepSpec:
    """One swept variable over ``linspace(lo, hi, n)`` for each mode and order.

    ``fixed`` names the parameters the user set explicitly; the swept
    variable may not be among them.  ``pin_t`` freezes the D-PSO weight
    instead of re-optimizing it at every point.
    """

    variable: str
    lo: float
    hi: float
    n: int
    base: InterferometerParams
    modes: tuple[str, ...] = ("standard", "mode_a", "mode_b", "dpso")
    ms: tuple[int, ...] = (1, 2, 3)
    quantity: str = "sensitivity"
    v: int = 1
    pin_t: float | None = None
    fixed: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.variable not in SWEEP_VARS:
            raise ValueError(f"cannot sweep {self.variable!r}; choose from {SWEEP_VARS}")
        if self.n < 2:
            raise ValueError("a sweep needs n >= 2 points")
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got {self.lo} >= {self.hi}")
        if self.variable in self.fixed:
            raise ValueError(f"{self.variable} is both swept and fixed")
        if self.quantity not in QUANTITIES:
            raise ValueError(f"unknown quantity {self.quantity!r}; choose from {QUANTITIES}")
        for mode in self.modes:
            if mode not in MODES:
                raise ValueError(f"unknown mode {mode!r}")
        if self.pin_t is not None and not 0 <= self.pin_t <= 1:
            raise ValueError("pin_t must lie in [0, 1]")

    def points(self) -> list[float]:
        return np.linspace(self.lo, self.hi, self.n).tolist()

    def params_at(self, x: float) -> InterferometerParams:
        if self.variable == "t":
            return self.base.replace(s=1.0 - x, t=x)
        return self.base.replace(**{self.variable: x})


def _mode_params(base: InterferometerParams, mode: str | None, m: int) -> InterferometerParams:
    p = base.replace(m=m)
    return p if mode is None else p.for_mode(mode)


def evaluate_row(params: InterferometerParams, mode: str | None, quantity: str, v: int = 1,
                 pin_t: float | None = None, optimize: bool = True) -> dict:
    """Closed-form values for one (parameter point, mode) pair.

    ``mode=None`` keeps the weights in ``params``.  D-PSO rows optimize ``t``
    unless ``pin_t`` is given or ``optimize`` is off.  Degenerate points come
    back with NaN values and ``status='degenerate'``.
    """
    p = params if mode is None else params.for_mode(mode)
    optimized = False
    if mode == "dpso":
        if pin_t is not None:
            p = p.replace(s=1.0 - pin_t, t=pin_t)
        elif optimize:
            try:
                res = optimize_dpso_t(p, _T_OBJECTIVE[quantity])
            except NoFeasiblePointError:
                res = None  # every t diverges; the row below reports the marker
            if res is not None:
                p = p.replace(s=1.0 - res.argmin, t=res.argmin)
                optimized = True
    row = {
        "mode": mode or "custom", "m": p.m, "g": p.g, "alpha": complex(p.alpha).real, "s": p.s, "t": p.t,
        "T": p.T, "phi": p.phi, "eta": p.eta, "t_optimized": optimized,
    }
    try:
        if quantity == "sensitivity":
            row["delta_phi"] = SensitivityCurve(p).delta_phi(p.phi)
        elif quantity == "qfi":
            row["F"] = qfi_ideal(p)
        elif quantity == "qfi_lossy":
            row["F_L"] = qfi_lossy(p)
        else:
            rep = limits(p, v)
            row.update(delta_phi=SensitivityCurve(p).delta_phi(p.phi), F=rep.F_ideal, F_L=rep.F_lossy,
                       N=rep.N_total, qcrb=rep.qcrb, sql=rep.sql, hl=rep.hl, v=rep.v)
        row["status"] = "ok"
    except (DegenerateStateError, DegenerateLimitsError):
        for col in QUANTITY_COLUMNS[quantity]:
            row[col] = v if col == "v" else math.nan
        row["status"] = "degenerate"
    return row


def _point_rows(args) -> list[dict]:
    spec, index, x = args
    p = spec.params_at(x)
    rows = []
    for mode in spec.modes:
        ms = (0,) if mode == "standard" else spec.ms
        for m in ms:
            row = evaluate_row(_mode_params(p, None, m), mode, spec.quantity, spec.v, spec.pin_t,
                               optimize=spec.variable != "t")
            row["point"] = index
            rows.append(row)
    return rows


def run_sweep(spec: SweepSpec, jobs: int = 1) -> Iterator[dict]:
    """Rows in sweep-major, mode-minor, then m order, whatever ``jobs`` is."""
    tasks = [(spec, i, x) for i, x in enumerate(spec.points())]
    if jobs <= 1:
        for task in tasks:
            yield from _point_rows(task)
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for rows in pool.map(_point_rows, tasks):  # map keeps submission order
            yield from rows


def _preset(variable, lo, hi, n, quantity, modes=("mode_a", "mode_b", "dpso"), **fixed):
    return dict(variable=variable, lo=lo, hi=hi, n=n, quantity=quantity, modes=modes, fixed=fixed)


# Grids of the published figures; the schematics (1 and 8) have no data.
FIGURES = {
    "fig2": _preset("phi", -1.5, 1.5, 301, "sensitivity", ("standard", "mode_a", "mode_b", "dpso"),
                    alpha=1.0, g=1.0, T=1.0),
    "fig3": _preset("alpha", 0.03, 3.0, 100, "sensitivity", phi=1.0, g=1.0, T=1.0),
    "fig4": _preset("g", 0.015, 1.5, 100, "sensitivity", phi=1.0, alpha=1.0, T=1.0),
    "fig5": _preset("T", 0.0, 1.0, 101, "sensitivity", phi=1.0, g=1.0, alpha=3.0),
    "fig6": _preset("alpha", 0.03, 3.0, 100, "qfi", phi=1.0, g=1.0, T=1.0),
    "fig7": _preset("g", 0.015, 1.5, 100, "qfi", phi=1.0, alpha=1.0, T=1.0),
    "fig9": _preset("eta", 0.0, 1.0, 101, "qfi_lossy", g=1.0, alpha=3.0),
    "fig10": _preset("alpha", 0.03, 3.0, 100, "qfi_lossy", g=1.0, eta=0.7),
    "fig11": _preset("g", 0.015, 1.5, 100, "qfi_lossy", alpha=1.0, eta=0.7),
    "fig12": _preset("alpha", 0.03, 3.0, 100, "limits", g=1.0, phi=1.0, T=1.0),
    "fig13": _preset("alpha", 0.03, 3.0, 100, "limits", g=1.0, phi=1.0, T=0.7),
}


def figure_spec(name: str, points: int | None = None, pin_t: float | None = None, v: int = 1) -> SweepSpec:
    if name not in FIGURES:
        raise ValueError(f"unknown figure {name!r}; choose from {sorted(FIGURES)}")
    cfg = FIGURES[name]
    base = InterferometerParams(**cfg["fixed"])
    return SweepSpec(cfg["variable"], cfg["lo"], cfg["hi"], points or cfg["n"], base, tuple(cfg["modes"]),
                     (1, 2, 3), cfg["quantity"], v, pin_t, frozenset(cfg["fixed"]))


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)  # shortest round-trip; inf and nan spelled out
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def write_rows(rows: Iterable[dict], columns: list[str], fh: TextIO, fmt: str = "csv") -> int:
    """Emit rows in the given column order; returns the row count."""
    count = 0
    if fmt == "csv":
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(c, "")) for c in columns])
            count += 1
    elif fmt == "jsonl":
        for row in rows:
            fh.write(json.dumps({c: _json_value(row.get(c)) for c in columns}) + "\n")
            count += 1
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return count
