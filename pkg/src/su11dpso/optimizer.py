"""One-dimensional searches over the subtraction weight t and the working phase.

Every search is a uniform grid scan followed, when the grid minimum is a
strict interior minimum, by golden-section refinement of its two neighbouring
cells.  Non-finite objective values are treated as infeasible and skipped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .moments import moment_table, t_family
from .observables import SensitivityCurve
from .params import DegenerateStateError, InterferometerParams
from .qfi import qfi_ideal, qfi_lossy

__all__ = [
    "NoFeasiblePointError",
    "OptimizationResult",
    "minimize_scalar",
    "optimize_dpso_t",
    "optimize_phi",
    "OBJECTIVES",
]

_INVPHI = (math.sqrt(5) - 1) / 2
OBJECTIVES = ("sensitivity", "qfi", "qfi_lossy")


class NoFeasiblePointError(ValueError):
    """The objective was infinite (or NaN) at every grid point."""


@dataclass(frozen=True)
class OptimizationResult:
    """Outcome of a 1-D search.

    ``value`` is the objective at ``argmin``; for maximizations done through
    :func:`optimize_dpso_t` it is the maximized quantity itself.  ``degenerate``
    marks an objective that was constant on the grid, so any argument is optimal.
    """

    argmin: float
    value: float
    evaluations: int
    bracket: tuple[float, float]
    degenerate: bool = False


def _finite(v: float) -> bool:
    return v is not None and math.isfinite(v)


def minimize_scalar(objective: Callable[[float], float], lo: float, hi: float,
                    grid_n: int = 64, tol: float = 1e-6) -> OptimizationResult:
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    if grid_n < 3:
        raise ValueError("grid_n must be at least 3")
    if not tol > 0:
        raise ValueError("tol must be positive")

    xs = np.linspace(lo, hi, grid_n).tolist()
    fs = [float(objective(x)) for x in xs]
    evals = grid_n
    feasible = [i for i, f in enumerate(fs) if _finite(f)]
    if not feasible:
        raise NoFeasiblePointError(f"objective infinite on all {grid_n} grid points of [{lo}, {hi}]")

    best = min(feasible, key=lambda i: fs[i])  # first index on ties
    vals = [fs[i] for i in feasible]
    spread = max(vals) - min(vals)
    if len(feasible) == grid_n and spread <= 1e-12 * max(1.0, abs(fs[best])):
        return OptimizationResult(xs[best], fs[best], evals, (lo, hi), degenerate=True)

    def worse(j: int) -> bool:
        return not _finite(fs[j]) or fs[j] > fs[best]

    if not (0 < best < grid_n - 1 and worse(best - 1) and worse(best + 1)):
        return OptimizationResult(xs[best], fs[best], evals, (lo, hi))

    a, b = xs[best - 1], xs[best + 1]
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = float(objective(c)), float(objective(d))
    evals += 2
    x_best, f_best = xs[best], fs[best]
    for x, f in ((c, fc), (d, fd)):
        if _finite(f) and f < f_best:
            x_best, f_best = x, f
    while b - a > tol:
        # infinite values compare as larger, pushing the bracket away from them
        if (fc if _finite(fc) else math.inf) < (fd if _finite(fd) else math.inf):
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = float(objective(c))
            x, f = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = float(objective(d))
            x, f = d, fd
        evals += 1
        if _finite(f) and f < f_best:
            x_best, f_best = x, f
    return OptimizationResult(x_best, f_best, evals, (lo, hi))


def _t_objective(params: InterferometerParams, kind: str) -> Callable[[float], float]:
    if kind == "sensitivity":
        fam = t_family(params)

        def f(t):
            p = params.replace(s=1.0 - t, t=t)
            try:
                return SensitivityCurve(p, table=fam.at(t)).delta_phi(params.phi)
            except DegenerateStateError:
                return math.inf
        return f

    if kind in ("qfi", "qfi_lossy"):
        fam = t_family(params.replace(T=1.0))
        score = qfi_ideal if kind == "qfi" else qfi_lossy

        def f(t):
            p = params.replace(s=1.0 - t, t=t)
            try:
                return -score(p, table=fam.at(t))
            except DegenerateStateError:
                return math.inf
        return f

    raise ValueError(f"unknown objective {kind!r}; choose from {OBJECTIVES}")


def optimize_dpso_t(params: InterferometerParams, kind: str = "sensitivity",
                    grid_n: int = 64, tol: float = 1e-6) -> OptimizationResult:
    """Best ``t`` in [0, 1] (with ``s = 1 - t``) for the delocalized subtraction.

    ``sensitivity`` minimizes the phase sensitivity at ``params.phi``;
    ``qfi`` and ``qfi_lossy`` maximize the Fisher information.  The reported
    value is recomputed from an exact moment table at the optimum.
    """
    res = minimize_scalar(_t_objective(params, kind), 0.0, 1.0, grid_n, tol)
    t = res.argmin
    p = params.replace(s=1.0 - t, t=t)
    if kind == "sensitivity":
        value = SensitivityCurve(p).delta_phi(params.phi)
    elif kind == "qfi":
        value = qfi_ideal(p)
    else:
        value = qfi_lossy(p)
    return OptimizationResult(t, value, res.evaluations, res.bracket, res.degenerate)


def optimize_phi(params: InterferometerParams, lo: float = 0.0, hi: float = math.pi,
                 grid_n: int = 64, tol: float = 1e-6) -> OptimizationResult:
    """Working phase minimizing the sensitivity, all other knobs fixed."""
    curve = SensitivityCurve(params, moment_table(params, 2))
    return minimize_scalar(curve.delta_phi, lo, hi, grid_n, tol)
