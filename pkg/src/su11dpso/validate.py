"""Closed forms against the Fock oracle on a parameter grid."""

from __future__ import annotations

import cmath
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import fock
from .moments import q_moment
from .observables import SensitivityCurve
from .params import InterferometerParams
from .qfi import lossy_fisher, qfi_ideal, qfi_lossy

__all__ = ["THRESHOLDS", "VALIDATE_COLUMNS", "ValidationGrid", "validate_point", "run_validate", "breached"]

THRESHOLDS = {"q": 1e-8, "X": 1e-8, "X2": 1e-8, "delta_phi": 1e-6, "F": 1e-8, "F_L": 1e-8}
MOMENT_INDICES = [i for i in itertools.product(range(5), repeat=4) if sum(i) <= 4]
VALIDATE_COLUMNS = (["point", "m", "g", "alpha", "s", "t", "T", "phi", "eta", "cutoff"]
                    + [f"d_{k}" for k in THRESHOLDS] + ["status"])


@dataclass(frozen=True)
class ValidationGrid:
    ms: tuple[int, ...] = (0, 1, 2, 3)
    ts: tuple[float, ...] = (0.0, 0.5, 1.0)
    gs: tuple[float, ...] = (0.5, 1.0)
    alphas: tuple[float, ...] = (0.5, 1.0, 2.0)
    Ts: tuple[float, ...] = (0.7, 1.0)
    phi: float = 1.0
    eta: float = 0.7

    def points(self) -> list[InterferometerParams]:
        return [InterferometerParams(m=m, s=1.0 - t, t=t, g=g, alpha=a, T=T, phi=self.phi, eta=self.eta)
                for m, t, g, a, T in itertools.product(self.ms, self.ts, self.gs, self.alphas, self.Ts)]


def _rel(closed: complex, oracle: complex) -> float:
    closed, oracle = complex(closed), complex(oracle)
    if closed == oracle:  # covers matching infinities
        return 0.0
    if not (cmath.isfinite(closed) and cmath.isfinite(oracle)):
        return math.inf
    return float(abs(closed - oracle) / max(abs(oracle), 1e-300))


def validate_point(params: InterferometerParams, printed: bool = False) -> dict:
    """Relative deltas of every closed form at one point.

    ``printed`` feeds the misprinted variance into the lossy Fisher information,
    which should then fail its threshold.
    """
    row = {k: getattr(params, k) for k in ("m", "g", "s", "t", "T", "phi", "eta")}
    row["alpha"] = complex(params.alpha).real
    try:
        closed_q = np.array([q_moment((params.m,) + i, params) for i in MOMENT_INDICES])
        oracle_q = fock.oracle_q_moments(params, MOMENT_INDICES)
        row["d_q"] = max(_rel(c, o) for c, o in zip(closed_q, oracle_q))

        out = fock.oracle_output_report(params)
        row["cutoff"] = out["cutoff"]
        curve = SensitivityCurve(params)
        st = curve.stats(params.phi)
        row["d_X"] = _rel(st.mean_X, out["X"])
        row["d_X2"] = _rel(st.mean_X2, out["X2"])
        row["d_delta_phi"] = _rel(curve.delta_phi(params.phi), out["delta_phi"])

        mean, var = fock.oracle_mode_a_stats(params)
        row["d_F"] = _rel(qfi_ideal(params), 4 * var)
        row["d_F_L"] = _rel(qfi_lossy(params, printed=printed), lossy_fisher(params.eta, mean, var))
        row["status"] = "ok"
    except fock.CutoffInadequateError as exc:
        row["status"] = f"cutoff-inadequate: {exc}"
    if row["status"] == "ok" and breached(row):
        row["status"] = "breach"
    return row


def breached(row: dict) -> bool:
    if row.get("status") not in ("ok", "breach"):
        return True
    return any(not row[f"d_{k}"] <= tol for k, tol in THRESHOLDS.items())


def _task(args):
    index, params, printed = args
    row = validate_point(params, printed)
    row["point"] = index
    return row


def run_validate(grid: ValidationGrid, printed: bool = False, jobs: int = 1) -> Iterator[dict]:
    tasks = [(i, p, printed) for i, p in enumerate(grid.points())]
    if jobs <= 1:
        yield from map(_task, tasks)
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        yield from pool.map(_task, tasks)
