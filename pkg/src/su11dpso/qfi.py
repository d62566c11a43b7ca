"""Fisher information of the phase on mode a, ideal and lossy, plus limit curves.

The probe state is the normalized subtracted state inside the interferometer,
so every moment here is taken at ``T = 1`` whatever ``params.T`` says.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .moments import MomentTable, moment_table, normalization_A
from .params import InterferometerParams

__all__ = [
    "DegenerateLimitsError",
    "QfiReport",
    "mode_a_number_stats",
    "qfi_ideal",
    "qfi_lossy",
    "total_photon_number",
    "limits",
    "lossy_fisher",
]


class DegenerateLimitsError(ArithmeticError):
    """Limits need a positive Fisher information and photon number."""


@dataclass(frozen=True)
class QfiReport:
    F_ideal: float
    F_lossy: float
    N_total: float
    qcrb: float
    sql: float
    hl: float
    v: int = 1


def _lossless_table(params: InterferometerParams, table) -> MomentTable:
    if table is not None:
        return table
    return moment_table(params.replace(T=1.0), 2)


def mode_a_number_stats(params: InterferometerParams, table=None, printed: bool = False) -> tuple[float, float]:
    """Mean and variance of ``n_a`` on the lossless probe state.

    ``printed=True`` swaps the variance for ``4[A^2(Q2200 + Q1100) - (A^2 Q1100)^2]``,
    a misprinted form kept only to show how far it is from the real one.
    """
    tab = _lossless_table(params, table)
    a2 = normalization_A(params, tab) ** 2
    mean = a2 * tab.q(1, 1, 0, 0).real
    second = a2 * (tab.q(2, 2, 0, 0).real + tab.q(1, 1, 0, 0).real)
    var = second - mean * mean
    if printed:
        var *= 4
    if var < 0:
        if var < -1e-9 * max(1.0, second):
            raise ArithmeticError(f"negative n_a variance {var}")
        var = 0.0
    return mean, var


def qfi_ideal(params: InterferometerParams, table=None) -> float:
    """``4 Var(n_a)`` on the lossless probe state."""
    return 4 * mode_a_number_stats(params, table)[1]


def lossy_fisher(eta: float, n: float, var: float) -> float:
    """``4 eta n V / ((1 - eta) V + eta n)`` for mean ``n`` and variance ``V``."""
    if eta == 1.0:
        return 4 * var
    den = (1 - eta) * var + eta * n
    if n <= 0 or den <= 0:
        return 0.0
    return 4 * eta * n * var / den


def qfi_lossy(params: InterferometerParams, eta: float | None = None, table=None,
              printed: bool = False) -> float:
    """Fisher information with photon loss of transmissivity ``eta`` on mode a.

    ``eta`` defaults to ``params.eta``; ``eta = 1`` is lossless and returns
    :func:`qfi_ideal` exactly, ``eta = 0`` gives zero.
    """
    eta = params.eta if eta is None else float(eta)
    if not 0 <= eta <= 1:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    n, var = mode_a_number_stats(params, table, printed=printed)
    return lossy_fisher(eta, n, var)


def total_photon_number(params: InterferometerParams, table=None) -> float:
    """Mean photon number of both modes inside the interferometer, before the second OPA."""
    tab = _lossless_table(params, table)
    a2 = normalization_A(params, tab) ** 2
    return a2 * (tab.q(1, 1, 0, 0).real + tab.q(0, 0, 1, 1).real)


def limits(params: InterferometerParams, v: int = 1, table=None) -> QfiReport:
    if isinstance(v, bool) or int(v) != v or v < 1:
        raise ValueError(f"v must be a positive integer, got {v!r}")
    v = int(v)
    tab = _lossless_table(params, table)
    n_a, var = mode_a_number_stats(params, tab)
    F = 4 * var
    N = total_photon_number(params, tab)
    if not F > 0 or not N > 0:
        raise DegenerateLimitsError(f"need F > 0 and N > 0, got F={F}, N={N}")
    return QfiReport(
        F_ideal=F,
        F_lossy=lossy_fisher(params.eta, n_a, var),
        N_total=N,
        qcrb=1 / math.sqrt(v * F),
        sql=1 / math.sqrt(N),
        hl=1 / N,
        v=v,
    )
