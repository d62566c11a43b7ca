"""Output-port intensity moments and the intensity-detection phase sensitivity.

Every output expectation is a short Fourier series in the phase,
``sum_k c_k exp(i k phi)`` with ``|k| <= 2``, whose coefficients are linear in
the Q moments.  Keeping the series (instead of a number per phi) lets a phase
sweep reuse one set of moment evaluations.

The Heisenberg-picture output modes are

    a_out = cosh g e^{i phi} A + kappa sinh g B^+
    b_out = cosh g B + kappa sinh g e^{-i phi} A^+

with ``A, B`` the modes after the loss beam splitters and
``kappa = -exp(i theta2)`` (``kappa = 1`` for the balanced setting).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Protocol

from .moments import moment_table, normalization_A
from .params import InterferometerParams

__all__ = [
    "PhaseSeries",
    "IntensityStats",
    "SensitivityCurve",
    "exp_na",
    "exp_nb",
    "exp_na2",
    "exp_nb2",
    "exp_nanb",
    "intensity_stats",
    "phase_sensitivity",
]


class MomentSource(Protocol):
    params: InterferometerParams

    def q(self, x1: int = 0, y1: int = 0, x2: int = 0, y2: int = 0) -> complex: ...


class PhaseSeries:
    """``f(phi) = sum_k coeffs[k] * exp(i k phi)``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict[int, complex]):
        self.coeffs = {k: complex(c) for k, c in coeffs.items()}

    def __call__(self, phi: float) -> complex:
        return sum(c * cmath.exp(1j * k * phi) for k, c in self.coeffs.items())

    def derivative(self, phi: float) -> complex:
        return sum(1j * k * c * cmath.exp(1j * k * phi) for k, c in self.coeffs.items())

    def derivative_scale(self) -> float:
        return sum(abs(k * c) for k, c in self.coeffs.items())

    def __add__(self, other: "PhaseSeries") -> "PhaseSeries":
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0) + c
        return PhaseSeries(out)

    def scale(self, f: complex) -> "PhaseSeries":
        return PhaseSeries({k: c * f for k, c in self.coeffs.items()})

    def __repr__(self) -> str:
        body = ", ".join(f"{k:+d}: {c:.6g}" for k, c in sorted(self.coeffs.items()))
        return f"PhaseSeries({{{body}}})"


def _source(params: InterferometerParams, table: MomentSource | None) -> MomentSource:
    return table if table is not None else moment_table(params, 2)


def _consts(params: InterferometerParams):
    C, S = math.cosh(params.g), math.sinh(params.g)
    kappa = -cmath.exp(1j * params.theta2)
    return C, S, kappa, kappa.conjugate()


def exp_na(params: InterferometerParams, table: MomentSource | None = None) -> PhaseSeries:
    """Unnormalized <a^+ a> at the output."""
    Q = _source(params, table).q
    C, S, K, Kc = _consts(params)
    return PhaseSeries({
        0: C * C * Q(1, 1, 0, 0) + S * S * (Q(0, 0, 1, 1) + Q()),
        -1: K * S * C * Q(1, 0, 1, 0),
        1: Kc * S * C * Q(0, 1, 0, 1),
    })


def exp_nb(params: InterferometerParams, table: MomentSource | None = None) -> PhaseSeries:
    """Unnormalized <b^+ b> at the output."""
    Q = _source(params, table).q
    C, S, K, Kc = _consts(params)
    return PhaseSeries({
        0: C * C * Q(0, 0, 1, 1) + S * S * (Q(1, 1, 0, 0) + Q()),
        -1: K * S * C * Q(1, 0, 1, 0),
        1: Kc * S * C * Q(0, 1, 0, 1),
    })


def exp_na2(params: InterferometerParams, table: MomentSource | None = None) -> PhaseSeries:
    """Unnormalized <a^+^2 a^2> at the output."""
    Q = _source(params, table).q
    C, S, K, Kc = _consts(params)
    C2, S2 = C * C, S * S
    return PhaseSeries({
        0: (C2 * C2 * Q(2, 2, 0, 0) + 4 * S2 * C2 * (Q(1, 1, 1, 1) + Q(1, 1, 0, 0))
            + S2 * S2 * (Q(0, 0, 2, 2) + 4 * Q(0, 0, 1, 1) + 2 * Q())),
        -1: K * (2 * S * C2 * C * Q(2, 1, 1, 0) + 2 * S2 * S * C * (Q(1, 0, 2, 1) + 2 * Q(1, 0, 1, 0))),
        1: Kc * (2 * S * C2 * C * Q(1, 2, 0, 1) + 2 * S2 * S * C * (Q(0, 1, 1, 2) + 2 * Q(0, 1, 0, 1))),
        -2: K * K * S2 * C2 * Q(2, 0, 2, 0),
        2: Kc * Kc * S2 * C2 * Q(0, 2, 0, 2),
    })


def exp_nb2(params: InterferometerParams, table: MomentSource | None = None) -> PhaseSeries:
    """Unnormalized <b^+^2 b^2> at the output."""
    Q = _source(params, table).q
    C, S, K, Kc = _consts(params)
    C2, S2 = C * C, S * S
    return PhaseSeries({
        0: (C2 * C2 * Q(0, 0, 2, 2) + 4 * S2 * C2 * (Q(1, 1, 1, 1) + Q(0, 0, 1, 1))
            + S2 * S2 * (Q(2, 2, 0, 0) + 4 * Q(1, 1, 0, 0) + 2 * Q())),
        -1: K * (2 * S * C2 * C * Q(1, 0, 2, 1) + 2 * S2 * S * C * (Q(2, 1, 1, 0) + 2 * Q(1, 0, 1, 0))),
        1: Kc * (2 * S * C2 * C * Q(0, 1, 1, 2) + 2 * S2 * S * C * (Q(1, 2, 0, 1) + 2 * Q(0, 1, 0, 1))),
        -2: K * K * S2 * C2 * Q(2, 0, 2, 0),
        2: Kc * Kc * S2 * C2 * Q(0, 2, 0, 2),
    })


def exp_nanb(params: InterferometerParams, table: MomentSource | None = None) -> PhaseSeries:
    """Unnormalized <a^+ a b^+ b> at the output (derivation in docs/derivations.md)."""
    Q = _source(params, table).q
    C, S, K, Kc = _consts(params)
    C2, S2 = C * C, S * S
    return PhaseSeries({
        0: ((C2 + S2) ** 2 * Q(1, 1, 1, 1) + C2 * S2 * (Q(2, 2, 0, 0) + Q(0, 0, 2, 2))
            + (3 * C2 * S2 + S2 * S2) * (Q(1, 1, 0, 0) + Q(0, 0, 1, 1))
            + (S2 * S2 + C2 * S2) * Q()),
        -1: K * C * S * ((C2 + S2) * (Q(2, 1, 1, 0) + Q(1, 0, 2, 1)) + (C2 + 3 * S2) * Q(1, 0, 1, 0)),
        1: Kc * C * S * ((C2 + S2) * (Q(1, 2, 0, 1) + Q(0, 1, 1, 2)) + (C2 + 3 * S2) * Q(0, 1, 0, 1)),
        -2: K * K * C2 * S2 * Q(2, 0, 2, 0),
        2: Kc * Kc * C2 * S2 * Q(0, 2, 0, 2),
    })


@dataclass(frozen=True)
class IntensityStats:
    mean_X: float
    mean_X2: float
    dmeanX_dphi: float
    variance_X: float


class SensitivityCurve:
    """Normalized <X>(phi) and <X^2>(phi) for fixed parameters other than phi."""

    def __init__(self, params: InterferometerParams, table: MomentSource | None = None):
        src = _source(params, table)
        norm = normalization_A(params, table=src) ** 2
        na, nb = exp_na(params, src), exp_nb(params, src)
        self.params = params
        self.mean_X = (na + nb).scale(norm)
        second = (exp_na2(params, src) + na + exp_nanb(params, src).scale(2)
                  + exp_nb2(params, src) + nb)
        self.mean_X2 = second.scale(norm)

    def stats(self, phi: float) -> IntensityStats:
        x = self.mean_X(phi)
        x2 = self.mean_X2(phi)
        slope = self.mean_X.derivative(phi)
        var = x2.real - x.real ** 2
        if var < 0:
            if var < -1e-9 * max(1.0, x2.real):
                raise ArithmeticError(f"negative photon-number variance {var} at phi={phi}")
            var = 0.0
        return IntensityStats(x.real, x2.real, slope.real, var)

    def delta_phi(self, phi: float) -> float:
        """Error-propagation sensitivity; ``inf`` on a fringe extremum."""
        st = self.stats(phi)
        if abs(st.dmeanX_dphi) <= 1e-12 * max(self.mean_X.derivative_scale(), 1e-300):
            return math.inf
        return math.sqrt(st.variance_X) / abs(st.dmeanX_dphi)


def intensity_stats(params: InterferometerParams) -> IntensityStats:
    return SensitivityCurve(params).stats(params.phi)


def phase_sensitivity(params: InterferometerParams) -> float:
    return SensitivityCurve(params).delta_phi(params.phi)
