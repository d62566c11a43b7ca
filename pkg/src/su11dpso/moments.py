"""Five-index moments Q_{m,x1,y1,x2,y2} from the exponential generating function.

With ``psi = U_S1 |alpha, 0>`` and the loss beam splitters acting on vacuum
environments,

    Q = <psi| (s a^+ + t b^+)^m  L^+ (a^+^x1 a^y1 b^+^x2 b^y2) L  (s a + t b)^m |psi>

is a mixed derivative of ``exp(w4)`` at the origin, where ``w4`` is the
quadratic form in lambda_3..lambda_8 assembled in :func:`build_w4`.  The
derivation lives in ``docs/derivations.md``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .params import DegenerateStateError, InterferometerParams
from .polyseries import ExponentVector, SparsePoly, extract_derivative, poly_exp

__all__ = [
    "QIndex",
    "MomentTable",
    "build_w4",
    "q_moment",
    "normalization_A",
    "moment_table",
    "TFamily",
    "t_family",
]

L3, L4, L5, L6, L7, L8 = range(6)


class QIndex(NamedTuple):
    m: int
    x1: int = 0
    y1: int = 0
    x2: int = 0
    y2: int = 0

    @property
    def order(self) -> int:
        return 2 * self.m + self.x1 + self.y1 + self.x2 + self.y2

    def exponents(self) -> ExponentVector:
        return ExponentVector(self.m, self.m, self.x1, self.y1, self.x2, self.y2)


def _linear(cap, bound, coeffs: dict[int, complex]) -> SparsePoly:
    return SparsePoly(cap, {ExponentVector.unit(v).pack(): c for v, c in coeffs.items()}, bound)


def build_w4(params: InterferometerParams, cap: int, bound=None) -> SparsePoly:
    """Generating-function exponent ``w4`` truncated at total degree ``cap``.

    The bra-side variable lambda_3 enters as ``s*lambda_3`` on mode a and
    ``t*lambda_3`` on mode b, mirroring the ket-side lambda_4 weights.
    """
    C, S = math.cosh(params.g), math.sinh(params.g)
    e = cmath.exp(1j * params.theta1)
    rt = math.sqrt(params.T)
    s, t = params.s, params.t
    alpha = complex(params.alpha)

    mu_a = _linear(cap, bound, {L3: s, L5: rt})
    mu_b = _linear(cap, bound, {L3: t, L7: rt})
    nu_a = _linear(cap, bound, {L4: s, L6: rt})
    nu_b = _linear(cap, bound, {L4: t, L8: rt})

    w = (mu_a * nu_a + mu_b * nu_b).scale(S * S)
    w = w - (mu_a * mu_b).scale(C * S * e.conjugate()) - (nu_a * nu_b).scale(C * S * e)
    coherent_adag = mu_a.scale(C) - nu_b.scale(e * S)   # multiplies conj(alpha)
    coherent_a = nu_a.scale(C) - mu_b.scale(e.conjugate() * S)  # multiplies alpha
    w = w + coherent_adag.scale(alpha.conjugate()) + coherent_a.scale(alpha)
    return w


def q_moment(idx, params: InterferometerParams) -> complex:
    """Single moment Q_{m,x1,y1,x2,y2}, extracted with the minimal cap."""
    idx = QIndex(*idx)
    if min(idx) < 0:
        raise ValueError(f"moment indices must be non-negative, got {tuple(idx)}")
    k = idx.exponents()
    if idx.order == 0:
        return 1.0 + 0j
    w = build_w4(params.replace(m=idx.m), idx.order, bound=k)
    return extract_derivative(poly_exp(w), k)


@dataclass(frozen=True)
class MomentTable:
    """All moments Q_{m,x1,y1,x2,y2} with every ``x, y <= max_power``.

    Built from one truncated exponential, so a table costs about as much as a
    single high-order moment.
    """

    params: InterferometerParams
    max_power: int
    series: SparsePoly

    def q(self, x1: int = 0, y1: int = 0, x2: int = 0, y2: int = 0) -> complex:
        if max(x1, y1, x2, y2) > self.max_power:
            raise ValueError(f"index exceeds table max_power={self.max_power}")
        m = self.params.m
        return extract_derivative(self.series, (m, m, x1, y1, x2, y2))

    __call__ = q

    @property
    def norm(self) -> float:
        return self.q().real


def _moment_key(params: InterferometerParams) -> InterferometerParams:
    # phi and eta never enter a moment; dropping them lets sweeps share tables
    return params.replace(phi=0.0, eta=1.0)


def moment_table(params: InterferometerParams, max_power: int = 2) -> MomentTable:
    return _moment_table(_moment_key(params), max_power)


@lru_cache(maxsize=4096)
def _moment_table(params: InterferometerParams, max_power: int) -> MomentTable:
    m = params.m
    bound = ExponentVector(m, m, max_power, max_power, max_power, max_power)
    cap = bound.degree
    series = poly_exp(build_w4(params, cap, bound=bound)) if cap else SparsePoly.constant(0)
    return MomentTable(params, max_power, series)


def normalization_A(params: InterferometerParams, table: MomentTable | None = None) -> float:
    """``A = Q_{m,0,0,0,0}^{-1/2}``."""
    q0 = (table.q() if table is not None else q_moment((params.m,), params)).real
    if not q0 > 0 or not math.isfinite(q0):
        raise DegenerateStateError(
            f"photon subtraction annihilates the state (Q_m0000={q0!r}) at {params}")
    return q0 ** -0.5


class _InterpolatedTable:
    """Moment source evaluated from a :class:`TFamily` at one ``t``."""

    __slots__ = ("family", "weights", "params")

    def __init__(self, family: "TFamily", weights, params: InterferometerParams):
        self.family = family
        self.weights = weights
        self.params = params

    def q(self, x1: int = 0, y1: int = 0, x2: int = 0, y2: int = 0) -> complex:
        return complex(self.weights @ self.family.node_values(x1, y1, x2, y2))

    __call__ = q

    @property
    def norm(self) -> float:
        return self.q().real


class TFamily:
    """Moments as exact polynomials of degree ``2m`` in ``t`` (with ``s = 1 - t``).

    Each moment is bilinear in the bra and ket weights ``(s, t)^m``, so
    sampling ``2m + 1`` Chebyshev nodes on [0, 1] determines it completely;
    :meth:`at` evaluates it by barycentric interpolation.  Used where ``t``
    is scanned many times at fixed everything else.
    """

    def __init__(self, params: InterferometerParams, max_power: int = 2):
        self.params = params
        self.max_power = max_power
        n = 2 * params.m
        if n == 0:
            self.nodes = np.array([0.5])
            self.bary = np.array([1.0])
        else:
            j = np.arange(n + 1)
            self.nodes = 0.5 * (1.0 - np.cos(np.pi * j / n))
            bary = (-1.0) ** j
            bary[0] *= 0.5
            bary[-1] *= 0.5
            self.bary = bary
        self.tables = [moment_table(params.replace(s=1.0 - tn, t=tn), max_power)
                       for tn in self.nodes]
        self._cache: dict[tuple, object] = {}

    def node_values(self, x1, y1, x2, y2):
        key = (x1, y1, x2, y2)
        vals = self._cache.get(key)
        if vals is None:
            vals = np.array([tab.q(*key) for tab in self.tables])
            self._cache[key] = vals
        return vals

    def weights(self, t: float):
        diff = t - self.nodes
        hit = np.flatnonzero(diff == 0)
        if hit.size:
            w = np.zeros_like(self.nodes)
            w[hit[0]] = 1.0
            return w
        # dividing by the nearest distance first keeps t within a subnormal of a node finite
        w = self.bary * (np.min(np.abs(diff)) / diff)
        return w / w.sum()

    def at(self, t: float) -> _InterpolatedTable:
        return _InterpolatedTable(self, self.weights(t), self.params.replace(s=1.0 - t, t=t))


@lru_cache(maxsize=256)
def _t_family(params: InterferometerParams, max_power: int) -> TFamily:
    return TFamily(params, max_power)


def t_family(params: InterferometerParams, max_power: int = 2) -> TFamily:
    """Cached :class:`TFamily`; ``s``, ``t``, ``phi`` and ``eta`` do not affect it."""
    return _t_family(_moment_key(params).replace(s=0.5, t=0.5), max_power)
