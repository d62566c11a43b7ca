"""Brute-force two-mode Fock-space simulator used as an independent referee.

States live on the box ``0 <= n_a, n_b <= cutoff``.  Amplitude arrays are
indexed ``[n_a, n_b]`` (a leading batch axis is allowed for ensembles).  The
two-mode squeezer conserves ``n_a - n_b``, so its truncated generator splits
into one tridiagonal block per difference sector; each block is
exponentiated exactly and cached.

Nothing here uses the generating-function closed forms.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence, Union

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln
from scipy.stats import poisson

from .params import DegenerateStateError, InterferometerParams

log = logging.getLogger(__name__)

__all__ = [
    "CutoffInadequateError",
    "AnnihilatedStateError",
    "TwoModeState",
    "TwoModeDensity",
    "StateEnsemble",
    "default_cutoff",
    "prepare_input",
    "apply_two_mode_squeeze",
    "apply_photon_subtraction",
    "apply_loss_channel",
    "apply_phase_shift",
    "expectation",
    "converged",
    "oracle_q_moments",
    "oracle_output_moments",
    "oracle_sensitivity",
    "oracle_sensitivity_curve",
    "oracle_output_report",
    "oracle_qfi_pure",
    "oracle_mode_a_stats",
]

TAIL_TOL = 1e-12
LOSS_TOL = 1e-16


class CutoffInadequateError(RuntimeError):
    """Too much probability sits at the edge of the truncated Fock box.

    ``excess`` is the ratio of the measured edge mass to its tolerance when
    known; :func:`converged` uses it to skip hopeless cutoffs.
    """

    def __init__(self, message: str, excess: float | None = None, stage: str = ""):
        super().__init__(message)
        self.excess = excess
        self.stage = stage


class AnnihilatedStateError(DegenerateStateError):
    """Photon subtraction left (numerically) nothing behind."""


@dataclass
class TwoModeState:
    cutoff: int
    amps: np.ndarray

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)


@dataclass
class StateEnsemble:
    """Mixed state ``sum_b |psi_b><psi_b|`` over unnormalized pure branches.

    ``branches`` has shape ``(B, cutoff + 1, cutoff + 1)``.  This is how the
    pipeline carries the output of the loss channel; memory grows with the
    number of significant Kraus branches instead of the squared dimension.
    """

    cutoff: int
    branches: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.vdot(self.branches, self.branches).real)

    def to_density(self) -> "TwoModeDensity":
        flat = self.branches.reshape(len(self.branches), -1)
        return TwoModeDensity(self.cutoff, flat.T @ flat.conj())


@dataclass
class TwoModeDensity:
    """Full density matrix on the box; index ``n_a * (cutoff + 1) + n_b``."""

    cutoff: int
    rho: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.trace(self.rho).real)

    def as_tensor(self) -> np.ndarray:
        d = self.cutoff + 1
        return self.rho.reshape(d, d, d, d)


Kind = Union[TwoModeState, StateEnsemble, TwoModeDensity]


def default_cutoff(params: InterferometerParams) -> int:
    a2 = abs(complex(params.alpha)) ** 2
    return math.ceil(a2 + 2 * math.sqrt(a2) + 6 * math.sinh(params.g) ** 2 * (params.m + 3) + 20)


def prepare_input(alpha: complex, cutoff: int, tail_tol: float = 1e-12) -> TwoModeState:
    """Coherent state on mode a, vacuum on mode b."""
    alpha = complex(alpha)
    mean = abs(alpha) ** 2
    tail = float(poisson.sf(cutoff, mean)) if mean > 0 else 0.0
    if tail >= tail_tol:
        raise CutoffInadequateError(f"coherent tail {tail:.2e} beyond cutoff {cutoff}", tail / tail_tol, "input")
    n = np.arange(cutoff + 1)
    amps = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    if alpha == 0:
        amps[0, 0] = 1.0
    else:
        logmag = -mean / 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
        amps[:, 0] = np.exp(logmag + 1j * n * cmath.phase(alpha))
    return TwoModeState(cutoff, amps)


@lru_cache(maxsize=64)
def _squeeze_blocks(g: float, theta: float, cutoff: int):
    """Per-sector unitaries of ``exp(xi* a b - xi a^+ b^+)``, ``xi = g e^{i theta}``."""
    xi = g * cmath.exp(1j * theta)
    d1 = cutoff + 1
    blocks = []
    for d in range(-cutoff, cutoff + 1):
        na0, nb0 = max(d, 0), max(-d, 0)
        k = np.arange(cutoff + 1 - abs(d))
        flat = (na0 + k) * d1 + (nb0 + k)
        gen = np.zeros((k.size, k.size), dtype=complex)
        if k.size > 1:
            up = np.sqrt((na0 + k[1:]) * (nb0 + k[1:]).astype(float))
            gen[k[:-1], k[1:]] = np.conj(xi) * up   # a b lowers the pair number
            gen[k[1:], k[:-1]] = -xi * up           # a^+ b^+ raises it
        blocks.append((flat, expm(gen)))
    return blocks


def _edge_mass(arr: np.ndarray) -> float:
    p = np.abs(arr) ** 2
    if p.ndim == 3:
        p = p.sum(axis=0)
    total = p.sum()
    if total == 0:
        return 0.0
    edge = p[-2:, :].sum() + p[:-2, -2:].sum()
    return float(edge / total)


def _apply_blocks(arr: np.ndarray, blocks) -> np.ndarray:
    batch = arr.reshape(-1, arr.shape[-2] * arr.shape[-1])
    out = np.empty_like(batch)
    for flat, u in blocks:
        out[:, flat] = batch[:, flat] @ u.T
    return out.reshape(arr.shape)


def apply_two_mode_squeeze(obj: Kind, g: float, theta: float, tail_tol: float = TAIL_TOL) -> Kind:
    blocks = _squeeze_blocks(float(g), float(theta), obj.cutoff)
    if isinstance(obj, TwoModeDensity):
        d = obj.rho.shape[0]
        u = np.zeros((d, d), dtype=complex)
        for flat, ub in blocks:
            u[np.ix_(flat, flat)] = ub
        rho = u @ obj.rho @ u.conj().T
        edge = np.real(np.diag(rho)).reshape(obj.cutoff + 1, -1)
        mass = (edge[-2:, :].sum() + edge[:-2, -2:].sum()) / max(np.trace(rho).real, 1e-300)
        if mass >= tail_tol:
            raise CutoffInadequateError(f"edge mass {mass:.2e} after squeezing at cutoff {obj.cutoff}",
                                        mass / tail_tol, "squeeze")
        return TwoModeDensity(obj.cutoff, rho)
    arr = obj.amps if isinstance(obj, TwoModeState) else obj.branches
    out = _apply_blocks(arr, blocks)
    mass = _edge_mass(out)
    if mass >= tail_tol:
        raise CutoffInadequateError(f"edge mass {mass:.2e} after squeezing at cutoff {obj.cutoff}",
                                    mass / tail_tol, "squeeze")
    if isinstance(obj, TwoModeState):
        return TwoModeState(obj.cutoff, out)
    return StateEnsemble(obj.cutoff, out)


def _lower(arr: np.ndarray, mode: int, power: int = 1) -> np.ndarray:
    """Apply ``a^power`` (mode 0) or ``b^power`` (mode 1) to amplitude arrays."""
    if power == 0:
        return arr
    axis = arr.ndim - 2 + mode
    n = arr.shape[axis]
    out = np.zeros_like(arr)
    k = np.arange(n - power)
    factor = np.exp(0.5 * (gammaln(k + power + 1) - gammaln(k + 1)))
    src = [slice(None)] * arr.ndim
    dst = [slice(None)] * arr.ndim
    src[axis] = slice(power, None)
    dst[axis] = slice(0, n - power)
    shape = [1] * arr.ndim
    shape[axis] = n - power
    out[tuple(dst)] = arr[tuple(src)] * factor.reshape(shape)
    return out


def apply_photon_subtraction(state: TwoModeState, s: float, t: float, m: int) -> TwoModeState:
    """``(s a + t b)^m``, left unnormalized."""
    amps = state.amps
    for _ in range(m):
        amps = s * _lower(amps, 0) + t * _lower(amps, 1)
    out = TwoModeState(state.cutoff, amps)
    if m and math.sqrt(out.norm2) < 1e-300:
        raise AnnihilatedStateError("photon subtraction annihilated the state")
    return out


def _kraus_factors(T: float, cutoff: int, l: int) -> np.ndarray:
    """Diagonal weights of ``K_l = sqrt((1-T)^l / l!) T^{n/2} a^l`` after lowering.

    Returns ``c[n] = sqrt(binom(n + l, l) (1-T)^l T^n)`` for ``n = 0..cutoff-l``.
    """
    n = np.arange(cutoff + 1 - l)
    if T == 1.0:
        return np.ones_like(n, dtype=float) if l == 0 else np.zeros_like(n, dtype=float)
    if T == 0.0:
        out = np.zeros_like(n, dtype=float)
        out[0] = 1.0
        return out
    logc = gammaln(n + l + 1) - gammaln(n + 1) - gammaln(l + 1) + l * math.log1p(-T) + n * math.log(T)
    return np.exp(0.5 * logc)


def _kraus_branches(arr: np.ndarray, T: float, mode: int, tol: float) -> list[np.ndarray]:
    """Kraus images of an amplitude array (batch axis first) under mode loss."""
    cutoff = arr.shape[-1] - 1
    total = float(np.vdot(arr, arr).real)
    axis = arr.ndim - 2 + mode
    out = []
    for l in range(cutoff + 1):
        c = _kraus_factors(T, cutoff, l)
        if not c.any():
            continue
        shifted = np.zeros_like(arr)
        src = [slice(None)] * arr.ndim
        dst = [slice(None)] * arr.ndim
        src[axis] = slice(l, None)
        dst[axis] = slice(0, cutoff + 1 - l)
        shape = [1] * arr.ndim
        shape[axis] = cutoff + 1 - l
        shifted[tuple(dst)] = arr[tuple(src)] * c.reshape(shape)
        w = np.sum(np.abs(shifted) ** 2, axis=tuple(range(arr.ndim - 2, arr.ndim)))
        keep = w >= tol * total
        if np.any(keep):
            out.append(shifted[keep])
    return out


def apply_loss_channel(obj: Kind, T_mode: float, mode: str, tol: float = LOSS_TOL) -> Kind:
    """Beam-splitter loss with transmissivity ``T_mode`` on mode ``'a'`` or ``'b'``.

    A :class:`TwoModeDensity` comes back as a density; pure states and
    ensembles come back as a :class:`StateEnsemble` of Kraus branches whose
    weight is at least ``tol`` of the trace.
    """
    if not 0 <= T_mode <= 1:
        raise ValueError(f"T_mode must lie in [0, 1], got {T_mode}")
    ax = {"a": 0, "b": 1}[mode]
    if isinstance(obj, TwoModeDensity):
        d1 = obj.cutoff + 1
        rho = obj.as_tensor()
        out = np.zeros_like(rho)
        for l in range(d1):
            c = _kraus_factors(T_mode, obj.cutoff, l)
            if not c.any():
                continue
            kmat = np.zeros((d1, d1))
            kmat[np.arange(d1 - l), np.arange(l, d1)] = c
            if ax == 0:
                term = np.einsum("ij,jbkc,lk->iblc", kmat, rho, kmat, optimize=True)
            else:
                term = np.einsum("ij,ajck,lk->aicl", kmat, rho, kmat, optimize=True)
            out += term
        return TwoModeDensity(obj.cutoff, out.reshape(d1 * d1, d1 * d1))
    arr = obj.amps[None] if isinstance(obj, TwoModeState) else obj.branches
    parts = _kraus_branches(arr, float(T_mode), ax, tol)
    return StateEnsemble(obj.cutoff, np.concatenate(parts, axis=0))


def apply_phase_shift(obj: Kind, phi: float) -> Kind:
    """``exp(i phi a^+ a)``."""
    ph = np.exp(1j * phi * np.arange(obj.cutoff + 1))
    if isinstance(obj, TwoModeState):
        return TwoModeState(obj.cutoff, obj.amps * ph[:, None])
    if isinstance(obj, StateEnsemble):
        return StateEnsemble(obj.cutoff, obj.branches * ph[None, :, None])
    d1 = obj.cutoff + 1
    diag = np.repeat(ph, d1)
    return TwoModeDensity(obj.cutoff, diag[:, None] * obj.rho * diag.conj()[None, :])


_NAMED = {
    "na": (1, 1, 0, 0),
    "nb": (0, 0, 1, 1),
    "na2": (2, 2, 0, 0),
    "nb2": (0, 0, 2, 2),
    "nanb": (1, 1, 1, 1),
}


def expectation(obj: Kind, observable) -> complex:
    """Expectation of a normally ordered monomial or a named observable.

    ``observable`` is ``(x1, y1, x2, y2)`` for ``a^+^x1 a^y1 b^+^x2 b^y2``,
    one of ``na, nb, na2, nb2, nanb`` (normally ordered), or ``X`` / ``X2``
    for the photon-number sum and its square.  The result is not divided by
    the trace.
    """
    if isinstance(observable, str) and observable in ("X", "X2"):
        d1 = obj.cutoff + 1
        n = np.arange(d1)
        x = (n[:, None] + n[None, :]).astype(float)
        if observable == "X2":
            x = x * x
        if isinstance(obj, TwoModeDensity):
            return complex(np.sum(np.real(np.diag(obj.rho)) * x.ravel()))
        arr = obj.amps if isinstance(obj, TwoModeState) else obj.branches
        p = np.abs(arr) ** 2
        return complex(np.sum(p * x))
    x1, y1, x2, y2 = _NAMED.get(observable, observable) if isinstance(observable, str) else observable
    if isinstance(obj, TwoModeDensity):
        d1 = obj.cutoff + 1
        low = np.diag(np.sqrt(np.arange(1, d1)), 1)
        mp = np.linalg.matrix_power
        op_a = mp(low.T, x1) @ mp(low, y1)
        op_b = mp(low.T, x2) @ mp(low, y2)
        return complex(np.sum(obj.rho * np.kron(op_a, op_b).T))
    arr = obj.amps if isinstance(obj, TwoModeState) else obj.branches
    left = _lower(_lower(arr, 0, x1), 1, x2)
    right = _lower(_lower(arr, 0, y1), 1, y2)
    return complex(np.vdot(left, right))


def _next_cutoff(n: int, step: int, failures: list[tuple[int, float, str]]) -> int:
    """Next trial cutoff after an inadequate one.

    Edge mass decays roughly geometrically in the cutoff, so two failures
    give a rate from which the first adequate multiple of ``step`` is guessed.
    """
    if len(failures) >= 2:
        (n1, e1, s1), (n2, e2, s2) = failures[-2:]
        if s1 == s2 and 0 < e2 < e1 and n2 > n1:
            rate = math.log(e1 / e2) / (n2 - n1)
            jumps = math.ceil(math.log(e2) / rate / step)
            return n + step * max(1, jumps)
    return n + step


def converged(compute: Callable[[int], np.ndarray], cutoff: int, rtol: float = 1e-9,
              step: int = 8, max_cutoff: int = 260):
    """Evaluate ``compute`` at growing cutoffs until two successive agree.

    Returns ``(value, cutoff)`` for the larger of the two agreeing cutoffs.
    Cutoffs whose states touch the box edge are skipped upward.  Components
    below ``1e-3`` of the largest one are held to an absolute drift instead,
    since exact zeros only carry rounding noise.
    """
    prev = None
    failures: list[tuple[int, float, str]] = []
    n = cutoff
    while n <= max_cutoff:
        try:
            cur = np.asarray(compute(n))
        except CutoffInadequateError as exc:
            log.debug("cutoff %d inadequate: %s", n, exc)
            prev = None
            if exc.excess is not None:
                failures.append((n, exc.excess, exc.stage))
            n = _next_cutoff(n, step, failures)
            continue
        if prev is not None:
            finite = np.isfinite(cur) & np.isfinite(prev)
            if np.array_equal(np.isfinite(cur), np.isfinite(prev)):
                c, p = cur[finite], prev[finite]
                scale = np.maximum(np.abs(c), 1e-3 * (np.abs(c).max() if c.size else 1.0))
                drift = float(np.max(np.abs(c - p) / scale)) if c.size else 0.0
                if drift < rtol:
                    return cur, n
                log.debug("cutoff %d drift %.2e", n, drift)
        prev = cur
        n += step
    raise CutoffInadequateError(f"no convergence to rtol={rtol} below cutoff {max_cutoff}")


def _subtracted_state(params: InterferometerParams, cutoff: int) -> TwoModeState:
    state = prepare_input(params.alpha, cutoff)
    state = apply_two_mode_squeeze(state, params.g, params.theta1)
    return apply_photon_subtraction(state, params.s, params.t, params.m)


@lru_cache(maxsize=256)
def _loss_matrix(T: float, cutoff: int, p: int) -> np.ndarray:
    """Loss map on one axis of a density band with offset ``p``.

    ``out[n] = sum_l c_l(n) c_l(n + p) band[n + l]`` with ``c_l`` the Kraus
    factors of :func:`_kraus_factors`.
    """
    d1 = cutoff + 1
    n = np.arange(d1)[:, None]
    j = np.arange(d1)[None, :]
    l = j - n
    valid = (l >= 0) & (n + p >= 0) & (j + p <= cutoff)
    l_ = np.where(valid, l, 0)
    n_ = np.where(valid, n, 0)
    np_ = np.where(valid, n + p, 0)
    log_binom = (gammaln(n_ + l_ + 1) - gammaln(n_ + 1) + gammaln(np_ + l_ + 1) - gammaln(np_ + 1)
                 - 2 * gammaln(l_ + 1))
    with np.errstate(divide="ignore"):
        w = np.exp(0.5 * log_binom) * (1.0 - T) ** l_ * T ** (0.5 * (n_ + np_))
    return np.where(valid, w, 0.0)


def _lossy_band(amps: np.ndarray, p: int, q: int, T: float) -> np.ndarray:
    """``rho[(na, nb), (na + p, nb + q)]`` after loss ``T`` on both modes of ``|amps><amps|``."""
    d1 = amps.shape[0]
    band = np.zeros_like(amps)
    ra = slice(max(0, -p), d1 - max(0, p))
    rb = slice(max(0, -q), d1 - max(0, q))
    sa = slice(max(0, p), d1 - max(0, -p))
    sb = slice(max(0, q), d1 - max(0, -q))
    band[ra, rb] = amps[ra, rb] * np.conj(amps[sa, sb])
    if T == 1.0:
        return band
    n = d1 - 1
    return _loss_matrix(T, n, p) @ band @ _loss_matrix(T, n, q).T


def _band_moment(band: np.ndarray, x1: int, y1: int, x2: int, y2: int) -> complex:
    """``Tr(rho a^+^x1 a^y1 b^+^x2 b^y2)`` from the band with offset ``(x1 - y1, x2 - y2)``."""
    d1 = band.shape[0]
    n = np.arange(d1)

    def ladder(x, y):
        # <n - y + x| a^+^x a^y |n>
        ok = (n >= y) & (n - y + x < d1)
        k = np.where(ok, n, y)
        lw = 0.5 * (gammaln(k + 1) + gammaln(k - y + x + 1)) - gammaln(k - y + 1)
        return np.where(ok, np.exp(lw), 0.0)

    return complex(ladder(x1, y1) @ band @ ladder(x2, y2))


def oracle_q_moments(params: InterferometerParams, indices: Sequence[tuple], cutoff: int | None = None,
                     rtol: float = 1e-9) -> np.ndarray:
    """Brute-force ``Q_{m,x1,y1,x2,y2}`` for every ``(x1, y1, x2, y2)`` in ``indices``.

    The subtracted state is not normalized.  Loss is applied with explicit
    Kraus sums on the needed diagonals of the density matrix.
    """
    indices = [tuple(i) for i in indices]

    def compute(n):
        amps = _subtracted_state(params, n).amps
        bands: dict[tuple[int, int], np.ndarray] = {}
        out = []
        for x1, y1, x2, y2 in indices:
            key = (x1 - y1, x2 - y2)
            if key not in bands:
                bands[key] = _lossy_band(amps, *key, float(params.T))
            out.append(_band_moment(bands[key], x1, y1, x2, y2))
        return np.array(out)

    value, _ = converged(compute, cutoff or default_cutoff(params), rtol)
    return value


class _SectorDensity:
    """Lossy state restricted to the blocks that keep ``n_a - n_b`` fixed.

    Phase shifts, the second squeezer and photon counting all conserve
    ``n_a - n_b``, so these blocks determine every output statistic.
    """

    def __init__(self, params: InterferometerParams, cutoff: int):
        amps = _subtracted_state(params, cutoff).amps
        self.cutoff = cutoff
        d1 = cutoff + 1
        self.blocks = [np.zeros((d1 - abs(d), d1 - abs(d)), dtype=complex) for d in range(-cutoff, d1)]
        for p in range(-cutoff, d1):
            band = _lossy_band(amps, p, p, float(params.T))
            for d in range(-cutoff, d1):
                blk = self.blocks[d + cutoff]
                size = blk.shape[0]
                if abs(p) >= size:
                    continue
                line = np.diagonal(band, offset=-d)  # entries with n_a - n_b = d
                k = np.arange(max(0, -p), size - max(0, p))
                blk[k, k + p] = line[k]

    def output_distribution(self, params: InterferometerParams, phi: float,
                            tail_tol: float = TAIL_TOL) -> np.ndarray:
        n1 = self.cutoff + 1
        probs = np.zeros((n1, n1))
        unitaries = _squeeze_blocks(float(params.g), float(params.theta2), self.cutoff)
        for d, (blk, (flat, u)) in enumerate(zip(self.blocks, unitaries), start=-self.cutoff):
            na = max(d, 0) + np.arange(blk.shape[0])
            v = np.exp(1j * phi * na)
            rotated = u @ (v[:, None] * blk * v.conj()[None, :]) @ u.conj().T
            probs.flat[flat] = np.real(np.diagonal(rotated))
        probs /= probs.sum()
        edge = probs[-2:, :].sum() + probs[:-2, -2:].sum()
        if edge >= tail_tol:
            raise CutoffInadequateError(
                f"edge mass {edge:.2e} after second squeezer at cutoff {self.cutoff}", edge / tail_tol, f"output@{phi!r}")
        return probs


_OUTPUT_NAMES = ("X", "X2", "na", "nb", "na2", "nb2", "nanb")


def _distribution_stats(probs: np.ndarray) -> dict[str, float]:
    n = np.arange(probs.shape[0], dtype=float)
    na, nb = n[:, None], n[None, :]
    x = na + nb
    vals = {
        "X": x, "X2": x * x, "na": na + 0 * nb, "nb": nb + 0 * na,
        "na2": na * (na - 1) + 0 * nb, "nb2": nb * (nb - 1) + 0 * na, "nanb": na * nb,
    }
    return {k: float(np.sum(probs * vals[k])) for k in _OUTPUT_NAMES}


def oracle_output_moments(params: InterferometerParams, cutoff: int | None = None,
                          rtol: float = 1e-9) -> dict[str, float]:
    """Normalized output expectations at ``params.phi`` (normally ordered names)."""

    def compute(n):
        st = _distribution_stats(_SectorDensity(params, n).output_distribution(params, params.phi))
        return np.array([st[k] for k in _OUTPUT_NAMES])

    value, _ = converged(compute, cutoff or default_cutoff(params), rtol)
    return dict(zip(_OUTPUT_NAMES, value.tolist()))


def _fd_sensitivity(sd: _SectorDensity, params: InterferometerParams, phi: float, dphi: float) -> float:
    mid = _distribution_stats(sd.output_distribution(params, phi))
    up = _distribution_stats(sd.output_distribution(params, phi + dphi))["X"]
    down = _distribution_stats(sd.output_distribution(params, phi - dphi))["X"]
    slope = (up - down) / (2 * dphi)
    var = max(mid["X2"] - mid["X"] ** 2, 0.0)
    # rounding noise of the difference quotient; below it the fringe is flat
    if abs(slope) < 1e-12 * max(abs(mid["X"]), 1.0) / dphi:
        return math.inf
    return math.sqrt(var) / abs(slope)


def oracle_sensitivity_curve(params: InterferometerParams, phis: Sequence[float], dphi: float = 1e-5,
                             cutoff: int | None = None, rtol: float = 1e-9) -> np.ndarray:
    """:func:`oracle_sensitivity` at several phases, sharing one simulated lossy state."""
    if not 1e-6 <= dphi <= 1e-3:
        raise ValueError("dphi must lie in [1e-6, 1e-3]")
    phis = [float(x) for x in phis]

    def compute(n):
        sd = _SectorDensity(params, n)
        return np.array([_fd_sensitivity(sd, params, phi, dphi) for phi in phis])

    value, _ = converged(compute, cutoff or default_cutoff(params), rtol)
    return value


def oracle_sensitivity(params: InterferometerParams, dphi: float = 1e-5, cutoff: int | None = None,
                       rtol: float = 1e-9) -> float:
    """Error-propagation sensitivity from simulated output states at ``params.phi``.

    The slope of <X> is a central difference with step ``dphi``; the
    variance is exact.  Flat fringes give ``inf``.
    """
    return float(oracle_sensitivity_curve(params, [params.phi], dphi, cutoff, rtol)[0])


def oracle_output_report(params: InterferometerParams, dphi: float = 1e-5, cutoff: int | None = None,
                         rtol: float = 1e-9) -> dict[str, float]:
    """Output moments and finite-difference sensitivity from one convergence run."""
    if not 1e-6 <= dphi <= 1e-3:
        raise ValueError("dphi must lie in [1e-6, 1e-3]")
    names = _OUTPUT_NAMES + ("delta_phi",)

    def compute(n):
        sd = _SectorDensity(params, n)
        st = _distribution_stats(sd.output_distribution(params, params.phi))
        return np.array([st[k] for k in _OUTPUT_NAMES] + [_fd_sensitivity(sd, params, params.phi, dphi)])

    value, n = converged(compute, cutoff or default_cutoff(params), rtol)
    out = dict(zip(names, value.tolist()))
    out["cutoff"] = n
    return out


def oracle_mode_a_stats(params: InterferometerParams, cutoff: int | None = None,
                        rtol: float = 1e-9) -> tuple[float, float]:
    """Mean and variance of ``a^+ a`` on the normalized lossless subtracted state."""

    def compute(n):
        st = _subtracted_state(params, n)
        p = np.abs(st.amps) ** 2
        p = p / p.sum()
        na = np.arange(n + 1)
        pa = p.sum(axis=1)
        mean = float(pa @ na)
        return np.array([mean, float(pa @ (na - mean) ** 2)])

    value, _ = converged(compute, cutoff or default_cutoff(params), rtol)
    return float(value[0]), float(value[1])


def oracle_qfi_pure(params: InterferometerParams, delta: float = 1e-3, cutoff: int | None = None,
                    rtol: float = 1e-9, both: bool = False):
    """Pure-state Fisher information of ``exp(i phi n_a)`` on the lossless subtracted state.

    Two routes: ``4 Var(n_a)`` and the overlap estimate
    ``8 (1 - |<psi|exp(i delta n_a)|psi>|) / delta^2``.  Returns the variance
    route, or both when ``both`` is set.
    """

    def compute(n):
        st = _subtracted_state(params, n)
        p = np.abs(st.amps) ** 2
        p = p / p.sum()
        pa = p.sum(axis=1)
        na = np.arange(n + 1)
        mean = pa @ na
        var_route = 4 * float(pa @ (na - mean) ** 2)
        overlap = abs(np.sum(pa * np.exp(1j * delta * na)))
        overlap_route = 8 * (1 - overlap) / delta ** 2
        return np.array([var_route, overlap_route])

    value, _ = converged(compute, cutoff or default_cutoff(params), rtol)
    log.info("oracle QFI: variance route %.12g, overlap route %.12g", value[0], value[1])
    return (float(value[0]), float(value[1])) if both else float(value[0])
