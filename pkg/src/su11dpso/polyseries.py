"""Truncated sparse polynomials in the six generating-function variables.

A :class:`SparsePoly` stores complex coefficients keyed by packed exponent
vectors ``(e3, e4, e5, e6, e7, e8)``, one byte per exponent.  All products are
truncated at total degree ``cap``; an optional per-variable ``bound`` prunes
terms that cannot divide a requested target monomial, which keeps the
extraction exact while skipping useless work.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping, NamedTuple

__all__ = [
    "NVARS",
    "ExponentVector",
    "PolyContractError",
    "SparsePoly",
    "poly_add",
    "poly_mul",
    "poly_exp",
    "extract_derivative",
]

NVARS = 6
_FIELD_BITS = 8
_FIELD_MASK = (1 << _FIELD_BITS) - 1
_MAX_EXPONENT = 63
# Guard bit of every field; borrow out of a field clears it.
_GUARDS = sum(0x80 << (_FIELD_BITS * i) for i in range(NVARS))


class PolyContractError(ValueError):
    """Raised when a polynomial operation is called outside its contract."""


class ExponentVector(NamedTuple):
    e3: int = 0
    e4: int = 0
    e5: int = 0
    e6: int = 0
    e7: int = 0
    e8: int = 0

    @property
    def degree(self) -> int:
        return sum(self)

    def pack(self) -> int:
        key = 0
        for i, e in enumerate(self):
            if not 0 <= e <= _MAX_EXPONENT:
                raise PolyContractError(f"exponent {e} outside [0, {_MAX_EXPONENT}]")
            key |= e << (_FIELD_BITS * i)
        return key

    @classmethod
    def unpack(cls, key: int) -> "ExponentVector":
        return cls(*((key >> (_FIELD_BITS * i)) & _FIELD_MASK for i in range(NVARS)))

    @classmethod
    def unit(cls, var: int, power: int = 1) -> "ExponentVector":
        e = [0] * NVARS
        e[var] = power
        return cls(*e)


def _as_exponent(k) -> ExponentVector:
    if isinstance(k, ExponentVector):
        return k
    k = tuple(int(x) for x in k)
    if len(k) != NVARS:
        raise PolyContractError(f"exponent vector needs {NVARS} entries, got {len(k)}")
    return ExponentVector(*k)


def _within(key: int, bound_guarded: int) -> bool:
    return ((bound_guarded - key) & _GUARDS) == _GUARDS


class SparsePoly:
    """Polynomial in lambda_3..lambda_8 truncated at total degree ``cap``.

    ``terms`` maps packed exponent keys to complex coefficients.  Use
    :meth:`from_terms` to build one from exponent tuples.  Instances are
    treated as immutable.
    """

    __slots__ = ("cap", "bound", "_terms", "_bound_guarded")

    def __init__(self, cap: int, terms: Mapping[int, complex] | None = None,
                 bound: ExponentVector | None = None):
        if not 0 <= cap <= _MAX_EXPONENT:
            raise PolyContractError(f"cap must lie in [0, {_MAX_EXPONENT}]")
        self.cap = int(cap)
        self.bound = None if bound is None else _as_exponent(bound)
        self._bound_guarded = None if self.bound is None else self.bound.pack() | _GUARDS
        kept = {}
        for key, c in (terms or {}).items():
            if c == 0:
                continue
            if _key_degree(key) > self.cap:
                continue
            if self._bound_guarded is not None and not _within(key, self._bound_guarded):
                continue
            kept[key] = complex(c)
        self._terms = kept

    @classmethod
    def from_terms(cls, cap: int, terms: Mapping | Iterable, bound=None) -> "SparsePoly":
        items = terms.items() if isinstance(terms, Mapping) else terms
        packed: dict[int, complex] = {}
        for k, c in items:
            key = _as_exponent(k).pack()
            packed[key] = packed.get(key, 0) + c
        return cls(cap, packed, bound)

    @classmethod
    def constant(cls, cap: int, c: complex = 1.0, bound=None) -> "SparsePoly":
        return cls(cap, {0: c}, bound)

    @classmethod
    def variable(cls, cap: int, var: int, coeff: complex = 1.0, bound=None) -> "SparsePoly":
        return cls(cap, {ExponentVector.unit(var).pack(): coeff}, bound)

    @property
    def terms(self) -> dict[ExponentVector, complex]:
        return {ExponentVector.unpack(k): c for k, c in self._terms.items()}

    @property
    def packed_terms(self) -> Mapping[int, complex]:
        return self._terms

    def coefficient(self, k) -> complex:
        return self._terms.get(_as_exponent(k).pack(), 0j)

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparsePoly):
            return NotImplemented
        return self.cap == other.cap and self._terms == other._terms

    def __repr__(self) -> str:
        shown = ", ".join(f"{tuple(k)}: {c:.6g}" for k, c in list(self.terms.items())[:6])
        more = "" if len(self) <= 6 else f", ... ({len(self)} terms)"
        return f"SparsePoly(cap={self.cap}, {{{shown}{more}}})"

    def __add__(self, other: "SparsePoly") -> "SparsePoly":
        return poly_add(self, other)

    def __neg__(self) -> "SparsePoly":
        return self.scale(-1)

    def __sub__(self, other: "SparsePoly") -> "SparsePoly":
        return poly_add(self, -other)

    def __mul__(self, other):
        if isinstance(other, SparsePoly):
            return poly_mul(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, c: complex) -> "SparsePoly":
        return SparsePoly(self.cap, {k: v * c for k, v in self._terms.items()}, self.bound)

    def homogeneous_parts(self) -> list[dict[int, complex]]:
        parts: list[dict[int, complex]] = [{} for _ in range(self.cap + 1)]
        for k, c in self._terms.items():
            parts[_key_degree(k)][k] = c
        return parts


def _key_degree(key: int) -> int:
    d = 0
    while key:
        d += key & _FIELD_MASK
        key >>= _FIELD_BITS
    return d


def _merged_bound(a: SparsePoly, b: SparsePoly):
    if a.bound is None:
        return b.bound
    if b.bound is None:
        return a.bound
    return ExponentVector(*(min(x, y) for x, y in zip(a.bound, b.bound)))


def _check_caps(a: SparsePoly, b: SparsePoly) -> None:
    if a.cap != b.cap:
        raise PolyContractError(f"cap mismatch: {a.cap} != {b.cap}")


def poly_add(a: SparsePoly, b: SparsePoly) -> SparsePoly:
    _check_caps(a, b)
    out = dict(a.packed_terms)
    for k, c in b.packed_terms.items():
        out[k] = out.get(k, 0) + c
    return SparsePoly(a.cap, out, _merged_bound(a, b))


def poly_mul(a: SparsePoly, b: SparsePoly) -> SparsePoly:
    """Product of ``a`` and ``b`` with every term above ``cap`` dropped."""
    _check_caps(a, b)
    cap = a.cap
    bound = _merged_bound(a, b)
    guarded = None if bound is None else bound.pack() | _GUARDS
    bterms = [(k, c, _key_degree(k)) for k, c in b.packed_terms.items()]
    out: dict[int, complex] = {}
    for ka, ca in a.packed_terms.items():
        da = _key_degree(ka)
        for kb, cb, db in bterms:
            if da + db > cap:
                continue
            k = ka + kb
            if guarded is not None and not _within(k, guarded):
                continue
            out[k] = out.get(k, 0) + ca * cb
    return SparsePoly(cap, out, bound)


def poly_exp(w: SparsePoly) -> SparsePoly:
    """Truncated ``exp(w)`` for ``w`` without constant term.

    Uses the degree recurrence ``n f_n = sum_j j w_j f_{n-j}`` obtained by
    applying the Euler operator to ``f = exp(w)``, with ``f_n`` and ``w_j`` the
    homogeneous parts.  Every coefficient up to ``cap`` is exact.
    """
    if w.packed_terms.get(0, 0) != 0:
        raise PolyContractError("poly_exp needs a polynomial with zero constant term")
    cap = w.cap
    guarded = None if w.bound is None else w.bound.pack() | _GUARDS
    wparts = [list(p.items()) for p in w.homogeneous_parts()]
    f: list[dict[int, complex]] = [{0: 1.0 + 0j}]
    for n in range(1, cap + 1):
        fn: dict[int, complex] = {}
        for j in range(1, n + 1):
            wj = wparts[j]
            prev = f[n - j]
            if not wj or not prev:
                continue
            scale = j / n
            for kw, cw in wj:
                cw = cw * scale
                for kf, cf in prev.items():
                    k = kw + kf
                    if guarded is not None and not _within(k, guarded):
                        continue
                    fn[k] = fn.get(k, 0) + cw * cf
        f.append(fn)
    out: dict[int, complex] = {}
    for part in f:
        out.update(part)
    return SparsePoly(cap, out, w.bound)


def extract_derivative(p: SparsePoly, k) -> complex:
    """Mixed partial derivative at the origin of the function ``p`` represents."""
    k = _as_exponent(k)
    if k.degree > p.cap:
        raise PolyContractError(f"derivative order {k.degree} exceeds cap {p.cap}")
    if p.bound is not None and any(e > b for e, b in zip(k, p.bound)):
        raise PolyContractError(f"exponent {tuple(k)} outside bound {tuple(p.bound)}")
    weight = math.prod(math.factorial(e) for e in k)
    return p.coefficient(k) * weight
