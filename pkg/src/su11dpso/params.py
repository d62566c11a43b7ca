"""Physical parameter record shared by every computation."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

__all__ = ["InterferometerParams", "DegenerateStateError", "MODES"]

# Named subtraction settings: (s, t) and whether the order m is forced to 0.
MODES = {
    "standard": None,
    "mode_a": (1.0, 0.0),
    "mode_b": (0.0, 1.0),
    "dpso": None,
}


class DegenerateStateError(ArithmeticError):
    """The requested parameter point has no well-defined normalized state."""


@dataclass(frozen=True)
class InterferometerParams:
    """All knobs of the interferometer.

    ``g`` is the common OPA gain, ``alpha`` the coherent amplitude on mode a,
    ``(s, t)`` the real subtraction weights of ``(s a + t b)^m``, ``T`` the
    transmissivity of both internal loss beam splitters, ``phi`` the phase on
    mode a, ``eta`` the mode-a loss used by the lossy Fisher information, and
    ``theta1``/``theta2`` the OPA phases.  ``s + t = 1`` is enforced unless
    ``allow_free_st`` is set.
    """

    g: float = 1.0
    alpha: complex = 1.0
    s: float = 0.5
    t: float = 0.5
    m: int = 1
    T: float = 1.0
    phi: float = 1.0
    eta: float = 1.0
    theta1: float = 0.0
    theta2: float = math.pi
    allow_free_st: bool = False

    def __post_init__(self):
        if isinstance(self.m, bool) or int(self.m) != self.m or self.m < 0:
            raise ValueError(f"m must be a non-negative integer, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))
        if not self.g >= 0:
            raise ValueError(f"g must be >= 0, got {self.g}")
        if not 0 <= self.T <= 1:
            raise ValueError(f"T must lie in [0, 1], got {self.T}")
        if not 0 <= self.eta <= 1:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")
        if not self.allow_free_st:
            if not 0 <= self.s <= 1:
                raise ValueError(f"s must lie in [0, 1], got {self.s}")
            if abs(self.s + self.t - 1) > 1e-12:
                raise ValueError(f"s + t must equal 1, got s={self.s}, t={self.t}")

    @classmethod
    def with_t(cls, t: float, **kw) -> "InterferometerParams":
        return cls(s=1.0 - t, t=t, **kw)

    def replace(self, **changes) -> "InterferometerParams":
        # Keep s + t = 1 when only one of them is changed.
        if "t" in changes and "s" not in changes and not self.allow_free_st:
            changes["s"] = 1.0 - changes["t"]
        elif "s" in changes and "t" not in changes and not self.allow_free_st:
            changes["t"] = 1.0 - changes["s"]
        return dataclasses.replace(self, **changes)

    def for_mode(self, mode: str) -> "InterferometerParams":
        """Parameters with the subtraction weights of a named mode.

        ``standard`` drops the subtraction (m=0); ``dpso`` keeps the current
        weights, which the optimizer then overrides.
        """
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}; choose from {sorted(MODES)}")
        if mode == "standard":
            return self.replace(m=0)
        if mode == "dpso":
            return self
        s, t = MODES[mode]
        return self.replace(s=s, t=t)

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        a = complex(self.alpha)
        d["alpha"] = a.real if a.imag == 0 else a
        return d
