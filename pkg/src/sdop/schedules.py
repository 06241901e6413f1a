"""Scalar time functions for the stepsize and the requested approximation angle."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Sequence


class Schedule:
    def __call__(self, t: float) -> float:
        raise NotImplementedError

    def tail(self) -> "Schedule":
        """The piece that governs ``t -> inf``."""
        return self

    def sup(self) -> float:
        raise NotImplementedError

    def as_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(Schedule):
    value: float

    def __post_init__(self):
        if not (self.value >= 0 and math.isfinite(self.value)):
            raise ValueError(f"schedule value must be finite and nonnegative, got {self.value}")

    def __call__(self, t):
        return self.value

    def sup(self):
        return self.value

    def as_dict(self):
        return {"kind": "constant", "value": self.value}


@dataclass(frozen=True)
class Rational(Schedule):
    """``a / (t + b)``."""

    a: float
    b: float

    def __post_init__(self):
        if self.a < 0 or not self.b > 0:
            raise ValueError("rational schedule needs a >= 0 and b > 0")

    def __call__(self, t):
        return self.a / (t + self.b)

    def sup(self):
        return self.a / self.b

    def as_dict(self):
        return {"kind": "rational", "a": self.a, "b": self.b}


class Piecewise(Schedule):
    """Switch between schedules at given start times; the first starts at 0.

    Each piece is evaluated in absolute time, not time since its start.
    """

    def __init__(self, pieces: Sequence[tuple[float, Schedule]]):
        pieces = sorted(pieces, key=lambda p: p[0])
        if not pieces or pieces[0][0] != 0:
            raise ValueError("piecewise schedule must start at t = 0")
        self.starts = [float(s) for s, _ in pieces]
        self.parts = [p for _, p in pieces]

    def __call__(self, t):
        return self.parts[bisect.bisect_right(self.starts, t) - 1](t)

    def tail(self):
        return self.parts[-1].tail()

    def sup(self):
        return max(p.sup() for p in self.parts)

    def as_dict(self):
        return {"kind": "piecewise", "pieces": [[s, p.as_dict()] for s, p in zip(self.starts, self.parts)]}

    def __eq__(self, other):
        return isinstance(other, Piecewise) and self.as_dict() == other.as_dict()

    def __repr__(self):
        return f"Piecewise({list(zip(self.starts, self.parts))!r})"
