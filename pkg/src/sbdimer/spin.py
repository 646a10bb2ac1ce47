"""Fixed two-component spin directions."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

NORM_TOL = 1e-12


@dataclass(frozen=True)
class SpinProjection:
    """Real spin vector c_up |up> + c_down |down> with unit norm."""

    c_up: float
    c_down: float

    def __post_init__(self):
        if abs(self.c_up ** 2 + self.c_down ** 2 - 1.0) > NORM_TOL:
            raise DomainError(
                f"spin projection ({self.c_up}, {self.c_down}) is not normalized"
            )

    @classmethod
    def normalized(cls, c_up: float, c_down: float) -> "SpinProjection":
        n = math.hypot(c_up, c_down)
        if n == 0:
            raise DomainError("cannot normalize a zero spin vector")
        return cls(c_up / n, c_down / n)

    def as_tuple(self) -> tuple[float, float]:
        return (self.c_up, self.c_down)


SPIN_UP = SpinProjection(1.0, 0.0)
SPIN_DOWN = SpinProjection(0.0, 1.0)
SPIN_SYMMETRIC = SpinProjection.normalized(1.0, 1.0)
