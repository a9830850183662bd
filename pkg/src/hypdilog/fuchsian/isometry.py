"""Orientation-preserving isometries as unit-determinant 2x2 matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lorentz import sl2_to_so21, so21_to_sl2


@dataclass(frozen=True)
class IsometryMap:
    a: float
    b: float
    c: float
    d: float

    @classmethod
    def from_matrix(cls, m) -> "IsometryMap":
        m = np.asarray(m, dtype=float)
        return cls(float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]))

    @classmethod
    def from_so21(cls, L: np.ndarray) -> "IsometryMap":
        return cls.from_matrix(so21_to_sl2(L))

    @classmethod
    def identity(cls) -> "IsometryMap":
        return cls(1.0, 0.0, 0.0, 1.0)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def so21(self) -> np.ndarray:
        return sl2_to_so21(self.matrix)

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> float:
        return self.a + self.d

    def is_hyperbolic(self, tol: float = 0.0) -> bool:
        return abs(self.trace) > 2.0 + tol

    @property
    def translation_length(self) -> float:
        t = abs(self.trace) / 2.0
        return 2.0 * math.acosh(t) if t > 1.0 else 0.0

    def __matmul__(self, other: "IsometryMap") -> "IsometryMap":
        return IsometryMap.from_matrix(self.matrix @ other.matrix)

    def inverse(self) -> "IsometryMap":
        return IsometryMap(self.d, -self.b, -self.c, self.a)

    def apply(self, z: complex) -> complex:
        return (self.a * z + self.b) / (self.c * z + self.d)

    def normalized(self) -> "IsometryMap":
        """Sign representative with non-negative trace."""
        if self.trace < 0:
            return IsometryMap(-self.a, -self.b, -self.c, -self.d)
        return self
