"""Parallel-jaw grasp pose: point, approach, opening direction, depth."""

from dataclasses import dataclass

import numpy as np

UNIT_TOL = 1e-6


@dataclass(frozen=True)
class Grasp:
    """p: grasp point (mm); n: unit approach vector (surface normal);
    r: unit opening vector, perpendicular to n; d: approach depth (mm)."""

    p: np.ndarray
    n: np.ndarray
    r: np.ndarray
    d: float

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64).reshape(3)
        n = np.asarray(self.n, dtype=np.float64).reshape(3)
        r = np.asarray(self.r, dtype=np.float64).reshape(3)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "d", float(self.d))
        if abs(np.linalg.norm(n) - 1.0) > UNIT_TOL:
            raise ValueError("approach vector must be unit length")
        if abs(np.linalg.norm(r) - 1.0) > UNIT_TOL:
            raise ValueError("opening vector must be unit length")
        if abs(float(n @ r)) > UNIT_TOL:
            raise ValueError("opening vector must be perpendicular to approach")
        if self.d < 0.0:
            raise ValueError("depth must be non-negative")

    def transformed(self, tf):
        """Grasp expressed after a rigid transform of the scene."""
        return Grasp(tf.apply(self.p), tf.apply_vector(self.n),
                     tf.apply_vector(self.r), self.d)

    def as_row(self):
        return np.concatenate([self.p, self.n, self.r, [self.d]])

    @staticmethod
    def from_row(row):
        row = np.asarray(row, dtype=np.float64)
        return Grasp(row[0:3], row[3:6], row[6:9], float(row[9]))
