"""Rigid transforms (rotation + translation, mm)."""

from dataclasses import dataclass, field

import numpy as np

ORTHO_TOL = 1e-9


@dataclass(frozen=True)
class RigidTransform:
    """Proper rigid transform: x -> R @ x + t."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)
        if not np.allclose(r.T @ r, np.eye(3), atol=1e-8):
            raise ValueError("rotation is not orthonormal")
        if not np.isclose(np.linalg.det(r), 1.0, atol=1e-8):
            raise ValueError("rotation determinant is not +1")

    @staticmethod
    def identity():
        return RigidTransform()

    @staticmethod
    def from_rotvec(axis, angle, translation=None):
        """Rotation of `angle` radians about the unit `axis` (Rodrigues)."""
        a = np.asarray(axis, dtype=np.float64)
        a = a / np.linalg.norm(a)
        k = np.array([[0.0, -a[2], a[1]],
                      [a[2], 0.0, -a[0]],
                      [-a[1], a[0], 0.0]])
        r = np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)
        t = np.zeros(3) if translation is None else translation
        return RigidTransform(r, t)

    def apply(self, points):
        """Transform points, shape (3,) or (N,3)."""
        p = np.asarray(points, dtype=np.float64)
        return p @ self.rotation.T + self.translation

    def apply_vector(self, vectors):
        """Rotate direction vectors (no translation)."""
        v = np.asarray(vectors, dtype=np.float64)
        return v @ self.rotation.T

    def compose(self, other):
        """self after other: composed(x) = self(other(x))."""
        return RigidTransform(self.rotation @ other.rotation,
                              self.rotation @ other.translation
                              + self.translation)

    def inverse(self):
        rt = self.rotation.T
        return RigidTransform(rt, -rt @ self.translation)


def rotate_about_axis(vector, axis, angle):
    """Rodrigues rotation of a single vector about a unit axis."""
    a = np.asarray(axis, dtype=np.float64)
    v = np.asarray(vector, dtype=np.float64)
    c = np.cos(angle)
    s = np.sin(angle)
    return v * c + np.cross(a, v) * s + a * np.dot(a, v) * (1.0 - c)


def orthonormal_tangents(normal):
    """Deterministic tangent pair (t1, t2) completing `normal` to a frame."""
    n = np.asarray(normal, dtype=np.float64)
    # pick the global axis least parallel to n
    k = int(np.argmin(np.abs(n)))
    e = np.zeros(3)
    e[k] = 1.0
    t1 = np.cross(n, e)
    t1 = t1 / np.linalg.norm(t1)
    t2 = np.cross(n, t1)
    return t1, t2
