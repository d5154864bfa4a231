"""Quaternion algebra and rotation primitives.

Convention
----------
Scalar-first components ``[q0, q1, q2, q3]`` with ``q = q0 + q1*i + q2*j + q3*k``.
A rotation quaternion encodes a *frame* rotation: ``rotate_passive`` returns the
coordinates of a fixed vector expressed in the rotated (body) frame, via the
sandwich product ``q_conj o r o q``.  An active rotation, if ever needed, is the
same operation with the conjugate quaternion.

No operation renormalizes its inputs; functions that require a unit quaternion
check it to 1e-9 and raise ``ValueError`` otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

Vec3 = np.ndarray  # shape (3,), float

UNIT_NORM_TOL = 1e-9
AXIS_NORM_TOL = 1e-12


def _vec3(v) -> Vec3:
    a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise ValueError(f"expected 3-vector, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class Quaternion:
    """Scalar-first quaternion ``[q0, qv]``.

    Immutable value type; all algebra lives in module-level functions.
    """

    q0: float
    qv: Vec3

    def __post_init__(self):
        object.__setattr__(self, "q0", float(self.q0))
        qv = _vec3(self.qv).copy()
        qv.flags.writeable = False
        object.__setattr__(self, "qv", qv)
        if not np.isfinite(self.as_array()).all():
            raise ValueError("quaternion components must be finite")

    @classmethod
    def from_array(cls, a) -> "Quaternion":
        a = np.asarray(a, dtype=float)
        if a.shape != (4,):
            raise ValueError(f"expected 4-vector, got shape {a.shape}")
        return cls(a[0], a[1:])

    @classmethod
    def identity(cls) -> "Quaternion":
        return cls(1.0, np.zeros(3))

    def as_array(self) -> np.ndarray:
        return np.concatenate(([self.q0], self.qv))

    @property
    def norm(self) -> float:
        return math.sqrt(self.q0 ** 2 + float(self.qv @ self.qv))

    def is_unit(self, tol: float = UNIT_NORM_TOL) -> bool:
        return abs(self.norm - 1.0) <= tol


@dataclass(frozen=True)
class AxisAngle:
    """Rotation eigenaxis (unit vector) and angle in radians."""

    axis: Vec3
    angle: float

    def __post_init__(self):
        axis = _vec3(self.axis).copy()
        n = np.linalg.norm(axis)
        if abs(n - 1.0) > 1e-9:
            raise ValueError(f"axis must be unit-norm, got |axis| = {n}")
        axis.flags.writeable = False
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "angle", float(self.angle))


def quat_product(a: Quaternion, b: Quaternion) -> Quaternion:
    """Hamilton product ``a o b`` (non-commutative).

    Scalar part a0*b0 - av.bv, vector part a0*bv + b0*av + av x bv.
    """
    return Quaternion(
        a.q0 * b.q0 - float(a.qv @ b.qv),
        a.q0 * b.qv + b.q0 * a.qv + np.cross(a.qv, b.qv),
    )


def conjugate(q: Quaternion) -> Quaternion:
    return Quaternion(q.q0, -q.qv)


def from_axis_angle(a: AxisAngle) -> Quaternion:
    """Unit rotation quaternion ``[cos(phi/2), e*sin(phi/2)]``."""
    half = 0.5 * a.angle
    return Quaternion(math.cos(half), a.axis * math.sin(half))


def _require_unit(q: Quaternion):
    if not q.is_unit():
        raise ValueError(f"rotation quaternion must be unit-norm, |q| = {q.norm}")


def rotate_passive(r: Vec3, q: Quaternion) -> Vec3:
    """Coordinates of the fixed vector ``r`` in the frame rotated by ``q``.

    Sandwich product ``q_conj o [0, r] o q``; inverse transform is the same
    with the conjugate quaternion.
    """
    _require_unit(q)
    rq = Quaternion(0.0, _vec3(r))
    return quat_product(quat_product(conjugate(q), rq), q).qv


def rotation_matrix(q: Quaternion) -> np.ndarray:
    """3x3 passive rotation matrix R with ``R @ r == rotate_passive(r, q)``."""
    _require_unit(q)
    q0, qv = q.q0, q.qv
    tilde = np.array([
        [0.0, -qv[2], qv[1]],
        [qv[2], 0.0, -qv[0]],
        [-qv[1], qv[0], 0.0],
    ])
    return np.eye(3) - 2.0 * q0 * tilde + 2.0 * (tilde @ tilde)


def rodrigues(r: Vec3, axis: Vec3, phi: float) -> Vec3:
    """Rodrigues' rotation formula, passive sign convention (``r x e`` term).

    (1-cos phi)(r.e)e + cos(phi) r + sin(phi) (r x e)
    """
    e = _vec3(axis)
    n = np.linalg.norm(e)
    if abs(n - 1.0) > UNIT_NORM_TOL:
        raise ValueError(f"axis must be unit-norm, |axis| = {n}")
    r = _vec3(r)
    c, s = math.cos(phi), math.sin(phi)
    return (1.0 - c) * float(r @ e) * e + c * r + s * np.cross(r, e)
