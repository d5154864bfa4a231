"""Quaternion kinematics: Lagrange matrix, rate maps, and Z-X-Z Euler angles.

The 3x4 Lagrange matrix G relates quaternion rates to body angular velocity,
``omega = 2 G qdot``, and satisfies ``G G^T = I`` and ``G q = 0`` for unit
quaternions.  Euler angles use the classical 3-1-3 (Z-X-Z) precession /
nutation / spin set, extracted in the *principal* body frame whose third axis
is the cube diagonal; they are for reporting only, the quaternion is always
the source of truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quat import Quaternion, Vec3, _require_unit, _vec3, rotation_matrix

GIMBAL_TOL = 1e-6


def _G(q: np.ndarray) -> np.ndarray:
    """Lagrange matrix from raw components [q0,q1,q2,q3]."""
    q0, q1, q2, q3 = q
    return np.array([
        [-q1, q0, q3, -q2],
        [-q2, -q3, q0, q1],
        [-q3, q2, -q1, q0],
    ])


def build_G(q: Quaternion) -> np.ndarray:
    """3x4 Lagrange matrix G(q)."""
    return _G(q.as_array())


def build_Omega(omega: Vec3) -> np.ndarray:
    """4x4 skew matrix with ``qdot = 0.5 * Omega @ q``."""
    wx, wy, wz = _vec3(omega)
    return np.array([
        [0.0, -wx, -wy, -wz],
        [wx, 0.0, wz, -wy],
        [wy, -wz, 0.0, wx],
        [wz, wy, -wx, 0.0],
    ])


def omega_tilde(omega: Vec3) -> np.ndarray:
    """Skew-symmetric cross-product matrix: ``omega_tilde(w) @ v == w x v``."""
    wx, wy, wz = _vec3(omega)
    return np.array([
        [0.0, -wz, wy],
        [wz, 0.0, -wx],
        [-wy, wx, 0.0],
    ])


def omega_from_qdot(q: Quaternion, qdot) -> Vec3:
    """Body angular velocity ``omega = 2 G(q) qdot`` (equals ``-2 Gdot q``)."""
    _require_unit(q)
    qdot = np.asarray(qdot, dtype=float)
    return 2.0 * (_G(q.as_array()) @ qdot)


def qdot_from_omega(q: Quaternion, omega: Vec3) -> np.ndarray:
    """Quaternion rate ``qdot = 0.5 G^T omega``; preserves the unit norm."""
    _require_unit(q)
    return 0.5 * (_G(q.as_array()).T @ _vec3(omega))


def _wrap_pi(a: float) -> float:
    """Wrap to (-pi, pi]."""
    a = math.fmod(a + math.pi, 2.0 * math.pi)
    if a <= 0.0:
        a += 2.0 * math.pi
    return a - math.pi


@dataclass(frozen=True)
class EulerZXZ:
    """Precession psi, nutation theta, spin phi (rad), Z-X-Z sequence.

    ``gimbal`` marks samples where theta was within GIMBAL_TOL of 0 or pi and
    the full azimuth was folded into phi (psi set to 0).
    """

    psi: float
    theta: float
    phi: float
    gimbal: bool = False

    def __post_init__(self):
        object.__setattr__(self, "psi", _wrap_pi(float(self.psi)))
        object.__setattr__(self, "phi", _wrap_pi(float(self.phi)))
        theta = float(self.theta)
        if not 0.0 <= theta <= math.pi:
            raise ValueError(f"nutation angle must lie in [0, pi], got {theta}")
        object.__setattr__(self, "theta", theta)


def _euler_matrix(psi: float, theta: float, phi: float) -> np.ndarray:
    """Passive rotation Rz(phi) Rx(theta) Rz(psi)."""
    cps, sps = math.cos(psi), math.sin(psi)
    ct, st = math.cos(theta), math.sin(theta)
    cph, sph = math.cos(phi), math.sin(phi)
    return np.array([
        [cph * cps - sph * ct * sps, cph * sps + sph * ct * cps, sph * st],
        [-sph * cps - cph * ct * sps, -sph * sps + cph * ct * cps, cph * st],
        [st * sps, -st * cps, ct],
    ])


def quat_to_euler_zxz(q: Quaternion, principal_rotation: np.ndarray) -> EulerZXZ:
    """Z-X-Z angles of the inertial -> principal-frame rotation.

    ``principal_rotation`` maps body coordinates to principal coordinates
    (rows are the principal axes); the composed matrix is P @ R(q).
    """
    M = np.asarray(principal_rotation, dtype=float) @ rotation_matrix(q)
    ct = min(1.0, max(-1.0, M[2, 2]))
    theta = math.acos(ct)
    if theta < GIMBAL_TOL or math.pi - theta < GIMBAL_TOL:
        # Singular: psi and phi act about the same axis; fold azimuth into phi.
        if ct > 0.0:
            phi = math.atan2(M[0, 1], M[0, 0])
        else:
            phi = math.atan2(-M[0, 1], M[0, 0])
        return EulerZXZ(0.0, theta, phi, gimbal=True)
    psi = math.atan2(M[2, 0], -M[2, 1])
    phi = math.atan2(M[0, 2], M[1, 2])
    return EulerZXZ(psi, theta, phi)


def euler_zxz_to_quat(e: EulerZXZ, principal_rotation: np.ndarray) -> Quaternion:
    """Inverse of quat_to_euler_zxz: rotation quaternion from Z-X-Z angles."""
    P = np.asarray(principal_rotation, dtype=float)
    R = P.T @ _euler_matrix(e.psi, e.theta, e.phi)
    return _quat_from_rotation_matrix(R)


def _quat_from_rotation_matrix(R: np.ndarray) -> Quaternion:
    """Unit quaternion with rotation_matrix(q) == R (Shepperd's method)."""
    # rotation_matrix is the passive form, i.e. the transpose of the usual
    # active direction-cosine matrix built from q.
    A = R.T
    tr = A[0, 0] + A[1, 1] + A[2, 2]
    if tr > 0.0:
        s = math.sqrt(tr + 1.0) * 2.0
        q = np.array([
            0.25 * s,
            (A[2, 1] - A[1, 2]) / s,
            (A[0, 2] - A[2, 0]) / s,
            (A[1, 0] - A[0, 1]) / s,
        ])
    else:
        i = int(np.argmax([A[0, 0], A[1, 1], A[2, 2]]))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = math.sqrt(A[i, i] - A[j, j] - A[k, k] + 1.0) * 2.0
        q = np.empty(4)
        q[0] = (A[k, j] - A[j, k]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (A[j, i] + A[i, j]) / s
        q[1 + k] = (A[k, i] + A[i, k]) / s
    q /= np.linalg.norm(q)
    if q[0] < 0.0:
        q = -q
    return Quaternion.from_array(q)


def body_rates_from_euler(e: EulerZXZ, rates, principal_rotation: np.ndarray) -> Vec3:
    """Body angular velocity (cube axes) from Z-X-Z angles and their rates.

    Forward Euler-rate kinematic map; well defined for all theta (only the
    inverse map is singular at the gimbal angles).
    """
    psid, thetad, phid = (float(x) for x in rates)
    st, ct = math.sin(e.theta), math.cos(e.theta)
    sph, cph = math.sin(e.phi), math.cos(e.phi)
    omega_principal = np.array([
        psid * st * sph + thetad * cph,
        psid * st * cph - thetad * sph,
        psid * ct + phid,
    ])
    return np.asarray(principal_rotation, dtype=float).T @ omega_principal


def euler_rates_from_body(e: EulerZXZ, omega_c: Vec3,
                          principal_rotation: np.ndarray) -> tuple:
    """Inverse of body_rates_from_euler: (psid, thetad, phid).

    Raises ValueError when |sin theta| < GIMBAL_TOL (rate map singular).
    """
    st, ct = math.sin(e.theta), math.cos(e.theta)
    if abs(st) < GIMBAL_TOL:
        raise ValueError("Euler rate map is singular at sin(theta) ~ 0")
    sph, cph = math.sin(e.phi), math.cos(e.phi)
    w1, w2, w3 = np.asarray(principal_rotation, dtype=float) @ _vec3(omega_c)
    psid = (w1 * sph + w2 * cph) / st
    thetad = w1 * cph - w2 * sph
    phid = w3 - psid * ct
    return psid, thetad, phid
