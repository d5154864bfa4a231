"""Derived observables and Poinsot trajectory machinery.

Energy, angular-momentum projections and center-of-mass position are computed
from a State without touching the dynamics; they back the invariant checks.

Poinsot runs integrate the torque-free (gravity off, wheels locked) dynamics
and record the angular momentum in the principal frame, where conservation of
|H| and T confines the trace to a sphere/ellipsoid intersection.  Because the
inertia tensor is axisymmetric about the cube diagonal, each intersection is a
circle of constant H3, so the family is sampled on a latitude grid with a
fixed azimuth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List

import numpy as np

from .dynamics import DynamicsFlags, State, derivative_function
from .integrate import IntegratorConfig, Trajectory, simulate
from .kinematics import EulerZXZ, quat_to_euler_zxz
from .model import CubliModel
from .quat import Quaternion, Vec3, rotation_matrix


@dataclass(frozen=True)
class Observables:
    E: float            # total mechanical energy, J
    T: float            # kinetic energy, J
    V: float            # potential energy, J
    H_body: Vec3        # Ibar_c omega_c, body frame
    H_z: float          # projection on the (unit) gravity direction
    H_diag: float       # sum of body components (sqrt(3) x diagonal projection)
    euler: EulerZXZ
    com_inertial: Vec3  # center of mass in the inertial frame, m


def mechanical_energy(s: State, model: CubliModel) -> tuple:
    """(E, T, V) with V = m_c r_c . g' and T at the simplification level of the
    runtime dynamics: T = 1/2 w_c' Ibar_c w_c + 1/2 w_w' I_w w_w.

    The w_c cross term in the wheel spin energy is the piece the fast-wheel
    simplification drops from the equations of motion, so including it here
    would break the invariant this function exists to monitor.  With zero
    wheel torque this T + V is conserved exactly by the simplified dynamics
    (I_w is a scalar multiple of the identity, so w . (w x I_w w_w) = 0).
    """
    w_c, w_w = s.omega_c, s.omega_w
    T = 0.5 * float(w_c @ (model.Ibar_c @ w_c))
    T += 0.5 * float(w_w @ (model.I_w @ w_w))
    g_body = rotation_matrix(s.q) @ model.g_vec
    V = model.m_c * float(model.r_c @ g_body)
    return T + V, T, V


def momentum_projections(s: State, model: CubliModel,
                         scale_by_g: bool = False) -> tuple:
    """(H_z, H_diag) of the structure angular momentum H = Ibar_c omega_c.

    H_z projects on the unit gravity direction in the body frame (momentum
    units); pass scale_by_g=True for the g-scaled literal variant.  H_diag is
    the plain component sum, i.e. sqrt(3) times the diagonal-axis projection.
    Both are invariants of the wheels-locked dynamics.
    """
    H = model.Ibar_c @ s.omega_c
    g_body = rotation_matrix(s.q) @ model.g_vec
    if not scale_by_g:
        g_body = g_body / model.params.g
    return float(H @ g_body), float(H.sum())


def com_inertial(s: State, model: CubliModel) -> Vec3:
    """Center of mass position in the inertial frame (body-to-inertial of r_c)."""
    return rotation_matrix(s.q).T @ model.r_c


def observables(s: State, model: CubliModel) -> Observables:
    E, T, V = mechanical_energy(s, model)
    H_z, H_diag = momentum_projections(s, model)
    return Observables(
        E=E, T=T, V=V,
        H_body=model.Ibar_c @ s.omega_c,
        H_z=H_z, H_diag=H_diag,
        euler=quat_to_euler_zxz(s.q, model.principal_rotation),
        com_inertial=com_inertial(s, model),
    )


def observer(model: CubliModel):
    return lambda s: observables(s, model)


def principal_momentum(omega_c: Vec3, model: CubliModel) -> np.ndarray:
    """Angular momentum components along the principal axes."""
    return model.principal_rotation @ (model.Ibar_c @ np.asarray(omega_c, float))


def _omega_from_principal_H(H_p: np.ndarray, model: CubliModel) -> Vec3:
    omega_p = H_p / np.array([model.I_o, model.I_o, model.I_3])
    return model.principal_rotation.T @ omega_p


def poinsot_family(mode: str, level: float, n: int, model: CubliModel) -> List[Vec3]:
    """Initial angular velocities sampled on a constant-H or constant-T level set.

    mode "H": |H| = level (sphere); mode "T": kinetic energy = level
    (ellipsoid).  Points are equally spaced in the H3 latitude with azimuth 0;
    n = 1 returns the +H3 pole.
    """
    if level <= 0.0:
        raise ValueError(f"level must be positive, got {level}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if mode not in ("H", "T"):
        raise ValueError(f"mode must be 'H' or 'T', got {mode!r}")
    fractions = np.array([1.0]) if n == 1 else np.linspace(-1.0, 1.0, n)
    family = []
    for f in fractions:
        if mode == "H":
            H3 = f * level
            H1 = math.sqrt(max(0.0, level ** 2 - H3 ** 2))
        else:
            H3_max = math.sqrt(2.0 * level * model.I_3)
            H3 = f * H3_max
            H1 = math.sqrt(max(0.0, (2.0 * level - H3 ** 2 / model.I_3) * model.I_o))
        family.append(_omega_from_principal_H(np.array([H1, 0.0, H3]), model))
    return family


@dataclass(frozen=True)
class PoinsotRun:
    omega0: Vec3
    trace: np.ndarray          # N x 3 principal-frame H samples
    H_mag: float
    T_val: float
    max_sphere_residual: float     # max |H1^2+H2^2+H3^2 - H^2|
    max_ellipsoid_residual: float  # max |H1^2/I_o + H2^2/I_o + H3^2/I_3 - 2T|
    max_H3_drift: float
    trajectory: Trajectory


def poinsot_run(omega0: Vec3, cfg: IntegratorConfig, model: CubliModel) -> PoinsotRun:
    """Torque-free run recording the principal-frame angular momentum trace."""
    flags = DynamicsFlags(gravity_on=False, wheels_locked=True)
    s0 = State(q=Quaternion.identity(), omega_c=np.asarray(omega0, float),
               theta_w=np.zeros(3), omega_w=np.zeros(3))
    traj = simulate(s0, cfg, derivative_function(model, flags))
    trace = np.array([principal_momentum(s.state.omega_c, model) for s in traj])
    H0 = trace[0]
    H_mag = float(np.linalg.norm(H0))
    inertia = np.array([model.I_o, model.I_o, model.I_3])
    T_val = float(0.5 * np.sum(H0 ** 2 / inertia))
    sphere = np.abs(np.sum(trace ** 2, axis=1) - H_mag ** 2)
    ellipsoid = np.abs(np.sum(trace ** 2 / inertia, axis=1) - 2.0 * T_val)
    return PoinsotRun(
        omega0=np.asarray(omega0, float),
        trace=trace,
        H_mag=H_mag,
        T_val=T_val,
        max_sphere_residual=float(sphere.max()),
        max_ellipsoid_residual=float(ellipsoid.max()),
        max_H3_drift=float(np.abs(trace[:, 2] - H0[2]).max()),
        trajectory=traj,
    )
