"""Right-hand sides of the 13-state dynamics and the spinning-top reference.

State layout (13 components): ``[q0 q1 q2 q3, wx wy wz, th1 th2 th3, ww1 ww2 ww3]``
with q the structure orientation, w the body angular velocity, th/ww the wheel
relative angles and speeds.

Two forms of the structure/wheel equations are provided:

* ``state_derivative`` - the simplified form used at runtime, where the wheel
  gyroscopic torque is folded into the structure row and wheel accelerations
  reduce to I_w^-1 tau;
* ``state_derivative_exact`` - the coupled form solved in
  (wdot_c, wdot_c + wdot_w) without that simplification.

The gravity moment is k_grav * G(q) Gamma q with k_grav = mbar_c g l / 2; the
half factor is required for consistency with the potential V = m_c r_c^T R g
(energy conservation) and with the unsimplified Lambda-matrix form.

The Euler-angle spinning-top model (symmetric body about a fixed point) is the
independent cross-check for precession/nutation/spin motions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kinematics import _G
from .model import CubliModel
from .quat import Quaternion, Vec3, _vec3


@dataclass(frozen=True)
class DynamicsFlags:
    gravity_on: bool = True
    wheels_locked: bool = False
    use_exact_form: bool = False


@dataclass(frozen=True)
class State:
    """Full 13-component dynamic state."""

    q: Quaternion
    omega_c: Vec3   # body angular velocity, rad/s
    theta_w: Vec3   # wheel relative angles, rad
    omega_w: Vec3   # wheel relative speeds, rad/s

    def __post_init__(self):
        for name in ("omega_c", "theta_w", "omega_w"):
            a = _vec3(getattr(self, name)).copy()
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    @classmethod
    def from_vector(cls, y: np.ndarray) -> "State":
        y = np.asarray(y, dtype=float)
        if y.shape != (13,):
            raise ValueError(f"expected 13-vector, got shape {y.shape}")
        return cls(Quaternion.from_array(y[:4]), y[4:7], y[7:10], y[10:13])

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.q.as_array(), self.omega_c,
                               self.theta_w, self.omega_w])

    @classmethod
    def at_rest(cls, q: Quaternion) -> "State":
        z = np.zeros(3)
        return cls(q, z, z, z)


def _derivative_raw(y: np.ndarray, tau: np.ndarray, model: CubliModel,
                    flags: DynamicsFlags) -> np.ndarray:
    """Simplified-form derivative on the raw 13-vector (integrator hot path)."""
    q = y[:4]
    w_c = y[4:7]
    w_w = y[10:13]
    if flags.wheels_locked:
        w_w = np.zeros(3)
        tau = np.zeros(3)
    G = _G(q)

    H = model.Ibar_c @ w_c + model.I_w @ w_w
    moment = np.cross(w_c, H)
    if flags.gravity_on:
        moment = moment + model.k_grav * (G @ (model.Gamma @ q))
    wdot_c = -model.Ibar_c_inv @ (moment + tau)

    ydot = np.empty(13)
    ydot[:4] = 0.5 * (G.T @ w_c)
    ydot[4:7] = wdot_c
    ydot[7:10] = w_w
    ydot[10:13] = model.I_w_inv @ tau
    return ydot


def state_derivative(s: State, tau: Vec3, model: CubliModel,
                     flags: DynamicsFlags = DynamicsFlags()) -> np.ndarray:
    """Simplified 13-state derivative; see module docstring for the layout."""
    y = s.as_vector()
    tau = _vec3(tau)
    if not (np.isfinite(y).all() and np.isfinite(tau).all()):
        raise ValueError("non-finite state or torque")
    if abs(s.q.norm - 1.0) > 1e-6:
        raise ValueError(f"orientation quaternion drifted off unit norm: |q| = {s.q.norm}")
    return _derivative_raw(y, tau, model, flags)


def _derivative_exact_raw(y: np.ndarray, tau: np.ndarray, model: CubliModel,
                          flags: DynamicsFlags) -> np.ndarray:
    q = y[:4]
    w_c = y[4:7]
    w_w = y[10:13]
    if flags.wheels_locked:
        w_w = np.zeros(3)
        tau = np.zeros(3)
    G = _G(q)

    moment = np.cross(w_c, model.Ibar_c @ w_c)
    if flags.gravity_on:
        moment = moment + model.k_grav * (G @ (model.Gamma @ q))
    wdot_c = -model.Ibar_c_inv @ (moment + tau)
    # Second block row solves for the combined rate wdot_c + wdot_w.
    combined = model.I_w_inv @ (tau - np.cross(w_c, model.I_w @ (w_c + w_w)))

    ydot = np.empty(13)
    ydot[:4] = 0.5 * (G.T @ w_c)
    ydot[4:7] = wdot_c
    ydot[7:10] = w_w
    ydot[10:13] = np.zeros(3) if flags.wheels_locked else combined - wdot_c
    return ydot


def state_derivative_exact(s: State, tau: Vec3, model: CubliModel,
                           flags: DynamicsFlags = DynamicsFlags()) -> np.ndarray:
    """Coupled-form derivative, without the w_w >> w_c simplification."""
    y = s.as_vector()
    tau = _vec3(tau)
    if not (np.isfinite(y).all() and np.isfinite(tau).all()):
        raise ValueError("non-finite state or torque")
    return _derivative_exact_raw(y, tau, model, flags)


def derivative_function(model: CubliModel, flags: DynamicsFlags,
                        torque=None):
    """Build ``f(t, y) -> ydot`` for the integrator.

    ``torque`` is a callable ``t -> tau`` (None means zero torque).
    """
    raw = _derivative_exact_raw if flags.use_exact_form else _derivative_raw
    zero = np.zeros(3)
    if torque is None:
        return lambda t, y: raw(y, zero, model, flags)
    return lambda t, y: raw(y, np.asarray(torque(t), dtype=float), model, flags)


def constant_torque(tau: Vec3):
    tau = _vec3(tau).copy()
    return lambda t: tau


def structure_equation_residual(s: State, sdot: np.ndarray, tau: Vec3,
                                model: CubliModel) -> Vec3:
    """Residual of the structure equation (zero for exact-form derivatives).

    Ibar wdot_c + w x (Ibar w_c) + I_w (wdot_c + wdot_w)
    + w x (I_w (w_c + w_w)) + k_grav G Gamma q
    """
    sdot = np.asarray(sdot, dtype=float)
    w_c, w_w = s.omega_c, s.omega_w
    wdot_c, wdot_w = sdot[4:7], sdot[10:13]
    q = s.q.as_array()
    return (model.Ibar_c @ wdot_c
            + np.cross(w_c, model.Ibar_c @ w_c)
            + model.I_w @ (wdot_c + wdot_w)
            + np.cross(w_c, model.I_w @ (w_c + w_w))
            + model.k_grav * (_G(q) @ (model.Gamma @ q)))


def wheel_equation_residual(s: State, sdot: np.ndarray, tau: Vec3,
                            model: CubliModel) -> Vec3:
    """Residual of the wheel equation: I_w(wdot_c + wdot_w) + w x (I_w(w_c + w_w)) - tau."""
    sdot = np.asarray(sdot, dtype=float)
    return (model.I_w @ (sdot[4:7] + sdot[10:13])
            + np.cross(s.omega_c, model.I_w @ (s.omega_c + s.omega_w))
            - _vec3(tau))


@dataclass(frozen=True)
class TopState:
    """Euler-angle state of the symmetric-top reference model."""

    psi: float
    theta: float
    phi: float
    psid: float
    thetad: float
    phid: float

    def as_vector(self) -> np.ndarray:
        return np.array([self.psi, self.theta, self.phi,
                         self.psid, self.thetad, self.phid])

    @classmethod
    def from_vector(cls, y: np.ndarray) -> "TopState":
        return cls(*(float(x) for x in np.asarray(y, dtype=float)))


def top_derivative_raw(y: np.ndarray, model: CubliModel) -> np.ndarray:
    """Symmetric-top equations solved for (psidd, thetadd, phidd)."""
    _, theta, _, psid, thetad, phid = y
    st, ct = math.sin(theta), math.cos(theta)
    if abs(st) < 1e-8:
        raise ValueError("top equations are singular at sin(theta) ~ 0")
    I_o, I = model.I_o, model.I_3
    mgz = model.m_c * model.params.g * model.z_G
    total_spin = psid * ct + phid
    psidd = (I * thetad * total_spin - 2.0 * I_o * psid * thetad * ct) / (I_o * st)
    thetadd = (mgz * st + I_o * psid ** 2 * st * ct - I * psid * total_spin * st) / I_o
    phidd = -psidd * ct + psid * thetad * st
    return np.array([psid, thetad, phid, psidd, thetadd, phidd])


def top_derivative(t: TopState, model: CubliModel) -> np.ndarray:
    return top_derivative_raw(t.as_vector(), model)


def steady_precession_rates(phid: float, theta: float, model: CubliModel) -> tuple:
    """Both steady-precession rates for a given spin rate and nutation angle.

    Roots of (I_o - I) cos(theta) psid^2 - I phid psid + m g z_G = 0, returned
    ascending.  Degenerates to a single linear root at cos(theta) = 0 (the
    second entry is +inf).  Raises ValueError below the minimum spin velocity.
    """
    I_o, I = model.I_o, model.I_3
    mgz = model.m_c * model.params.g * model.z_G
    a = (I_o - I) * math.cos(theta)
    if abs(a) < 1e-15:
        return (mgz / (I * phid), math.inf)
    disc = (I * phid) ** 2 - 4.0 * a * mgz
    if disc < 0.0:
        raise ValueError("spin velocity below the minimum for steady precession")
    root = math.sqrt(disc)
    r1 = (I * phid - root) / (2.0 * a)
    r2 = (I * phid + root) / (2.0 * a)
    return (r1, r2) if r1 <= r2 else (r2, r1)


def min_spin_velocity(theta: float, model: CubliModel) -> float:
    """Minimum spin rate for steady precession; 0 when cos(theta) <= 0."""
    ct = math.cos(theta)
    if ct <= 0.0:
        return 0.0
    mgz = model.m_c * model.params.g * model.z_G
    return (2.0 / model.I_3) * math.sqrt((model.I_o - model.I_3) * ct * mgz)
