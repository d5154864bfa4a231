"""Deterministic fixed-step RK4 integration with trajectory recording.

Fixed step keeps runs bit-reproducible (golden CSV files); the quaternion is
projected back onto the unit sphere by scaling after every step, which at 4th
order keeps the pre-renormalization drift far below tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .dynamics import State

MAX_DT = 1e-2  # guard against unstable steps at the validation spin rates


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    t_end: float = 5.0
    record_every: int = 1
    renormalize: bool = True

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.dt > MAX_DT:
            raise ValueError(f"dt must be <= {MAX_DT}, got {self.dt}")
        if self.t_end < 0.0:
            raise ValueError(f"t_end must be nonnegative, got {self.t_end}")
        if not (isinstance(self.record_every, int) and self.record_every >= 1):
            raise ValueError(f"record_every must be an integer >= 1, got {self.record_every}")


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    state: State
    observables: object = None


@dataclass
class Trajectory:
    samples: List[TrajectorySample] = field(default_factory=list)

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def __getitem__(self, i):
        return self.samples[i]

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def states(self) -> np.ndarray:
        return np.array([s.state.as_vector() for s in self.samples])


class IntegrationError(RuntimeError):
    def __init__(self, t: float, message: str):
        super().__init__(f"integration failed at t = {t}: {message}")
        self.t = t


def rk4_raw(f: Callable, t: float, y: np.ndarray, dt: float) -> np.ndarray:
    """One classical Runge-Kutta step of a generic first-order ODE."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_step(s: State, t: float, dt: float, deriv: Callable,
             renormalize: bool = True) -> State:
    """RK4 update of the 13-state; ``deriv`` is ``f(t, y) -> ydot``."""
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    y = rk4_raw(deriv, t, s.as_vector(), dt)
    if not np.isfinite(y).all():
        raise IntegrationError(t, "non-finite state after step")
    if renormalize:
        y[:4] /= np.linalg.norm(y[:4])
    return State.from_vector(y)


def simulate(s0: State, cfg: IntegratorConfig, deriv: Callable,
             observer: Optional[Callable] = None) -> Trajectory:
    """Integrate from ``s0`` over [0, t_end], recording every ``record_every`` steps.

    ``observer`` maps a State to its derived observables; it runs only at
    recorded samples.  The first sample is the initial condition at t = 0 and
    the final step is shortened to land exactly on t_end.
    """
    traj = Trajectory()

    def record(t, state):
        obs = observer(state) if observer is not None else None
        traj.samples.append(TrajectorySample(t, state, obs))

    y = s0.as_vector().copy()
    record(0.0, s0)
    n_steps = int(round(cfg.t_end / cfg.dt))
    # Last partial step when t_end is not a multiple of dt.
    remainder = cfg.t_end - n_steps * cfg.dt
    if remainder > 1e-12 * max(1.0, cfg.t_end):
        n_steps += 1
    step = 0
    t = 0.0
    while step < n_steps:
        dt = min(cfg.dt, cfg.t_end - t)
        if dt <= 0.0:
            break
        y = rk4_raw(deriv, t, y, dt)
        if not np.isfinite(y).all():
            raise IntegrationError(t, "non-finite state after step")
        if cfg.renormalize:
            y[:4] /= np.linalg.norm(y[:4])
        step += 1
        t = step * cfg.dt if step < n_steps else cfg.t_end
        if step % cfg.record_every == 0 or step == n_steps:
            record(t, State.from_vector(y))
    return traj
