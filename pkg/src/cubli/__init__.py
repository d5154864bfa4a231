"""Quaternion-based rigid body simulation of a reaction-wheel cube.

The package models a cube balancing on one corner with three internal
reaction wheels.  The orientation is carried as a unit quaternion and the
equations of motion come from the Lagrangian in quaternion coordinates, so
there is no coordinate singularity anywhere on SO(3).  Euler angles are
derived output only.

Entry points:

* :mod:`cubli.model` builds the physical constants from raw parameters,
* :mod:`cubli.dynamics` provides the state derivative and the symmetric-top
  cross-check model,
* :mod:`cubli.integrate` is the fixed-step RK4 driver,
* :mod:`cubli.analysis` computes energy/momentum invariants and Poinsot
  traces,
* :mod:`cubli.cli` is the ``cubli`` command line front end.
"""

from .model import CubliModel, CubliParams, build_model, equilibria
from .dynamics import DynamicsFlags, State
from .integrate import IntegratorConfig, Trajectory, simulate
from .quat import Quaternion

__all__ = [
    "CubliModel",
    "CubliParams",
    "DynamicsFlags",
    "IntegratorConfig",
    "Quaternion",
    "State",
    "Trajectory",
    "build_model",
    "equilibria",
    "simulate",
]

__version__ = "0.1.0"
