"""Physical model assembly: inertia tensors, center of mass, equilibria.

All derived constants are built once from the raw parameters (side length,
masses, central moments of inertia) and frozen in a CubliModel:

* inertia tensors of the structure and each wheel are moved from their centers
  of mass to the pivot point with the Huygens-Steiner theorem;
* the effective structure tensor Ibar_c is the total at the pivot minus the
  wheels' axial moments, which remain as the diagonal tensor I_w;
* Ibar_c has the cube's diagonal symmetry a*I + b*(J - I) (J = all-ones), so
  its eigendecomposition is closed-form: a doubly degenerate pair I_o in the
  plane orthogonal to the cube diagonal and I_3 along the diagonal;
* the gravity moment enters the structure equation as k_grav * G(q) Gamma q
  with the constant integer matrix Gamma and k_grav = mbar_c * g * l / 2.

Gravity points along +z in the potential convention V = m_c r_c^T R(q) g_vec,
which is maximal at the unstable equilibrium (diagonal up) and minimal at the
stable one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .quat import AxisAngle, Quaternion, Vec3, from_axis_angle

# Constant structure matrix of the gravity moment term.
GAMMA = np.array([
    [1, 1, -1, 0],
    [1, -1, 0, 1],
    [-1, 0, -1, 1],
    [0, 1, 1, 1],
], dtype=float)

# Angle between the cube diagonal and a cube edge axis.
DIAGONAL_ANGLE = math.acos(1.0 / math.sqrt(3.0))

# Tilt axis used for all named orientations (perpendicular to the diagonal).
TILT_AXIS = np.array([1.0, -1.0, 0.0]) / math.sqrt(2.0)


@dataclass(frozen=True)
class CubliParams:
    """Raw physical parameters (SI units).

    Defaults are the reference design values: 0.15 m cube, 0.40 kg structure,
    three 0.15 kg wheels.
    """

    l: float = 0.15            # structure side length, m
    m_s: float = 0.40          # structure mass, kg
    m_w: float = 0.15          # wheel mass, kg
    I_sxx: float = 2e-3        # structure central moment (isotropic), kg m^2
    I_wxx: float = 1e-4        # wheel axial moment, kg m^2
    I_wyy: float = 4e-5        # wheel transverse moment, kg m^2
    g: float = 9.81            # gravitational acceleration, m/s^2

    def __post_init__(self):
        for name in ("l", "m_s", "m_w", "I_sxx", "I_wxx", "I_wyy", "g"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise ValueError(f"parameter {name} must be strictly positive, got {v}")
        if self.I_wxx <= self.I_wyy:
            raise ValueError("wheel axial moment I_wxx must exceed transverse I_wyy")


PARAM_FILE_KEYS = {
    "side_length": "l",
    "mass_structure": "m_s",
    "mass_wheel": "m_w",
    "inertia_structure_xx": "I_sxx",
    "inertia_wheel_axial": "I_wxx",
    "inertia_wheel_transverse": "I_wyy",
    "gravity": "g",
}


def load_params(path) -> CubliParams:
    """Read parameters from a flat ``key = value`` text file.

    Missing keys keep their defaults; unknown keys are an error.
    """
    kwargs = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in PARAM_FILE_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown parameter key {key!r}")
        kwargs[PARAM_FILE_KEYS[key]] = float(value)
    return CubliParams(**kwargs)


def parallel_axis(I_G: np.ndarray, m: float, r: Vec3) -> np.ndarray:
    """Huygens-Steiner shift of an inertia tensor by offset r for mass m.

    I_O = I_G + m (|r|^2 I - r r^T); the added term is positive semidefinite.
    """
    if m < 0:
        raise ValueError(f"mass must be nonnegative, got {m}")
    I_G = np.asarray(I_G, dtype=float)
    r = np.asarray(r, dtype=float)
    return I_G + m * (float(r @ r) * np.eye(3) - np.outer(r, r))


@dataclass(frozen=True)
class EquilibriumSet:
    q_s: Quaternion  # stable: cube diagonal pointing down
    q_u: Quaternion  # unstable: cube diagonal pointing up


@dataclass(frozen=True)
class CubliModel:
    """Derived constants, immutable after construction (see build_model)."""

    params: CubliParams
    Ibar_c: np.ndarray        # 3x3 effective structure inertia at the pivot
    Ibar_c_inv: np.ndarray
    I_w: np.ndarray           # 3x3 diagonal wheel axial tensor
    I_w_inv: np.ndarray
    r_c: Vec3                 # pivot -> center of mass, body frame
    m_c: float                # total mass m_s + 3 m_w
    mbar_c: float             # m_s + 2 m_w
    z_G: float                # |r_c|
    k_grav: float             # mbar_c * g * l / 2
    Gamma: np.ndarray
    principal_rotation: np.ndarray  # rows = principal axes in body coords
    I_o: float                # degenerate principal moment (axes 1, 2)
    I_3: float                # principal moment along the cube diagonal
    g_vec: Vec3               # inertial gravity vector [0, 0, g]

    def __post_init__(self):
        for name in ("Ibar_c", "Ibar_c_inv", "I_w", "I_w_inv", "r_c", "Gamma",
                     "principal_rotation", "g_vec"):
            a = np.asarray(getattr(self, name), dtype=float)
            a.flags.writeable = False
            object.__setattr__(self, name, a)


def principal_axes(Ibar_c: np.ndarray) -> tuple:
    """Closed-form eigendecomposition of a tensor with cube-diagonal symmetry.

    Requires equal diagonal entries ``a`` and equal off-diagonal entries ``b``
    (checked to 1e-12); returns (rotation, I_o, I_3) with I_o = a - b
    (degenerate pair) and I_3 = a + 2b (cube diagonal).  The in-plane axes are
    pinned to normalize([1,-1,0]) and axis3 x axis1 so Euler angles are
    reproducible.
    """
    I = np.asarray(Ibar_c, dtype=float)
    a = I[0, 0]
    b = I[0, 1]
    diag_spread = max(abs(I[0, 0] - I[1, 1]), abs(I[0, 0] - I[2, 2]))
    off = [I[0, 1], I[0, 2], I[1, 2], I[1, 0], I[2, 0], I[2, 1]]
    off_spread = max(abs(x - b) for x in off)
    if diag_spread > 1e-12 or off_spread > 1e-12:
        raise ValueError("inertia tensor lacks the cube's diagonal symmetry")
    axis3 = np.array([1.0, 1.0, 1.0]) / math.sqrt(3.0)
    axis1 = np.array([1.0, -1.0, 0.0]) / math.sqrt(2.0)
    axis2 = np.cross(axis3, axis1)
    rotation = np.vstack([axis1, axis2, axis3])
    return rotation, a - b, a + 2.0 * b


def build_model(p: CubliParams = CubliParams()) -> CubliModel:
    """Assemble all derived constants from the raw parameters."""
    half = p.l / 2.0
    r_s = np.array([half, half, half])
    r_w = [
        np.array([0.0, half, half]),
        np.array([half, 0.0, half]),
        np.array([half, half, 0.0]),
    ]
    I_sG = np.eye(3) * p.I_sxx
    I_wG = [
        np.diag([p.I_wxx, p.I_wyy, p.I_wyy]),
        np.diag([p.I_wyy, p.I_wxx, p.I_wyy]),
        np.diag([p.I_wyy, p.I_wyy, p.I_wxx]),
    ]
    I_w = np.eye(3) * p.I_wxx

    Ibar_c = parallel_axis(I_sG, p.m_s, r_s)
    for I_G, r in zip(I_wG, r_w):
        Ibar_c = Ibar_c + parallel_axis(I_G, p.m_w, r)
    Ibar_c = Ibar_c - I_w

    m_c = p.m_s + 3.0 * p.m_w
    mbar_c = p.m_s + 2.0 * p.m_w
    r_c = (p.m_s * r_s + p.m_w * sum(r_w)) / m_c

    rotation, I_o, I_3 = principal_axes(Ibar_c)

    # Closed-form inverse of a*I + b*(J - I): same symmetry class, with
    # eigenvalues 1/I_o (twice) and 1/I_3.
    a, b = Ibar_c[0, 0], Ibar_c[0, 1]
    ai = (a + b) / ((a - b) * (a + 2.0 * b))
    bi = -b / ((a - b) * (a + 2.0 * b))
    Ibar_c_inv = ai * np.eye(3) + bi * (np.ones((3, 3)) - np.eye(3))

    return CubliModel(
        params=p,
        Ibar_c=Ibar_c,
        Ibar_c_inv=Ibar_c_inv,
        I_w=I_w,
        I_w_inv=np.eye(3) / p.I_wxx,
        r_c=r_c,
        m_c=m_c,
        mbar_c=mbar_c,
        z_G=float(np.linalg.norm(r_c)),
        k_grav=mbar_c * p.g * p.l / 2.0,
        Gamma=GAMMA.copy(),
        principal_rotation=rotation,
        I_o=I_o,
        I_3=I_3,
        g_vec=np.array([0.0, 0.0, p.g]),
    )


def tilted_orientation(nutation: float) -> Quaternion:
    """Orientation with the cube diagonal tilted ``nutation`` rad off +z.

    nutation = 0 gives the unstable equilibrium (diagonal straight up).
    """
    return from_axis_angle(AxisAngle(TILT_AXIS, DIAGONAL_ANGLE - nutation))


def _snap_equilibrium(q: Quaternion) -> Quaternion:
    """Nudge an equilibrium quaternion [a, b, -b, 0] by at most a few ulps so
    that the gravity term G(q) Gamma q and |q| - 1 both evaluate to exactly
    zero in floating point.

    At an unstable equilibrium any nonzero residual, however tiny, is
    amplified exponentially, so "the state does not move" only holds if the
    computed derivative is bitwise zero.  The analytic values typically leave
    a ~1e-16 residual from rounding in cos/sin; a 1-ulp adjustment removes it.
    If no exact-zero neighbor exists the input is returned unchanged.
    """
    from .kinematics import _G  # local import avoids a module cycle at import time

    a0, b0 = q.q0, float(q.qv[0])

    def ulps(x: float, k: int) -> float:
        for _ in range(abs(k)):
            x = math.nextafter(x, math.inf if k > 0 else -math.inf)
        return x

    for i in range(-3, 4):
        for j in range(-3, 4):
            a, b = ulps(a0, i), ulps(b0, j)
            arr = np.array([a, b, -b, 0.0])
            if np.linalg.norm(arr) != 1.0:
                continue
            if np.abs(_G(arr) @ (GAMMA @ arr)).max() == 0.0:
                return Quaternion.from_array(arr)
    return q


def equilibria(model: CubliModel) -> EquilibriumSet:
    """Stable (diagonal down) and unstable (diagonal up) orientations."""
    q_u = _snap_equilibrium(tilted_orientation(0.0))
    q_s = _snap_equilibrium(
        from_axis_angle(AxisAngle(TILT_AXIS, -(math.pi - DIAGONAL_ANGLE))))
    return EquilibriumSet(q_s=q_s, q_u=q_u)


def lambda_matrix(model: CubliModel) -> np.ndarray:
    """4x4 gravity matrix of the unsimplified structure equation.

    Test oracle only: m_c * Lambda @ q equals k_grav * Gamma @ q for every
    unit q, which cross-checks the simplified gravity moment term.  Not used
    in the runtime dynamics path.
    """
    g = model.g_vec
    r = model.r_c
    gxr = np.cross(g, r)
    L = np.empty((4, 4))
    L[0, 0] = g @ r
    L[0, 1:] = -gxr
    L[1:, 0] = -gxr
    L[1:, 1:] = np.outer(g, r) + np.outer(r, g) - np.eye(3) * (g @ r)
    return L
