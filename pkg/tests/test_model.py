import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cubli.kinematics import build_G
from cubli.model import (GAMMA, CubliParams, build_model, equilibria,
                         lambda_matrix, load_params, parallel_axis,
                         principal_axes, tilted_orientation)
from cubli.quat import AxisAngle, from_axis_angle, quat_product, rotate_passive

from conftest import random_unit_quats

DIAG = np.array([1.0, 1.0, 1.0]) / math.sqrt(3.0)


class TestParams:
    def test_defaults(self):
        p = CubliParams()
        assert p.l == 0.15
        assert p.m_s == 0.40
        assert p.m_w == 0.15
        assert p.g == 9.81

    @pytest.mark.parametrize("kw", [
        {"l": -1.0}, {"m_s": 0.0}, {"g": math.inf}, {"I_wxx": 1e-5},
    ])
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            CubliParams(**kw)

    def test_param_file_roundtrip(self, tmp_path):
        f = tmp_path / "params.txt"
        f.write_text(
            "# tweaked cube\n"
            "side_length = 0.2\n"
            "mass_wheel = 0.1   # lighter wheels\n"
        )
        p = load_params(f)
        assert p.l == 0.2
        assert p.m_w == 0.1
        assert p.m_s == 0.40  # untouched default

    def test_param_file_unknown_key(self, tmp_path):
        f = tmp_path / "params.txt"
        f.write_text("side_len = 0.2\n")
        with pytest.raises(ValueError, match="side_len"):
            load_params(f)


class TestParallelAxis:
    def test_known_shift(self):
        # point mass at distance d from the axis: I = m d^2 about the
        # perpendicular axes, 0 about the offset direction
        I = parallel_axis(np.zeros((3, 3)), 2.0, np.array([3.0, 0.0, 0.0]))
        assert np.allclose(np.diag(I), [0.0, 18.0, 18.0])

    @given(st.floats(0.0, 10.0), st.integers(0, 10 ** 6))
    def test_added_term_psd(self, m, seed):
        r = np.random.default_rng(seed).normal(size=3)
        I = parallel_axis(np.zeros((3, 3)), m, r)
        assert np.all(np.linalg.eigvalsh(I) >= -1e-12)

    def test_rejects_negative_mass(self):
        with pytest.raises(ValueError):
            parallel_axis(np.eye(3), -1.0, np.zeros(3))


class TestAssembly:
    """Derived constants against independently hand-computed values."""

    def test_inertia_entries(self, model):
        assert np.allclose(np.diag(model.Ibar_c), 9.955e-3, rtol=1e-9)
        off = model.Ibar_c[~np.eye(3, dtype=bool)]
        assert np.allclose(off, -3.09375e-3, rtol=1e-9)

    def test_principal_moments(self, model):
        assert model.I_o == pytest.approx(1.304875e-2, rel=1e-9)
        assert model.I_3 == pytest.approx(3.7675e-3, rel=1e-9)

    def test_masses_and_com(self, model):
        assert model.m_c == 0.85
        assert model.mbar_c == 0.70
        # identity m_c r_c = mbar_c (l/2) 1
        expected = model.mbar_c * (model.params.l / 2.0) * np.ones(3)
        assert np.allclose(model.m_c * model.r_c, expected, atol=1e-17)
        assert model.z_G == pytest.approx(0.1069796087, rel=1e-9)

    def test_gravity_coefficient(self, model):
        assert model.k_grav == pytest.approx(0.70 * 9.81 * 0.075, rel=1e-12)

    def test_inverse_is_exact(self, model):
        assert np.allclose(model.Ibar_c @ model.Ibar_c_inv, np.eye(3),
                           atol=1e-14)

    def test_principal_rotation_orthonormal(self, model):
        P = model.principal_rotation
        assert np.allclose(P @ P.T, np.eye(3), atol=1e-15)
        assert np.allclose(P[2], DIAG)
        # diagonalizes the inertia tensor
        D = P @ model.Ibar_c @ P.T
        assert np.allclose(D, np.diag([model.I_o, model.I_o, model.I_3]),
                           atol=1e-15)

    def test_principal_axes_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            principal_axes(np.diag([1.0, 2.0, 3.0]))

    def test_scales_with_parameters(self):
        # doubling every mass doubles the inertia tensor and k_grav
        p = CubliParams(m_s=0.80, m_w=0.30, I_sxx=4e-3, I_wxx=2e-4, I_wyy=8e-5)
        m2 = build_model(p)
        m1 = build_model()
        assert np.allclose(m2.Ibar_c, 2.0 * m1.Ibar_c, rtol=1e-12)
        assert m2.k_grav == pytest.approx(2.0 * m1.k_grav, rel=1e-12)
        assert np.allclose(m2.r_c, m1.r_c, rtol=1e-12)


class TestEquilibria:
    def test_unit_norm(self, model):
        eq = equilibria(model)
        assert eq.q_s.is_unit() and eq.q_u.is_unit()

    def test_diagonal_alignment(self, model):
        eq = equilibria(model)
        z = np.array([0.0, 0.0, 1.0])
        assert np.allclose(rotate_passive(z, eq.q_u), DIAG, atol=1e-9)
        assert np.allclose(rotate_passive(z, eq.q_s), -DIAG, atol=1e-9)

    def test_printed_components(self, model):
        eq = equilibria(model)
        assert np.allclose(eq.q_u.as_array(), [0.89, 0.33, -0.33, 0.0],
                           atol=5e-3)
        assert np.allclose(eq.q_s.as_array(), [0.46, -0.63, 0.63, 0.0],
                           atol=5e-3)

    def test_gravity_term_vanishes(self, model):
        eq = equilibria(model)
        for q in (eq.q_s, eq.q_u):
            arr = q.as_array()
            resid = build_G(q) @ (GAMMA @ arr)
            assert np.abs(resid).max() <= 1e-9

    def test_diagonal_spin_stays_equilibrium(self, model):
        # composing any diagonal-axis rotation preserves the equilibrium
        q_u = equilibria(model).q_u
        for angle in (0.7, -2.1, 3.0):
            q = quat_product(q_u, from_axis_angle(AxisAngle(DIAG, angle)))
            arr = q.as_array()
            resid = build_G(q) @ (GAMMA @ arr)
            assert np.abs(resid).max() <= 1e-9

    def test_potential_energy_extremes(self, model):
        from cubli.analysis import mechanical_energy
        from cubli.dynamics import State
        eq = equilibria(model)
        mgz = model.m_c * model.params.g * model.z_G
        _, _, V_s = mechanical_energy(State.at_rest(eq.q_s), model)
        _, _, V_u = mechanical_energy(State.at_rest(eq.q_u), model)
        assert V_s == pytest.approx(-mgz, rel=1e-12)
        assert V_u == pytest.approx(+mgz, rel=1e-12)

    def test_tilted_orientation_angle(self, model):
        z = np.array([0.0, 0.0, 1.0])
        for deg in (0.0, 10.0, 37.0):
            q = tilted_orientation(math.radians(deg))
            d = rotate_passive(z, q)
            assert math.degrees(math.acos(np.clip(d @ DIAG, -1, 1))) == \
                pytest.approx(deg, abs=1e-9)


def test_lambda_matrix_matches_gamma_form(model, rng):
    # m_c Lambda q == k_grav Gamma q for every unit quaternion: the
    # unsimplified gravity matrix and the integer-matrix form agree.
    L = lambda_matrix(model)
    for arr in random_unit_quats(rng, 200):
        lhs = model.m_c * (L @ arr)
        rhs = model.k_grav * (GAMMA @ arr)
        assert np.allclose(lhs, rhs, atol=1e-12)
