import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpcocycles import complex_rotation as zr
from qpcocycles.cocycle import QpCocycle, Sl2Map, schrodinger
from qpcocycles.families import GOLDEN, bounded_family, rotation_cocycle


@given(st.floats(-5, 5), st.floats(0.01, 5))
def test_lambda_z_roundtrip(x, y):
    lam = complex(x, y)
    z = zr.z_of_lambda(lam)
    assert abs(z) < 1
    assert cmath.isclose(zr.lambda_of_z(z), lam, rel_tol=1e-9, abs_tol=1e-9)


@given(st.floats(-5, 5), st.floats(-5, -0.01))
def test_disk_half_plane_roundtrip(x, y):
    m = complex(x, y)
    tau = zr.half_plane_to_disk(m)
    assert abs(tau) < 1
    assert cmath.isclose(zr.disk_to_half_plane(tau), m, rel_tol=1e-9, abs_tol=1e-9)


def test_zeta_of_identity_is_log_radius():
    res = zr.zeta(QpCocycle(GOLDEN, Sl2Map.identity()), 0.8)
    assert res.zeta.real == pytest.approx(np.log(1 / 0.8), abs=1e-12)
    assert abs(res.zeta.imag) < 1e-12


@settings(max_examples=6)
@given(st.floats(0.05, 0.45), st.floats(0.5, 0.95), st.floats(-1.0, 1.0))
def test_zeta_of_rotation_closed_form(psi, r, arg):
    z = r * np.exp(1j * arg)
    res = zr.zeta(rotation_cocycle(GOLDEN, psi), z)
    assert res.zeta.real == pytest.approx(-np.log(r), abs=1e-10)
    expected = (psi + arg / (2 * np.pi)) % 1.0
    assert abs((res.rotation - expected + 0.5) % 1 - 0.5) < 1e-10


@pytest.fixture(scope="module")
def family():
    return bounded_family(GOLDEN, 0.25, 0.1)[0]


def test_section_is_invariant_and_unique(family):
    s = zr.invariant_section(family, 0.9)
    assert s.residual < 1e-10
    assert s.uniqueness < 1e-10
    assert np.all(np.abs(s.tau) < 1)


def test_real_part_is_lyapunov(family):
    res = zr.zeta(family, 0.9 * np.exp(0.3j))
    assert abs(res.zeta.real - res.re_check) < 1e-3
    assert abs(res.zeta.imag - res.im_check) < 1e-6


def test_zeta_is_holomorphic(family):
    assert zr.cauchy_riemann_residual(family, 0.7 + 0.2j) < 1e-6


def test_boundary_value_matches_rotation_number(family):
    from qpcocycles.invariants import fibered_rotation_number

    lim, vals = zr.boundary_value(family, 0.0)
    assert len(vals) == 3 and abs(lim.real) < 1e-4
    rho = fibered_rotation_number(family, 100_000).value
    assert abs((zr.rotation_from_zeta(lim) - rho + 0.5) % 1 - 0.5) < 1e-3


def test_ij_identity_on_rotation_is_exact():
    res = zr.ij_defect(rotation_cocycle(GOLDEN, 0.2), 0.5 - 0.05j)
    assert res.I == pytest.approx(4.0, abs=1e-9)
    assert res.J == pytest.approx(1j, abs=1e-9)
    assert abs(res.defect) < 1e-8


def test_ij_defect_nonnegative(family):
    res = zr.ij_defect(family, 0.5 - 0.05j)
    assert res.defect >= -1e-6
    assert np.all(res.m_minus.imag < 0) and np.all(res.m_plus.imag > 0)


def test_schrodinger_complexification():
    c = QpCocycle(GOLDEN, schrodinger([(1, [1.0, 0.0])], 0.3))
    assert zr.inverse_identity_residual(zr.schrodinger_complexify(c, 0.2 - 0.1j)) < 1e-12
    assert zr.schrodinger_ij_defect(c, 0.3 - 0.05j).defect >= -1e-6


def test_dw_dlambda_is_finite(family):
    d = zr.dw_dlambda(family, 0.5 + 0.05j)
    assert np.isfinite(d.real) and np.isfinite(d.imag)
