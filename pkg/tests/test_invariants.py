import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpcocycles.cocycle import Const, Product, QpCocycle, RotPath, Sl2Map, conjugate
from qpcocycles.errors import NoHyperbolicity, NonzeroDegree
from qpcocycles.families import GOLDEN, SILVER, bounded_family, hyperbolic_constant, rotation_cocycle
from qpcocycles.invariants import Lift, fibered_rotation_number, lyapunov_exponent, oseledec_directions


def wrap(x):
    return (x + 0.5) % 1.0 - 0.5


@settings(max_examples=15)
@given(st.floats(0.0, 1.0, exclude_max=True))
def test_rotation_number_of_constant_rotation(psi):
    res = fibered_rotation_number(rotation_cocycle(GOLDEN, psi), 5000)
    assert abs(wrap(res.value - psi)) < 1e-9


@settings(max_examples=10)
@given(st.integers(-3, 3), st.floats(0.05, 0.95))
def test_conjugation_by_rotation_path_shifts_rotation(r, psi):
    base = rotation_cocycle(SILVER, psi)
    c = conjugate(Sl2Map.rot_path(r), base)
    res = fibered_rotation_number(c, 5000)
    assert abs(wrap(res.value - psi - r * SILVER)) < 1e-8


def test_bounded_family_keeps_rotation_number():
    # degree-zero conjugacy leaves the rotation number unchanged
    c, _ = bounded_family(GOLDEN, 0.25, 0.1)
    res = fibered_rotation_number(c, 100_000)
    assert abs(wrap(res.value - 0.25)) < 1e-4


def test_rotation_number_rejects_nonzero_degree():
    with pytest.raises(NonzeroDegree):
        fibered_rotation_number(QpCocycle(GOLDEN, Sl2Map.rot_path(1)), 100)


def test_lift_displacement_matches_unwrapped_angle():
    c, _ = bounded_family()
    lift = Lift(c.map, 1024)
    assert abs(lift.winding) < 1e-9
    th = np.array([0.13, 0.77])
    d = lift.displacement(th, 0.4)
    v = c.map(th) @ np.array([np.cos(0.4), np.sin(0.4)])
    assert np.allclose(np.exp(1j * (0.4 + d)), (v[:, 0] + 1j * v[:, 1]) / np.hypot(v[:, 0], v[:, 1]))


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_lyapunov_of_hyperbolic_constant(t):
    assert lyapunov_exponent(hyperbolic_constant(GOLDEN, t), 500).value == pytest.approx(t, abs=1e-9)


def test_lyapunov_vanishes_for_bounded_family():
    c, _ = bounded_family()
    assert lyapunov_exponent(c, 4000).value < 5e-3


def test_lyapunov_invariant_under_rotation_path_twist():
    d = np.diag([1.5, 1 / 1.5])
    c = QpCocycle(GOLDEN, Sl2Map(Product([Const(d), RotPath(0)])))
    assert lyapunov_exponent(c, 2000).value == pytest.approx(np.log(1.5), abs=1e-6)


def test_oseledec_directions_of_diagonal():
    es, eu, defect = oseledec_directions(hyperbolic_constant(GOLDEN, 0.5), 0.3, 200)
    assert np.allclose(np.abs(es), [0, 1], atol=1e-9)
    assert np.allclose(np.abs(eu), [1, 0], atol=1e-9)
    assert defect < 1e-9


def test_oseledec_needs_hyperbolicity():
    with pytest.raises(NoHyperbolicity):
        oseledec_directions(rotation_cocycle(GOLDEN, 0.2), 0.0, 100)
