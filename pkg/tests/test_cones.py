import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpcocycles import cones
from qpcocycles.cocycle import Conj, ExpTrig, QpCocycle, RotPath, Sl2Map, l_operator
from qpcocycles.errors import ConeViolation
from qpcocycles.families import FOURS, GOLDEN, bounded_family


@pytest.fixture(scope="module")
def history():
    c, _ = bounded_family(FOURS, 0.25, 0.1)
    return cones.cone_recursion(cones.decompose_eta0(c, 0.5), c, 3)


def test_decomposition_of_rotation_path():
    c = QpCocycle(GOLDEN, Sl2Map.rot_path(1))
    dec = cones.decompose_eta0(c, 0.5)
    assert dec.z0 == pytest.approx(1.5 * (2 * np.pi + 1))
    assert np.allclose(dec.eta_plus - dec.eta_minus, l_operator(c.map, 256), atol=1e-10)
    assert dec.delta > 0


def test_decomposition_rejects_nonpositive_margin():
    with pytest.raises(ValueError):
        cones.decompose_eta0(QpCocycle(GOLDEN, Sl2Map.rot_path(1)), 0.0)


def test_recursion_reproduces_log_derivatives(history):
    for lvl in history.levels:
        assert lvl.difference_residual < 1e-8
        assert lvl.product_residual < 1e-10
        assert lvl.delta > 0


def test_gamma_is_previous_eta(history):
    for prev, cur in zip(history.levels, history.levels[1:]):
        assert np.array_equal(cur.gamma_plus, prev.eta_plus)
        assert np.array_equal(cur.gamma_minus, prev.eta_minus)


def test_integrated_quantities_are_monotone(history):
    qs = [cones.integrated_quantities(lvl, history.cf) for lvl in history.levels]
    assert min(cones.monotonicity_defects(qs)) >= -1e-8
    assert all(max(q.ubar_plus, q.ubar_minus) <= 2 * history.M for q in qs)


def test_decay_monitor_fields(history):
    entries = cones.decay_monitor(history)
    assert [e.k for e in entries] == [0, 1, 2, 3]
    assert all(e.epsilon >= 0 and e.rho >= 0 for e in entries)
    assert all(e.in_window for e in entries[:-1])


@pytest.mark.parametrize("r", [1, 2, 3])
def test_degree_bound_equality_for_rotation_paths(r):
    lhs, rhs, ok = cones.degree_bound_check(QpCocycle(GOLDEN, Sl2Map.rot_path(r)), r)
    assert ok and abs(lhs - rhs) < 1e-8


def test_degree_bound_strict_after_conjugation():
    b = ExpTrig([(1, [0.03, 0.0, 0.0, 0.2])])
    c = QpCocycle(GOLDEN, Sl2Map(Conj(b, RotPath(1), GOLDEN)))
    lhs, rhs, ok = cones.degree_bound_check(c, 1)
    assert ok and lhs - rhs > 1e-6


def test_degree_bound_needs_cone():
    with pytest.raises(ConeViolation):
        cones.degree_bound_check(bounded_family()[0], 0)


@settings(max_examples=20)
@given(st.integers(0, 10_000), st.integers(2, 4), st.floats(0.1, 1.0))
def test_integrated_commutator_bound(seed, p, delta):
    rng = np.random.default_rng(seed)
    th = np.linspace(0, 1, 128, endpoint=False)
    maps = []
    for _ in range(p):
        a = rng.normal(size=(2, 2))
        xy = np.stack([a[0, 0] + a[0, 1] * np.cos(2 * np.pi * th), a[1, 0] + a[1, 1] * np.sin(2 * np.pi * th)], -1)
        z = (1 + delta) * np.hypot(xy[:, 0], xy[:, 1]) * (1 + rng.uniform()) + 1e-3
        maps.append(np.column_stack([xy, z]))
    lhs, rhs = cones.integrated_commutator_bound(np.array(maps), delta)
    assert lhs <= rhs + 1e-12
