import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qpcocycles import sl2
from qpcocycles.cocycle import (
    QpCocycle, Sl2Map, boundedness_probe, conjugate, degree, fibered_product, l_operator, schrodinger,
)
from qpcocycles.errors import ConfigInvalid
from qpcocycles.families import GOLDEN, bounded_family, rotation_cocycle, trig_conjugator


@pytest.fixture(scope="module")
def family():
    return bounded_family()


@given(st.integers(0, 25), st.integers(0, 25), st.floats(0, 1))
def test_fibered_product_cocycle_relation(n, m, theta):
    c, _ = bounded_family()
    th = np.array([theta])
    lhs = fibered_product(c, n + m, th)
    rhs = fibered_product(c, n, th + m * c.alpha) @ fibered_product(c, m, th)
    assert np.allclose(lhs, rhs, atol=1e-9)


def test_negative_products_invert(family):
    c, _ = family
    th = np.linspace(0, 1, 7)
    back = fibered_product(c, -9, th + 9 * c.alpha) @ fibered_product(c, 9, th)
    assert np.allclose(back, np.eye(2), atol=1e-10)


@pytest.mark.parametrize("r", [-3, -1, 0, 1, 2, 5])
def test_degree_of_rotation_paths(r):
    assert degree(Sl2Map.rot_path(r)) == r


def test_degree_survives_conjugation(family):
    _, b = family
    c = conjugate(b, QpCocycle(GOLDEN, Sl2Map.rot_path(2)))
    assert degree(c.map) == 2


@pytest.mark.parametrize("r", [1, 2, 3])
def test_l_operator_of_rotation_path(r):
    L = l_operator(Sl2Map.rot_path(r), 256)
    assert np.allclose(L, [0.0, 0.0, 2 * np.pi * r], atol=1e-9)


def test_l_operator_of_constant_vanishes():
    assert np.allclose(l_operator(Sl2Map.const(np.diag([2.0, 0.5])), 256), 0)


def test_json_roundtrip(family):
    c, _ = family
    c2 = QpCocycle.from_json(c.to_json())
    th = np.random.default_rng(0).uniform(size=11)
    assert np.array_equal(c2(th), c(th))
    assert json.loads(c.to_json())["map"]["expression"]["kind"] == "conj"


def test_schrodinger_map_and_serialization():
    m = schrodinger([(1, [1.0, 0.0])], 0.3)
    th = np.array([0.0, 0.25])
    s = m(th)
    assert np.allclose(s[:, 1, 0], -1.0) and np.allclose(s[:, 0, 1], 1.0)
    assert np.allclose(np.linalg.det(s), 1.0)
    assert np.allclose(Sl2Map.from_json(m.to_json())(th), s)


def test_bad_node_is_config_invalid():
    with pytest.raises(ConfigInvalid):
        Sl2Map.from_dict({"kind": "nonsense"})
    with pytest.raises(ConfigInvalid):
        QpCocycle.from_dict({"map": {"kind": "rot_path", "r": 1}})


def test_boundedness_probe(family):
    c, b = family
    sup, _ = boundedness_probe(c, 300, n=32)
    cond = float(np.max(sl2.opnorm(b.grid(512)))) ** 2
    assert 1 <= sup <= cond * 1.01
    assert boundedness_probe(rotation_cocycle(GOLDEN, 0.1), 50)[0] == pytest.approx(1.0)


def test_trig_conjugator_is_deterministic():
    a, b = trig_conjugator(seed=4), trig_conjugator(seed=4)
    assert np.array_equal(a.grid(64), b.grid(64))


def test_l_operator_rejects_coarse_grid():
    with pytest.raises(ValueError):
        l_operator(Sl2Map.rot_path(1), 64)
