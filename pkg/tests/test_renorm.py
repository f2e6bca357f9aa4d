import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpcocycles import renorm
from qpcocycles.cocycle import QpCocycle, Sl2Map
from qpcocycles.errors import NonzeroDegree
from qpcocycles.families import GOLDEN, SILVER, bounded_family, rotation_cocycle


@pytest.fixture(scope="module")
def silver_family():
    return bounded_family(SILVER, 0.25, 0.1)[0]


@settings(max_examples=10)
@given(st.integers(0, 10))
def test_words_are_unimodular_and_track_beta(k):
    c = rotation_cocycle(GOLDEN, 0.1)
    st_ = renorm.renormalize_to(c, k)
    (un, um), (vn, vm) = st_.U, st_.V
    assert abs(un * vm - um * vn) == 1
    fu, fv = st_.frequencies
    assert abs(fu - st_.cf.beta_at(k - 1)) <= 1e-12
    assert abs(fv - st_.cf.beta_at(k)) <= 1e-12


@pytest.mark.parametrize("k", [1, 4, 7])
def test_rescaled_pair_commutes(silver_family, k):
    st_ = renorm.renormalize_to(silver_family, k)
    act = renorm.rescaled_pair(st_)
    assert act.gen1.shift == 1.0
    assert act.gen2.shift == pytest.approx(st_.cf.alpha_k[k])
    assert act.commutation_defect(nodes=256) < 1e-7


def test_normalize_makes_first_generator_trivial(silver_family):
    act = renorm.rescaled_pair(renorm.renormalize_to(silver_family, 3))
    norm, _ = renorm.normalize(act)
    t = np.linspace(-1, 2, 31)
    assert np.allclose(norm.gen1(t), np.eye(2), atol=1e-10)
    assert norm.commutation_defect(nodes=256, domain=(0.0, 1.0)) < 1e-7


@pytest.mark.parametrize("r", [0, 1, 2, -1])
def test_action_degree_of_rotation_paths(r):
    act = renorm.FiberedAction(renorm.identity_map(1.0), renorm.FiberedMap(GOLDEN, Sl2Map.rot_path(r)))
    assert renorm.action_degree(act) == r


def test_action_rotation_number_matches_cocycle(silver_family):
    res = renorm.action_rotation_number(renorm.action_from_cocycle(silver_family), n=20_000)
    assert res.distance_to(0.25) < 1e-3


def test_action_rotation_rejects_degree():
    act = renorm.action_from_cocycle(QpCocycle(GOLDEN, Sl2Map.rot_path(1)))
    with pytest.raises(NonzeroDegree):
        renorm.action_rotation_number(act, n=100)


def test_lattice_distance():
    assert renorm.lattice_distance(0.5 * SILVER + 0.5, 1.0, SILVER) < 1e-12
    assert renorm.lattice_distance(0.1, 1.0, SILVER, bound=0) == pytest.approx(0.1)


def test_proximity_to_rotation_model_for_rotation_path():
    c = QpCocycle(GOLDEN, Sl2Map.rot_path(1))
    r, dist = renorm.proximity_to_rotation_model(renorm.renormalize_to(c, 2))
    assert r == 1 and dist < 1e-6


def test_select_shift_is_grid_argmin(silver_family):
    choice = renorm.select_shift(silver_family, 2, count=8)
    assert choice.heuristic
    assert choice.score == min(choice.scores)
    assert choice.nu in [i / 8 for i in range(8)]
