import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpcocycles import reducibility as R
from qpcocycles import sl2
from qpcocycles.cocycle import QpCocycle, RotPath, Sl2Map
from qpcocycles.errors import NoZeroFound, Nonconstant, ResonanceHit, SmallDivisor, StepTooLarge
from qpcocycles.families import GOLDEN, bounded_family
from qpcocycles.invariants import lyapunov_exponent

coef = st.tuples(st.floats(-1, 1), st.floats(-1, 1)).map(lambda p: complex(*p))


@settings(max_examples=20)
@given(st.lists(coef, min_size=17, max_size=17), st.integers(1, 3))
def test_twisted_cohomology_residual(cs, r):
    g = R.TrigPoly.from_modes({k - 8: c for k, c in enumerate(cs)}, 8)
    nu, band = R.solve_twisted_cohomology(g, GOLDEN, r)
    assert R.twisted_residual(nu, band, g, GOLDEN, r) < 1e-10
    # the band only keeps the resonant modes -(2r-1)..0
    for m in range(-8, 9):
        if not -(2 * r - 1) <= m <= 0:
            assert band.coeff(m) == 0


@settings(max_examples=20)
@given(st.lists(coef, min_size=6, max_size=6))
def test_translation_cohomology_residual(cs):
    modes = {k: c for k, c in enumerate(cs, start=1)}
    modes.update({-k: np.conj(c) for k, c in modes.items()})
    f = R.TrigPoly.from_modes(modes, 8)
    y = R.solve_translation_cohomology(f, GOLDEN)
    assert R.translation_residual(y, f, GOLDEN) < 1e-11
    assert y.is_real()


def test_translation_cohomology_small_divisor():
    f = R.TrigPoly.from_modes({3: 1.0, -3: 1.0}, 4)
    with pytest.raises(SmallDivisor) as info:
        R.solve_translation_cohomology(f, 1 / 3)
    assert abs(info.value.k) == 3


def test_trig_poly_samples_roundtrip():
    p = R.TrigPoly.from_modes({-2: 0.5j, 1: 1.0, 3: -0.25}, 4)
    th = np.arange(32) / 32
    assert np.allclose(R.TrigPoly.from_samples(p(th), 4).coeffs, p.coeffs)


def _mode(size, n=256):
    th = np.arange(n) / n
    v = np.zeros((n, 3))
    v[:, 0] = size * np.cos(2 * np.pi * th)
    return sl2.to_su11(sl2.matrix(v).astype(complex))


def test_normal_form_step_quadratic_remainder():
    big = R.normal_form_step(_mode(1e-2), GOLDEN, 1, 32, enforce=False)
    small = R.normal_form_step(_mode(1e-3), GOLDEN, 1, 32, enforce=False)
    assert 50 <= big.norms["F_0"] / small.norms["F_0"] <= 200
    assert small.identity_residual < 1e-12


def test_normal_form_step_size_guard():
    with pytest.raises(StepTooLarge):
        R.normal_form_step(_mode(1e-2), GOLDEN, 1, 32)
    R.normal_form_step(_mode(1e-8), GOLDEN, 1, 32)


def test_resonant_projection_and_monitor():
    th = np.arange(64) / 64
    U = R.su11_from_parts(0.1 + 0 * th, 0.2 * np.exp(-2j * np.pi * th) + 0.05 * np.exp(6j * np.pi * th))
    lam = R.resonant_projection(U, 1)
    t, nu = sl2.su11_parts(lam)
    assert np.allclose(t, 0.1) and np.allclose(nu, 0.2 * np.exp(-2j * np.pi * th))
    lhs, rhs, ratio = R.lambda_2r_monitor(U, 1)
    assert ratio == pytest.approx(lhs / rhs)


def test_untwisted_resonance():
    g = R.TrigPoly.from_modes({0: 1.0}, 2)
    with pytest.raises(ResonanceHit):
        R.solve_untwisted(g, GOLDEN, 0.5, 2)


def test_kam_reduces_near_rotation():
    c, _ = bounded_family(GOLDEN, 0.3, 1e-4)
    res = R.kam_reduce_local(c)
    assert res.steps <= 6 and res.final_defect < 1e-10
    th = np.linspace(0, 1, 17)
    conj = sl2.inv(res.B(th + GOLDEN)) @ c.map(th) @ res.B(th)
    assert np.allclose(conj, res.A0, atol=1e-10)


def test_kam_refuses_resonant_angle():
    c, _ = bounded_family(GOLDEN, GOLDEN / 2, 1e-4)
    with pytest.raises(ResonanceHit):
        R.kam_reduce_local(c, dioph=(10.0, 2.0, 50))


def test_rigidity_conjugacy_rejects_nonconstant():
    D = Sl2Map(RotPath(1)).grid(256)
    with pytest.raises(Nonconstant) as info:
        R.rigidity_conjugacy(D, sl2.rotation(0.3), GOLDEN)
    assert abs(info.value.mode) == 1


def test_rigidity_conjugacy_returns_constant():
    A0 = sl2.rotation(0.3)
    value, resid = R.rigidity_conjugacy(np.broadcast_to(A0, (64, 2, 2)), A0, GOLDEN)
    assert np.allclose(value, A0) and resid < 1e-12


@pytest.mark.parametrize("s", [0, 1, 2])
def test_hyperbolic_neighbor(s):
    nb = R.hyperbolic_neighbor(sl2.rotation(0.3), GOLDEN, 0.1, s=s)
    assert nb.distance <= 0.1 and nb.eta > 0
    lyap = lyapunov_exponent(QpCocycle(GOLDEN, nb.map), 2000).value
    assert lyap == pytest.approx(nb.expected_lyapunov, abs=1e-6)


def test_destabilizer_margin_and_limits():
    res = R.schrodinger_destabilizer(Sl2Map.rot_path(1), 0.01)
    assert res.margin > 0
    assert res.mu == pytest.approx(res.limits[0], rel=0.05)
    assert res.nu == pytest.approx(res.limits[1], rel=0.05)
    th = np.linspace(0, 1, 1001)
    assert abs(np.trapezoid(res.w(th), th)) < 1e-3


def test_destabilizer_needs_zeros():
    with pytest.raises(NoZeroFound):
        R.schrodinger_destabilizer(Sl2Map.const(np.diag([2.0, 0.5])), 0.05)


@given(st.floats(-2, 2))
def test_chi_is_supported_and_normalized(u):
    assert R.chi(u) >= 0
    if abs(u) >= 1:
        assert R.chi(u) == 0


def test_chi_integrates_to_one():
    u, w = np.polynomial.legendre.leggauss(32)
    assert np.sum(w * R.chi(u)) == pytest.approx(1.0, abs=1e-12)
