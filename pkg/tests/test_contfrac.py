from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qpcocycles import contfrac
from qpcocycles.errors import ParityError, RationalStop
from qpcocycles.families import FOURS, GOLDEN, SILVER

random_alpha = st.integers(1, 2**200 - 1).map(lambda m: Fraction(m, 2**200))


@given(random_alpha)
def test_determinant_and_beta_bounds(alpha):
    cf = contfrac.expand(alpha, 40, partial_ok=True)
    for k in range(1, cf.depth + 1):
        assert cf.q[k] * cf.p[k - 1] - cf.q[k - 1] * cf.p[k] == (-1) ** k
    for k in range(cf.depth):
        b = cf.exact_beta[k]
        assert Fraction(1, cf.q[k + 1] + cf.q[k]) < b <= Fraction(1, cf.q[k + 1])
        # equality only when alpha is the convergent itself
        if b == Fraction(1, cf.q[k + 1]):
            assert alpha == Fraction(cf.p[k + 1], cf.q[k + 1])


@given(random_alpha)
def test_beta_is_product_of_gauss_iterates(alpha):
    cf = contfrac.expand(alpha, 20, partial_ok=True)
    prod = 1.0
    for k in range(cf.depth + 1):
        prod *= cf.alpha_k[k]
        assert cf.beta[k] == pytest.approx(prod, rel=1e-9)


@given(random_alpha)
def test_convergents_reconstruct_alpha(alpha):
    cf = contfrac.expand(alpha, 12, partial_ok=True)
    for k in range(1, cf.depth + 1):
        assert abs(alpha - Fraction(cf.p[k], cf.q[k])) < Fraction(1, cf.q[k] ** 2)


def test_golden_has_fibonacci_denominators():
    cf = contfrac.expand(GOLDEN, 20)
    assert cf.a[1:] == [1] * 20
    fib = [1, 1]
    while len(fib) < 21:
        fib.append(fib[-1] + fib[-2])
    assert cf.q == fib


@pytest.mark.parametrize("alpha, digit", [(SILVER, 2), (FOURS, 4)])
def test_periodic_expansions(alpha, digit):
    # the double-precision input is faithful while q_k^2 stays below 2^52
    assert contfrac.expand(alpha, 10).a[1:] == [digit] * 10


def test_rational_stop_carries_partial():
    with pytest.raises(RationalStop) as info:
        contfrac.expand(Fraction(5, 13), 10)
    assert info.value.partial.a[1:] == [2, 1, 1, 2]


def test_rejects_out_of_range():
    with pytest.raises(ValueError):
        contfrac.expand(1.5, 3)


@pytest.mark.parametrize("k, l", [(2, 0), (4, 2), (6, 2), (8, 0)])
def test_eigen_relation(k, l):
    for alpha in (GOLDEN, SILVER, FOURS):
        assert contfrac.eigen_relation_residual(contfrac.expand(alpha, 12), k, l) < 1e-9


def test_basis_matrix_parity_and_unimodularity():
    cf = contfrac.expand(SILVER, 10)
    with pytest.raises(ParityError):
        contfrac.basis_matrix(cf, 3, 0)
    (a, b), (c, d) = contfrac.basis_matrix(cf, 6, 2)
    assert a * d - b * c == 1


def test_cd_test():
    assert contfrac.cd_test(GOLDEN, 3, 1.0, 10**4).margin >= 1
    assert contfrac.cd_test(1 / 3, 3, 1.5, 10).margin < 1e-12


def test_diophantine_wrt_half_lattice():
    assert contfrac.diophantine_wrt(GOLDEN / 2, GOLDEN, 1, 2, 100).rational_k0 == 1
    assert contfrac.diophantine_wrt(0.0, GOLDEN, 1, 2, 100).rational_k0 == 0
    cert = contfrac.diophantine_wrt(GOLDEN / np.pi, GOLDEN, 10, 2, 1000)
    assert cert.rational_k0 is None and cert.margin > 0


def test_sigma_window_search_on_fours():
    cf = contfrac.expand(FOURS, 10)
    assert contfrac.sigma_window_search(cf, 10, 1.5, K=200) == list(range(10))
    assert contfrac.sigma_window_search(contfrac.expand(GOLDEN, 10), 10, 1.5, K=200) == []
