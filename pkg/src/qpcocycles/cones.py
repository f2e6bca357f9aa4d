"""Cone-valued decompositions of logarithmic derivatives along the
renormalization, and the integrated monotone quantities built from them.

Level k carries four maps T -> E+ sampled on a uniform grid:
``eta_plus - eta_minus = L(A^(k))`` and ``gamma_plus - gamma_minus = L(C^(k))``,
where ``A^(k)`` is the fibered product attached to the word V_k and
``C^(k) = A^(k-1)``.  All maps are 1-periodic in t.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import fourier, sl2
from .cocycle import boundedness_probe, fibered_product, l_operator
from .errors import ConeEscape, ConeViolation
from .renorm import renorm_start, renorm_step

CONE_SLACK = 1e-8


def _n(v):
    """Minkowski norm without the cone guard (clipped at zero)."""
    return np.sqrt(np.maximum(sl2.quad_form(v), 0.0))


def _margin(v):
    return float(np.min(np.minimum(sl2.cone_margin(v), 1.0)))


def _escape(v):
    """Largest relative distance outside E+ over the nodes."""
    r = np.hypot(v[..., 0], v[..., 1])
    scale = np.maximum(sl2.euclid_norm(v), 1.0)
    return float(np.max((r - v[..., 2]) / scale))


@dataclass
class ConeDecomposition:
    eta_plus: np.ndarray = field(repr=False)
    eta_minus: np.ndarray = field(repr=False)
    delta: float
    z0: float


def decompose_eta0(c, margin=0.5, n=256):
    """eta_plus = {0, 0, z0}, z0 = (1 + margin)(sup |L(A)| + 1); eta_minus = eta_plus - L(A)."""
    if margin <= 0:
        raise ValueError("margin must be positive")
    L = l_operator(c.map, n)
    z0 = (1 + margin) * (float(np.max(sl2.euclid_norm(L))) + 1)
    plus = np.zeros_like(L)
    plus[:, 2] = z0
    minus = plus - L
    return ConeDecomposition(plus, minus, min(_margin(plus), _margin(minus)), z0)


@dataclass
class ConeLevel:
    k: int
    eta_plus: np.ndarray = field(repr=False)
    eta_minus: np.ndarray = field(repr=False)
    gamma_plus: np.ndarray = field(repr=False)
    gamma_minus: np.ndarray = field(repr=False)
    A: np.ndarray = field(repr=False)  # A^(k) on the grid
    word: tuple = (0, 1)
    delta: float = 0.0
    difference_residual: float = 0.0
    product_residual: float = 0.0

    @property
    def eta(self):
        return self.eta_plus - self.eta_minus

    @property
    def gamma(self):
        return self.gamma_plus - self.gamma_minus


@dataclass
class ConeHistory:
    levels: list
    cf: object = field(repr=False)
    cocycle: object = field(repr=False)
    n: int = 256
    sup_bound: float = 1.0
    M: float = 0.0


def _log_derivative(samples):
    return sl2.coords(fourier.derivative(samples) @ sl2.inv(samples))


def cone_recursion(dec, c, depth, n=None, probe_K=None):
    """Levels 0..depth of the cone recursion.

    gamma_k = eta_{k-1} (both signs) and
    eta_k(t) = sum_j Ad(P_a ... P_j) eta_{k-1}^-+(t + s_j) + Ad(P_a ... P_1) gamma_{k-1}(t)
    with s_j = beta_{k-2} - j beta_{k-1} and P_j = A^(k-1)(t + s_j)^{-1}.
    """
    n = n or dec.eta_plus.shape[0]
    th = fourier.grid(n)
    state = renorm_start(c, depth + 2)
    cf = state.cf
    if cf.depth < depth:
        raise ValueError(f"continued fraction only reaches depth {cf.depth}")
    K = probe_K or max(cf.q[min(depth + 1, cf.depth)], 1)
    sup, _ = boundedness_probe(c, K, n=32)
    zero = np.zeros((n, 3))
    a0 = c.map(th)
    lvl = ConeLevel(0, dec.eta_plus, dec.eta_minus, zero, zero.copy(), a0, state.V, dec.delta)
    lvl.difference_residual = float(np.max(np.abs(lvl.eta - _log_derivative(a0))))
    levels = [lvl]
    prev_A = np.broadcast_to(np.eye(2), (n, 2, 2)).copy()  # A^(-1) = C^(0) = Id
    for k in range(1, depth + 1):
        state = renorm_step(state)
        last = levels[-1]
        a_k = cf.a[k]
        b2, b1 = cf.beta_at(k - 2), cf.beta_at(k - 1)
        m_prev = last.word[1]
        acc = np.broadcast_to(np.eye(2), (n, 2, 2)).copy()
        ep = np.zeros((n, 3))
        em = np.zeros((n, 3))
        for j in range(a_k, 0, -1):
            s = b2 - j * b1
            acc = acc @ sl2.inv(fibered_product(c, m_prev, th + s))
            ep += sl2.ad_action(acc, fourier.shift(last.eta_minus, s), check=False)
            em += sl2.ad_action(acc, fourier.shift(last.eta_plus, s), check=False)
        ep += sl2.ad_action(acc, last.gamma_plus, check=False)
        em += sl2.ad_action(acc, last.gamma_minus, check=False)
        A_k = acc @ prev_A
        direct = fibered_product(c, state.V[1], th)
        new = ConeLevel(k, ep, em, last.eta_plus.copy(), last.eta_minus.copy(), A_k, state.V)
        worst = max(_escape(v) for v in (ep, em))
        if worst > CONE_SLACK:
            raise ConeEscape(f"level {k} leaves the cone by {worst:.2e}", k=k)
        new.delta = min(_margin(ep), _margin(em))
        new.product_residual = float(np.max(sl2.opnorm(A_k - direct)))
        scale = max(1.0, float(np.max(sl2.euclid_norm(new.eta))))
        new.difference_residual = float(np.max(np.abs(new.eta - _log_derivative(direct)))) / scale
        levels.append(new)
        prev_A = last.A
    eta0 = max(float(np.max(sl2.euclid_norm(dec.eta_plus))), float(np.max(sl2.euclid_norm(dec.eta_minus))))
    return ConeHistory(levels, cf, c, n, sup, 2 * sup**2 * eta0)


@dataclass
class IntegratedQuantities:
    k: int
    e_plus: float
    e_minus: float
    f_plus: float
    f_minus: float
    e: float
    f: float
    u_plus: float
    u_minus: float
    u: float
    ubar_plus: float
    ubar_minus: float
    ubar: float

    def row(self):
        return dict(self.__dict__)


def integrated_quantities(level, cf):
    """Trapezoid integrals of N over the period, u = e + alpha_k f, ubar = beta_{k-1} u."""
    k = level.k
    mean = lambda v: float(np.mean(_n(v)))  # noqa: E731
    ep, em = mean(level.eta_plus), mean(level.eta_minus)
    fp, fm = mean(level.gamma_plus), mean(level.gamma_minus)
    e = mean(level.eta_plus + level.eta_minus)
    f = mean(level.gamma_plus + level.gamma_minus)
    ak = cf.alpha_k[k]
    up, um, u = ep + ak * fm, em + ak * fp, e + ak * f
    b = cf.beta_at(k - 1)
    return IntegratedQuantities(k, ep, em, fp, fm, e, f, up, um, u, b * up, b * um, b * u)


def monotonicity_defects(quantities):
    """min over k of ubar_k^+- - ubar_{k-1}^-+ and ubar_k - ubar_{k-1} (should be >= 0)."""
    out = []
    for prev, cur in zip(quantities, quantities[1:]):
        out.append(
            min(cur.ubar_plus - prev.ubar_minus, cur.ubar_minus - prev.ubar_plus, cur.ubar - prev.ubar)
        )
    return out


def _comm_mean(v, w):
    return float(np.mean(sl2.euclid_norm(sl2.bracket(v, w))))


def _rho(history, level, g, ep):
    """The three commutator integrals for a given choice of gamma/eta maps."""
    c, cf, k = history.cocycle, history.cf, level.k
    th = fourier.grid(history.n)
    b1, b0 = cf.beta_at(k - 1), cf.beta_at(k)
    c_prev = fibered_product(c, _c_word(history, k), th - b1)  # C^(k)(t - beta_{k-1})
    t1 = _comm_mean(fourier.shift(g, -2 * b1), sl2.ad_action(sl2.inv(c_prev), fourier.shift(g, -b1), check=False))
    t2 = _comm_mean(fourier.shift(g, -b1), ep)
    t3 = _comm_mean(ep, sl2.ad_action(level.A, fourier.shift(ep, -b0), check=False))
    return t1 + t2 + t3


def _c_word(history, k):
    return history.levels[k - 1].word[1] if k >= 1 else 0


@dataclass
class DecayEntry:
    k: int
    epsilon: float
    d_eta: float
    d_gamma: float
    rho: float
    rho_plus: float
    rho_minus: float
    in_window: bool


def decay_monitor(history):
    """epsilon_k = beta_{k-1}^2 (|d eta_k|_L1 + |d gamma_k|_L1 + rho + rho^+ + rho^-) per level."""
    out = []
    cf = history.cf
    for lvl in history.levels:
        k = lvl.k
        d_eta = fourier.l1(fourier.derivative(lvl.eta))
        d_gamma = fourier.l1(fourier.derivative(lvl.gamma))
        gsum, esum = lvl.gamma_plus + lvl.gamma_minus, lvl.eta_plus + lvl.eta_minus
        rho = _rho(history, lvl, gsum, esum)
        rho_p = _rho(history, lvl, lvl.gamma_minus, lvl.eta_plus)
        rho_m = _rho(history, lvl, lvl.gamma_plus, lvl.eta_minus)
        b = cf.beta_at(k - 1)
        eps = b * b * (d_eta + d_gamma + rho + rho_p + rho_m)
        window = k + 1 <= cf.depth and all(0.2 < cf.alpha_k[j] <= 0.25 for j in (k, k + 1))
        out.append(DecayEntry(k, eps, d_eta, d_gamma, rho, rho_p, rho_m, window))
    return out


def degree_bound_check(c, r, delta=0.0, n=1024):
    """(2 pi r, int N(L(A)), 2 pi r >= int N(L(A)) - 1e-6)."""
    L = l_operator(c.map, n)
    if not np.all(sl2.cone_membership(L, delta)):
        raise ConeViolation(f"L(A) leaves the cone E+_{delta}")
    rhs = float(np.mean(_n(L)))
    lhs = 2 * math.pi * r
    return lhs, rhs, lhs >= rhs - 1e-6


def integrated_commutator_bound(gammas, delta):
    """(lhs, rhs) of the integrated commutator estimate for cone-valued maps on [0, 1].

    ``gammas`` has shape (p, n, 3), sampled at n equispaced nodes.
    """
    g = np.asarray(gammas, dtype=float)
    p = g.shape[0]
    lhs = 0.0
    for i in range(p):
        for j in range(i + 1, p):
            lhs += float(np.mean(sl2.euclid_norm(sl2.bracket(g[i], g[j]))))
    total = float(np.mean(_n(np.sum(g, axis=0))))
    parts = float(np.sum(np.mean(_n(g), axis=1)))
    weight = float(np.mean(np.sum(_n(g) + sl2.euclid_norm(g), axis=0) ** 3))
    rhs = (4 / delta) * math.sqrt(max(total - parts, 0.0)) * math.sqrt(weight)
    return lhs, rhs
