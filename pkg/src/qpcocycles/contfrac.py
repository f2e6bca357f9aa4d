"""Continued fractions, diophantine tests and the (1/5, 1/4] window search.

Expansions are computed exactly on the rational number represented by the
input double, so convergents are exact Python integers and the Gauss
iterates ``alpha_k = beta_k / beta_{k-1}`` are correctly rounded.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .config import DEFAULTS, TOL
from .errors import DepthLimit, ParityError, RationalStop

INT128 = 2**127 - 1


@dataclass
class CfExpansion:
    alpha: float
    a: list  # a[0] = 0, a[k] for k >= 1
    alpha_k: list  # alpha_k[0] = alpha
    beta: list  # beta[k] for k >= 0
    p: list  # p[k] for k >= 0
    q: list
    exact_beta: list = field(default_factory=list, repr=False)
    stop_reason: str = ""

    @property
    def depth(self):
        return len(self.a) - 1

    def beta_at(self, k):
        return 1.0 if k == -1 else self.beta[k]

    def p_at(self, k):
        return 1 if k == -1 else self.p[k]

    def q_at(self, k):
        return 0 if k == -1 else self.q[k]

    def rows(self):
        return [
            {"k": k, "a_k": self.a[k], "p_k": self.p[k], "q_k": self.q[k],
             "beta_k": self.beta[k], "alpha_k": self.alpha_k[k]}
            for k in range(self.depth + 1)
        ]


def expand(alpha, depth, partial_ok=False):
    """Expansion to the requested depth.

    Raises ``RationalStop`` when a Gauss iterate drops below the rational
    threshold and ``DepthLimit`` when a denominator would leave 128 bits;
    both carry the partial expansion.  With ``partial_ok`` the truncated
    expansion is returned instead.
    """
    x = Fraction(alpha)
    if not 0 < x < 1:
        raise ValueError("alpha must lie in (0, 1)")
    a, ak, beta, ex, p, q = [0], [float(x)], [float(x)], [x], [0], [1]
    p_prev, q_prev = 1, 0
    reason = ""
    for k in range(1, depth + 1):
        rem = ak_exact = ex[-1] / (ex[-2] if k >= 2 else 1)
        if rem == 0 or float(rem) < TOL.rational_stop:
            reason = "RATIONAL_STOP"
            break
        a_k = int(1 / ak_exact)
        p_k = a_k * p[-1] + p_prev
        q_k = a_k * q[-1] + q_prev
        if q_k > INT128:
            reason = "DEPTH_LIMIT"
            break
        p_prev, q_prev = p[-1], q[-1]
        p.append(p_k)
        q.append(q_k)
        a.append(a_k)
        b = (-1) ** k * (q_k * x - p_k)
        ex.append(b)
        beta.append(float(b))
        ak.append(float(b / ex[-2]))
    cf = CfExpansion(float(alpha), a, ak, beta, p, q, ex, reason)
    if reason and not partial_ok:
        err = RationalStop if reason == "RATIONAL_STOP" else DepthLimit
        raise err(f"{reason} at depth {cf.depth}", partial=cf)
    return cf


def _ring(x, k):
    return np.abs(k * x - np.round(k * x))


@dataclass
class DiophantineCert:
    gamma: float
    sigma: float
    K: int
    worst_k: int
    margin: float
    rational_k0: int = None

    @property
    def valid(self):
        return self.margin >= 1 and self.rational_k0 is None


def cd_test(alpha, gamma, sigma, K):
    """margin = min_{1<=k<=K} gamma k^sigma |k alpha|; CD(gamma, sigma) holds up to K iff margin >= 1."""
    if K < 1 or gamma <= 0:
        raise ValueError("K >= 1 and gamma > 0 required")
    k = np.arange(1, K + 1)
    dist = np.abs(k * alpha - np.round(k * alpha))
    vals = gamma * k.astype(float) ** sigma * dist
    i = int(np.argmin(vals))
    return DiophantineCert(gamma, sigma, K, int(k[i]), float(vals[i]))


def cd_test_kt(alpha, K_const, tau, K):
    """Same test in the (K, tau) naming: min_l |k alpha - l| >= K^{-1} |k|^{-tau}."""
    return cd_test(alpha, K_const, tau, K)


def diophantine_wrt(rho, alpha, kappa, tau, K, rational_tol=1e-10):
    """Distance of rho from the half lattice (Z alpha + Z)/2, weighted by |k|^tau."""
    if isinstance(alpha, CfExpansion):
        alpha = alpha.alpha
    k = np.arange(-K, K + 1)
    x = rho - 0.5 * k * alpha
    dist = np.abs(x - 0.5 * np.round(2 * x))
    weight = np.maximum(np.abs(k), 1).astype(float) ** tau
    vals = kappa * weight * dist
    hits = np.nonzero(dist < rational_tol)[0]
    k0 = None
    if hits.size:
        k0 = int(k[hits[np.argmin(np.abs(k[hits]))]])
    i = int(np.argmin(vals))
    return DiophantineCert(kappa, tau, K, int(k[i]), float(vals[i]), k0)


def sigma_window_search(cf, gamma, sigma, K=DEFAULTS.cf_window_K):
    """k with alpha_k, alpha_{k+1} in (1/5, 1/4] and both passing cd_test up to K."""
    out = []
    for k in range(cf.depth):
        pair = cf.alpha_k[k], cf.alpha_k[k + 1]
        if all(0.2 < x <= 0.25 for x in pair):
            if all(cd_test(x, gamma, sigma, K).margin >= 1 for x in pair):
                out.append(k)
    return out


def basis_matrix(cf, k, l):
    """prod_{j=k}^{l+1} [[0, 1], [1, -a_j]] (a_k factor leftmost), exact integers."""
    if k < l:
        raise ValueError("k >= l required")
    if (k - l) % 2:
        raise ParityError("k - l must be even")
    m = ((1, 0), (0, 1))
    for j in range(l + 1, k + 1):
        aj = cf.a[j]
        # left-multiply by [[0, 1], [1, -a_j]]
        m = (m[1], (m[0][0] - aj * m[1][0], m[0][1] - aj * m[1][1]))
    return m


def matmul_int(m, n):
    return (
        (m[0][0] * n[0][0] + m[0][1] * n[1][0], m[0][0] * n[0][1] + m[0][1] * n[1][1]),
        (m[1][0] * n[0][0] + m[1][1] * n[1][0], m[1][0] * n[0][1] + m[1][1] * n[1][1]),
    )


def eigen_relation_residual(cf, k, l):
    """Relative residual of [[|m4|, |m2|], [|m3|, |m1|]] (1, alpha_k) = (beta_{l-1}/beta_{k-1}) (1, alpha_l)."""
    (m1, m2), (m3, m4) = basis_matrix(cf, k, l)
    lhs = np.array([abs(m4) + abs(m2) * cf.alpha_k[k], abs(m3) + abs(m1) * cf.alpha_k[k]])
    ratio = cf.beta_at(l - 1) / cf.beta_at(k - 1)
    rhs = ratio * np.array([1.0, cf.alpha_k[l]])
    return float(np.max(np.abs(lhs - rhs) / np.abs(rhs)))
