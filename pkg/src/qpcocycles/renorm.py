"""Fibered Z^2-actions and continued-fraction renormalization.

A fibered map ``(gamma, M)`` acts on R x R^2 by ``(t, y) -> (t + gamma, M(t) y)``;
maps are held as vectorized callables of ``t``.  Actions built from a cocycle
remember the cocycle, and their elements are evaluated as fibered products
``A_m`` directly.
"""

from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from . import fourier, sl2
from .cocycle import QpCocycle, Sl2Map, fibered_product
from .config import DEFAULTS
from .contfrac import CfExpansion, expand
from .errors import (
    DepthExhausted,
    Nonconstant,
    NonzeroDegree,
    NotUnimodularBasis,
    Underflow,
)
from .invariants import fibered_rotation_number
from .reducibility import solve_translation_cohomology_samples

# ---------------------------------------------------------------- fibered maps


@dataclass(frozen=True)
class FiberedMap:
    shift: float
    func: object = field(repr=False)

    def __call__(self, t):
        return self.func(np.asarray(t, dtype=float))

    def compose(self, other):
        """self o other."""
        f, g, s = self.func, other.func, other.shift
        return FiberedMap(self.shift + other.shift, lambda t: f(t + s) @ g(t))

    def inverse(self):
        f, s = self.func, self.shift
        return FiberedMap(-s, lambda t: sl2.inv(f(t - s)))

    def power(self, n):
        out = identity_map()
        base = self if n >= 0 else self.inverse()
        for _ in range(abs(n)):
            out = base.compose(out)
        return out

    def rescaled(self, beta):
        f = self.func
        return FiberedMap(self.shift / beta, lambda t: f(beta * t))

    def shifted(self, nu):
        f = self.func
        return FiberedMap(self.shift, lambda t: f(t - nu))


def _identity(t):
    t = np.asarray(t, dtype=float)
    return np.broadcast_to(np.eye(2), t.shape + (2, 2)).copy()


def identity_map(shift=0.0):
    return FiberedMap(shift, _identity)


@dataclass
class FiberedAction:
    gen1: FiberedMap
    gen2: FiberedMap
    cocycle: QpCocycle = None
    words: tuple = ((1, 0), (0, 1))
    domain: tuple = DEFAULTS.renorm_domain

    @property
    def frequencies(self):
        return self.gen1.shift, self.gen2.shift

    def commutation_defect(self, nodes=2048, domain=None):
        lo, hi = domain or self.domain
        t = np.linspace(lo, hi, nodes)
        c, a = self.gen1, self.gen2
        lhs = c(t + a.shift) @ a(t)
        rhs = a(t + c.shift) @ c(t)
        return float(np.max(sl2.opnorm(lhs - rhs)))


def _exact_frequency(alpha, n, m):
    return float(n + m * Fraction(alpha))


def word_map(c, n, m, nu=0.0):
    """Element (n, m) of the action of the cocycle c: (n + m alpha, A_m)."""
    if nu:
        return FiberedMap(_exact_frequency(c.alpha, n, m), lambda t: fibered_product(c, m, t - nu))
    return FiberedMap(_exact_frequency(c.alpha, n, m), lambda t: fibered_product(c, m, t))


def action_from_cocycle(c):
    if c.map.period != 1:
        raise ValueError("action_from_cocycle needs a 1-periodic map")
    return FiberedAction(identity_map(1.0), FiberedMap(c.alpha, c.map), cocycle=c)


def cocycle_from_action(act):
    if act.cocycle is not None and act.words == ((1, 0), (0, 1)):
        return act.cocycle
    return QpCocycle(act.gen2.shift % 1.0, Sl2Map.from_callable(act.gen2.func))


def _element(act, coeffs):
    """gen1^a o gen2^b for the integer pair (a, b) in the current basis."""
    a, b = coeffs
    if act.cocycle is not None:
        w1, w2 = act.words
        n = a * w1[0] + b * w2[0]
        m = a * w1[1] + b * w2[1]
        return word_map(act.cocycle, n, m), (n, m)
    return act.gen1.power(a).compose(act.gen2.power(b)), None


def change_basis(act, M):
    (a, b), (c, d) = M
    if abs(a * d - b * c) != 1:
        raise NotUnimodularBasis("basis change must have determinant +-1")
    g1, w1 = _element(act, (a, b))
    g2, w2 = _element(act, (c, d))
    words = (w1, w2) if w1 is not None else act.words
    return FiberedAction(g1, g2, act.cocycle, words, act.domain)


def conjugate_action(act, b):
    """Conjugate by the fibered map (0, B): (gamma, M) -> (gamma, B(t+gamma)^{-1} M(t) B(t))."""

    def conj(g):
        f, s = g.func, g.shift
        return FiberedMap(s, lambda t: sl2.inv(b(t + s)) @ f(t) @ b(t))

    return FiberedAction(conj(act.gen1), conj(act.gen2), None, act.words, act.domain)


# ---------------------------------------------------------------- normalization


def smooth_step(s):
    """C-infinity step: 0 near s = 0, 1 near s = 1."""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        h0 = np.where(s > 0, np.exp(-1 / np.where(s > 0, s, 1)), 0.0)
        h1 = np.where(s < 1, np.exp(-1 / np.where(s < 1, 1 - s, 1)), 0.0)
    return h0 / (h0 + h1)


class _Blend:
    """s -> interpolant from Id (s = 0) to C(s - 1) (s = 1) along a log path."""

    def __init__(self, cfunc, n=1024):
        self.cfunc = cfunc
        s = np.linspace(0.0, 1.0, n + 1)
        cs = cfunc(s - 1)
        self.geodesic = bool(np.all(sl2.has_real_log(cs)))
        if not self.geodesic:
            self.s = s
            self.table = np.unwrap(sl2.polar_angle(cs))

    def __call__(self, s):
        c = self.cfunc(s - 1)
        chi = smooth_step(s)[..., None, None]
        if self.geodesic:
            return sl2.expm(chi * sl2.logm(c))
        p, sym = sl2.polar(c)
        approx = np.interp(s, self.s, self.table)
        phi = p + 2 * np.pi * np.round((approx - p) / (2 * np.pi))
        return sl2.rotation(chi[..., 0, 0] * phi) @ sl2.expm(chi * sl2.logm(sym))


def normalizing_conjugator(cfunc):
    """B with B(t + 1) = C(t) B(t), smooth, B = Id near t = 0."""
    blend = _Blend(cfunc)

    def b(t):
        t = np.asarray(t, dtype=float)
        k = np.floor(t)
        s = t - k
        out = blend(s)
        kmax = int(np.max(np.abs(k))) if k.size else 0
        for j in range(kmax):
            up = k > j
            if np.any(up):
                out[up] = cfunc(s[up] + j) @ out[up]
            down = k < -j
            if np.any(down):
                out[down] = sl2.inv(cfunc(s[down] - j - 1)) @ out[down]
        return out

    return b


def normalize(act, tol=1e-12):
    """Conjugate so that the first generator becomes (1, Id); returns (action, B)."""
    if abs(act.gen1.shift - 1.0) > tol:
        raise ValueError("normalize needs first frequency 1")
    probe = np.linspace(-1.0, 0.0, 33)
    if np.max(sl2.opnorm(act.gen1(probe) - np.eye(2))) == 0.0:
        return act, _identity
    b = normalizing_conjugator(act.gen1.func)
    out = conjugate_action(act, b)
    return out, b


# ---------------------------------------------------------------- renormalization


@dataclass
class RenormState:
    k: int
    cf: CfExpansion
    cocycle: QpCocycle
    U: tuple  # integer word (n, m) of U_k
    V: tuple
    nu: float = 0.0

    @property
    def frequencies(self):
        a = self.cocycle.alpha
        return _exact_frequency(a, *self.U), _exact_frequency(a, *self.V)

    def maps(self):
        c = self.cocycle
        return word_map(c, *self.U, nu=self.nu), word_map(c, *self.V, nu=self.nu)

    @property
    def pair(self):
        u, v = self.maps()
        return FiberedAction(u, v, None, (self.U, self.V))


def renorm_start(c, depth=10, nu=0.0):
    cf = expand(c.alpha, depth, partial_ok=True)
    return RenormState(0, cf, c, (1, 0), (0, 1), nu)


def renorm_step(state):
    """U_k = V_{k-1}, V_k = U_{k-1} V_{k-1}^{-a_k}."""
    k = state.k + 1
    if k > state.cf.depth:
        raise DepthExhausted(f"expansion depth {state.cf.depth} reached")
    a = state.cf.a[k]
    u, v = state.U, state.V
    new_v = (u[0] - a * v[0], u[1] - a * v[1])
    return replace(state, k=k, U=v, V=new_v)


def renormalize_to(c, k, nu=0.0):
    state = renorm_start(c, k + 2, nu)
    for _ in range(k):
        state = renorm_step(state)
    return state


def rescaled_pair(state):
    """(1, C~(t)) and (alpha_k, A~(t)) with C~(t) = A^{(k-1)}(beta_{k-1} t), A~(t) = A^{(k)}(beta_{k-1} t)."""
    beta = state.cf.beta_at(state.k - 1)
    if beta < 1e-12:
        raise Underflow("beta_{k-1} below 1e-12")
    u, v = state.maps()
    uu = FiberedMap(1.0, u.rescaled(beta).func)
    vv = FiberedMap(state.cf.alpha_k[state.k], v.rescaled(beta).func)
    return FiberedAction(uu, vv, None, (state.U, state.V))


@dataclass
class ShiftChoice:
    """Result of the shift search; ``heuristic`` marks it as a surrogate, not a certified choice."""

    nu: float
    score: float
    scores: np.ndarray = field(repr=False)
    heuristic: bool = True


def select_shift(c, k, count=DEFAULTS.nu_grid, nodes=2048, window=10.0):
    """Argmin over ``count`` equispaced shifts nu of the best windowed integral
    of |L(A~)| for the rescaled level-k generator A~(t) = A^(k)(beta_{k-1} t - nu).

    Windows have length ``window`` and start at half-integers inside the
    rescaled domain.
    """
    lo, hi = DEFAULTS.renorm_domain
    starts = np.arange(lo, hi - window + 1e-12, 0.5)
    if starts.size == 0:
        raise ValueError("window longer than the renormalization domain")
    t = np.linspace(lo, hi, nodes)
    dt = t[1] - t[0]
    scores = np.empty(count)
    for i, nu in enumerate(fourier.grid(count)):
        st = renormalize_to(c, k, nu)
        a = rescaled_pair(st).gen2(t)
        da = np.gradient(a, dt, axis=0)
        f = sl2.euclid_norm(sl2.coords(da @ sl2.inv(a)))
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * dt)])
        vals = np.interp(starts + window, t, cum) - np.interp(starts, t, cum)
        scores[i] = float(np.min(vals))
    best = int(np.argmin(scores))
    return ShiftChoice(float(fourier.grid(count)[best]), float(scores[best]), scores)


# ---------------------------------------------------------------- invariants of actions


class IntervalLift:
    """Lift d(t, x) (turns) of the direction action of a map over an interval of t."""

    def __init__(self, func, lo, hi, n=4096, max_n=2**18):
        while True:
            t = np.linspace(lo, hi, n + 1)
            p = sl2.polar_angle(func(t))
            steps = (np.diff(p) + np.pi) % (2 * np.pi) - np.pi
            if np.max(np.abs(steps), initial=0) < np.pi / 2 or n >= max_n:
                break
            n *= 2
        self.func = func
        self.t = t
        self.table = p[0] + np.concatenate([[0.0], np.cumsum(steps)])

    def __call__(self, t, x):
        t = np.asarray(t, dtype=float)
        m = self.func(t)
        p, s = sl2.polar(m)
        approx = np.interp(t, self.t, self.table)
        phi = p + 2 * np.pi * np.round((approx - p) / (2 * np.pi))
        ang = 2 * np.pi * np.asarray(x, dtype=float)
        v = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        w = np.einsum("...ij,...j->...i", s, v)
        d = np.arctan2(v[..., 0] * w[..., 1] - v[..., 1] * w[..., 0], np.sum(v * w, axis=-1))
        return (phi + d) / (2 * np.pi)


def action_degree(act, nodes=64, xs=(0.0, 0.37, 0.71), domain=(0.0, 1.0)):
    """(a o F_c - a) - (c o F_a - c) evaluated on a grid; must be a constant integer."""
    c, a = act.gen1, act.gen2
    lo, hi = domain
    pad = abs(c.shift) + abs(a.shift) + 1
    lift_c = IntervalLift(c.func, lo - pad, hi + pad)
    lift_a = IntervalLift(a.func, lo - pad, hi + pad)
    t = np.linspace(lo, hi, nodes)
    vals = []
    for x in xs:
        cx = lift_c(t, x)
        ax = lift_a(t, x)
        val = (lift_a(t + c.shift, x + cx) - ax) - (lift_c(t + a.shift, x + ax) - cx)
        vals.append(val)
    vals = np.concatenate(vals)
    spread = float(np.max(vals) - np.min(vals))
    if spread > 1e-3:
        raise Nonconstant(f"degree spread {spread:.2e}", spread=spread)
    return int(round(float(np.mean(vals))))


@dataclass
class ActionRotation:
    value: float
    gamma1: float
    gamma2: float
    residual: float

    def distance_to(self, other, bound=50):
        return lattice_distance(self.value - other, self.gamma1, self.gamma2, bound)


def lattice_distance(x, gamma1, gamma2, bound=50):
    """Distance from x to (1/2)(Z gamma1 + Z gamma2) using |coefficient of gamma2| <= bound."""
    m = np.arange(-bound, bound + 1)
    y = x - 0.5 * m * gamma2
    h = 0.5 * abs(gamma1)
    return float(np.min(np.abs(y - h * np.round(y / h))))


def action_rotation_number(act, n=100_000):
    """Rotation number of a degree-zero action, as a class mod (1/2)(Z gamma1 + Z gamma2)."""
    deg = action_degree(act)
    if deg != 0:
        raise NonzeroDegree(f"action degree {deg}", degree=deg)
    norm, _ = normalize(act)
    g2 = norm.gen2
    c = QpCocycle(g2.shift % 1.0, Sl2Map.from_callable(g2.func))
    res = fibered_rotation_number(c, n, check_degree=False)
    return ActionRotation(float(res.value), 1.0, float(g2.shift), res.residual)


def proximity_to_rotation_model(state, nodes=512, rmax=6):
    """Best integer r and the grid C^0 distance of the normalized rescaled generator to E_r.

    The model is E_r(t) R_c up to a conjugacy by a 1-periodic rotation path
    R_{w(t)} (degree zero) that removes the periodic part of the phase.
    """
    act = rescaled_pair(state)
    norm, _ = normalize(act)
    g = norm.gen2
    alpha_k = g.shift
    t = fourier.grid(nodes)
    m = g(t)
    phi = np.unwrap(np.concatenate([sl2.polar_angle(m), sl2.polar_angle(g(np.array([1.0])))]))
    winding = int(round((phi[-1] - phi[0]) / (2 * np.pi)))
    best = (None, np.inf)
    for r in range(-rmax, rmax + 1):
        if r == winding:
            p = phi[:-1] - 2 * np.pi * r * t
            p0 = float(np.mean(p))
            w = solve_translation_cohomology_samples(p - p0, alpha_k)
            model = sl2.rotation(2 * np.pi * r * t + p0)
            corrected = sl2.rotation(-fourier.shift(w, alpha_k)) @ m @ sl2.rotation(w)
            dist = float(np.max(sl2.opnorm(corrected - model)))
        else:
            base = sl2.rotation(-2 * np.pi * r * t) @ m
            c = float(np.angle(np.mean(np.exp(1j * sl2.polar_angle(base)))))
            dist = float(np.max(sl2.opnorm(base - sl2.rotation(c))))
        if dist < best[1]:
            best = (r, dist)
    return best
