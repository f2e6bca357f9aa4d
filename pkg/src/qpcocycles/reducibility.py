"""Cohomological equations, the normal-form step, a local KAM loop, and
explicit perturbation constructions.

Normal-form computations take place in the su(1,1) picture, where rotations
are diagonal: ``E_r(theta) = diag(e^{2 pi i r theta}, e^{-2 pi i r theta})``
and an element ``{t, nu}`` of su(1,1) is ``[[i t, nu], [conj(nu), -i t]]``.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import fourier, sl2
from .cocycle import Const, ExpTrig, Product, RotPath, Shift, Sl2Map, c_s_norm, degree
from .config import DEFAULTS, TOL
from .errors import (
    Diverged,
    NoZeroFound,
    Nonconstant,
    NotElliptic,
    ResonanceHit,
    SmallDivisor,
    StepTooLarge,
    ZerosCoincide,
)

# ---------------------------------------------------------------- trig polys


@dataclass
class TrigPoly:
    """sum_{|k| <= N} c_k e^{2 pi i k theta}; ``coeffs[k + N]`` holds c_k."""

    coeffs: np.ndarray

    @property
    def N(self):
        return (self.coeffs.shape[0] - 1) // 2

    def coeff(self, k):
        n = self.N
        return self.coeffs[k + n] if abs(k) <= n else np.zeros_like(self.coeffs[0])

    @classmethod
    def zeros(cls, N, shape=(), dtype=complex):
        return cls(np.zeros((2 * N + 1,) + tuple(shape), dtype=dtype))

    @classmethod
    def from_modes(cls, modes, N, shape=(), dtype=complex):
        out = cls.zeros(N, shape, dtype)
        for k, v in dict(modes).items():
            out.coeffs[k + N] = v
        return out

    @classmethod
    def from_samples(cls, samples, N):
        samples = np.asarray(samples)
        n = samples.shape[0]
        if n < 2 * N + 1:
            raise ValueError("grid too coarse for the requested truncation")
        c = fourier.coefficients(samples)
        idx = np.arange(-N, N + 1) % n
        return cls(c[idx].astype(complex))

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        k = np.arange(-self.N, self.N + 1)
        e = np.exp(2j * np.pi * np.multiply.outer(theta, k))
        return np.tensordot(e, self.coeffs, axes=([-1], [0]))

    def samples(self, n, real=False):
        out = self(fourier.grid(n))
        return out.real if real else out

    def truncated(self, N):
        out = TrigPoly.zeros(N, self.coeffs.shape[1:], self.coeffs.dtype)
        for k in range(-min(N, self.N), min(N, self.N) + 1):
            out.coeffs[k + N] = self.coeff(k)
        return out

    def is_real(self, tol=1e-12):
        return np.allclose(self.coeffs, np.conj(self.coeffs[::-1]), atol=tol)

    def sup(self, n=512):
        return float(np.max(np.abs(self.samples(n))))


# ---------------------------------------------------------------- cohomology


def solve_translation_cohomology(f, alpha, N=None, tol=TOL.small_divisor):
    """y^(k) = f^(k) / (e^{2 pi i k alpha} - 1), y^(0) = 0.

    Solves y(theta + alpha) - y(theta) = f(theta) - f^(0).
    """
    N = f.N if N is None else N
    f = f.truncated(N)
    y = TrigPoly.zeros(N, f.coeffs.shape[1:])
    amp = 0.0
    for k in range(-N, N + 1):
        if k == 0:
            continue
        div = np.exp(2j * np.pi * k * alpha) - 1
        if abs(div) < tol:
            raise SmallDivisor(f"|e^(2 pi i k alpha) - 1| = {abs(div):.2e} at k = {k}", k=k)
        amp = max(amp, 1 / abs(div))
        y.coeffs[k + N] = f.coeff(k) / div
    y.amplification = amp
    return y


def solve_translation_cohomology_samples(samples, alpha, tol=1e-9):
    """Grid version of the translation solver; mean is discarded."""
    samples = np.asarray(samples)
    n = samples.shape[0]
    k = fourier.modes(n)
    div = np.exp(2j * np.pi * k * alpha) - 1
    div[0] = 1.0
    if n % 2 == 0:
        div[n // 2] = np.inf
    bad = np.abs(div) < tol
    if np.any(bad):
        raise SmallDivisor("resonant mode on grid", k=int(k[np.argmax(bad)]))
    c = np.fft.fft(samples, axis=0)
    c[0] = 0
    c = c / div.reshape((n,) + (1,) * (samples.ndim - 1))
    out = np.fft.ifft(c, axis=0)
    return out.real if not np.iscomplexobj(samples) else out


def solve_twisted_cohomology(g, alpha, r, N=None):
    """Solve e^{-4 pi i r theta} nu(theta + alpha) - nu(theta) = P_r(theta) - g(theta).

    P_r collects the modes -(2r-1)..0 that cannot be removed.  In Fourier
    variables the relation reads
    nu^(m + 2r) e^{2 pi i (m + 2r) alpha} - nu^(m) = P^(m) - g^(m),
    which is solved by sweeping the index chains down from +N and up from
    -N; no divisor is ever inverted.
    """
    if r < 1:
        raise ValueError("twisted solver needs r >= 1")
    N = g.N if N is None else N
    g = g.truncated(N)
    nu = TrigPoly.zeros(N, g.coeffs.shape[1:])
    s = 2 * r

    def phase(m):
        return np.exp(2j * np.pi * m * alpha)

    def get(m):
        return nu.coeff(m)

    for m in range(N, 0, -1):
        nu.coeffs[m + N] = g.coeff(m) + phase(m + s) * get(m + s)
    for m in range(-N, -s + 1):
        target = m + s
        if target <= 0:
            nu.coeffs[target + N] = (get(m) - g.coeff(m)) / phase(target)
    p = TrigPoly.zeros(s - 1, g.coeffs.shape[1:])
    band = TrigPoly.zeros(N, g.coeffs.shape[1:])
    for m in range(-(s - 1), 1):
        val = g.coeff(m) + phase(m + s) * get(m + s) - get(m)
        band.coeffs[m + N] = val
        p.coeffs[m + s - 1] = val
    nu.amplification = 1.0
    return nu, band


def twisted_residual(nu, band, g, alpha, r, n=None, offset=0.37):
    """sup of e^{-4 pi i r th} nu(th + alpha) - nu(th) - band(th) + g(th) on an offset grid."""
    n = n or max(64, 4 * (nu.N + 2 * r) + 8)
    th = (np.arange(n) + offset) / n
    lhs = np.exp(-4j * np.pi * r * th) * nu(th + alpha) - nu(th)
    return float(np.max(np.abs(lhs - band(th) + g(th))))


def translation_residual(y, f, alpha, n=None, offset=0.37):
    n = n or max(64, 4 * y.N + 8)
    th = (np.arange(n) + offset) / n
    f0 = f.coeff(0)
    return float(np.max(np.abs(y(th + alpha) - y(th) - (f(th) - f0))))


# ---------------------------------------------------------------- normal form


H_GEN = np.diag([1j, -1j])


def e_r_su11(r, theta):
    theta = np.asarray(theta, dtype=float)
    out = np.zeros(theta.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = np.exp(2j * np.pi * r * theta)
    out[..., 1, 1] = np.exp(-2j * np.pi * r * theta)
    return out


def su11_from_parts(t, nu):
    return sl2.su11_matrix(np.real(t), nu)


@dataclass
class NormalFormOutput:
    Z: tuple  # (y, nu) TrigPolys
    Gamma: tuple  # (t0, band TrigPoly)
    F: np.ndarray = field(repr=False)  # su(1,1) samples
    norms: dict = field(default_factory=dict)
    identity_residual: float = 0.0
    linear_residual: float = 0.0


def _c_s(samples, s):
    return c_s_norm(samples, 1.0, s)


def normal_form_step(U, alpha, r, N, a=DEFAULTS.nf_exponent_a, eps0=DEFAULTS.nf_eps0, enforce=True):
    """One conjugation step near E_r.

    ``U`` holds su(1,1) samples on a uniform grid.  Returns Z, the resonant
    part Gamma = {t^(0), modes -(2r-1)..0 of nu}, and the remainder F measured
    exactly: e^{Z(th+alpha)} E_r e^{U} e^{-Z(th)} = E_r e^{Gamma + F}.
    """
    U = np.asarray(U, dtype=complex)
    n = U.shape[0]
    th = fourier.grid(n)
    t_s, nu_s = sl2.su11_parts(U)
    size2 = _c_s(U, 2)
    if enforce and size2 * N**a > eps0:
        raise StepTooLarge(f"|U|_2 N^a = {size2 * N**a:.3e} exceeds {eps0}")
    f = TrigPoly.from_samples(t_s, N)
    g = TrigPoly.from_samples(nu_s, N)
    f0 = float(np.real(f.coeff(0)))
    y = solve_translation_cohomology(f, alpha, N)
    y.coeffs = -y.coeffs
    if r >= 1:
        nu, band = solve_twisted_cohomology(g, alpha, r, N)
    else:
        nu, band = solve_untwisted(g, alpha, 0.0, N)
    Z = su11_from_parts(np.real(y(th)), nu(th))
    Zs = su11_from_parts(np.real(y(th + alpha)), nu(th + alpha))
    G = su11_from_parts(np.full(n, f0), band(th))
    er = e_r_su11(r, th)
    lhs = sl2.expm(Zs) @ er @ sl2.expm(U) @ sl2.expm(-Z)
    F = sl2.logm(sl2.inv(er) @ lhs) - G
    rhs = er @ sl2.expm(G + F)
    ident = float(np.max(sl2.opnorm(lhs - rhs)))
    lin = float(np.max(sl2.opnorm(lhs - er @ sl2.expm(G))))
    norms = {}
    for name, val in (("Z", Z), ("Gamma", G), ("F", F)):
        for s in (0, 1, 2):
            norms[f"{name}_{s}"] = _c_s(val, s)
    return NormalFormOutput((y, nu), (f0, band), F, norms, ident, lin)


def solve_untwisted(g, alpha, psi, N, tol=1e-8):
    """Solve e^{-4 pi i psi} nu(theta + alpha) - nu(theta) = -g(theta) (rotation angle psi turns)."""
    g = g.truncated(N)
    nu = TrigPoly.zeros(N, g.coeffs.shape[1:])
    for m in range(-N, N + 1):
        div = np.exp(2j * np.pi * (m * alpha - 2 * psi)) - 1
        if abs(div) < tol:
            raise ResonanceHit(f"divisor {abs(div):.2e} at mode {m}", k=m)
        nu.coeffs[m + N] = -g.coeff(m) / div
    return nu, TrigPoly.zeros(N, g.coeffs.shape[1:])


def resonant_projection(U, r):
    """Lambda_{2r} U = {t^(0), nu modes -(2r-1)..0} on the same grid."""
    U = np.asarray(U, dtype=complex)
    n = U.shape[0]
    t_s, nu_s = sl2.su11_parts(U)
    c = fourier.coefficients(nu_s)
    keep = np.zeros(n, dtype=bool)
    for m in range(-(2 * r - 1), 1):
        keep[m % n] = True
    band = np.fft.ifft(np.where(keep, c, 0) * n)
    return su11_from_parts(np.full(n, np.mean(t_s)), band)


def lambda_2r_monitor(U, r):
    """(|Lambda U|_0, |U - Lambda U|_0, ratio)."""
    lam = resonant_projection(U, r)
    lhs = float(np.max(sl2.opnorm(lam)))
    rhs = float(np.max(sl2.opnorm(np.asarray(U) - lam)))
    return lhs, rhs, (lhs / rhs if rhs > 0 else math.inf)


def hab_ratio(U):
    """int |nu| / |dU|_0."""
    U = np.asarray(U, dtype=complex)
    _, nu = sl2.su11_parts(U)
    du = fourier.derivative(U)
    return float(np.mean(np.abs(nu)) / np.max(sl2.opnorm(du)))


def conjugated_perturbation(r, alpha, b, n=256):
    """U with E_r e^U = B(th + alpha) E_r B(th)^{-1} in the su(1,1) picture."""
    th = fourier.grid(n)
    bs = sl2.to_su11(b(th).astype(complex))
    bsa = sl2.to_su11(b(th + alpha).astype(complex))
    er = e_r_su11(r, th)
    return sl2.logm(sl2.inv(er) @ bsa @ er @ sl2.inv(bs))


# ---------------------------------------------------------------- local KAM


@dataclass
class KamResult:
    B: Sl2Map
    A0: np.ndarray
    psi: float
    steps: int
    defects: list
    final_defect: float


def truncation(n_step, cap):
    return int(min(math.floor(math.exp(1.5**n_step)), cap))


def elliptic_frame(m):
    """Q in SL(2,R) and psi (turns) with m = Q rotation(2 pi psi) Q^{-1}."""
    m = np.asarray(m, dtype=float)
    tr = m[0, 0] + m[1, 1]
    if abs(tr) >= 2:
        raise NotElliptic(f"trace {tr:.6f} is not elliptic")
    w, v = np.linalg.eig(m)
    i = int(np.argmax(w.imag))
    vec = v[:, i]
    q = np.column_stack([vec.real, -vec.imag])
    if np.linalg.det(q) < 0:
        q = np.column_stack([vec.real, vec.imag])
        i = 1 - i
    q = q / np.sqrt(abs(np.linalg.det(q)))
    psi = np.angle(w[i]) / (2 * np.pi)
    if not np.allclose(q @ sl2.rotation_turns(psi) @ np.linalg.inv(q), m, atol=1e-10):
        psi = -psi
    return q, psi % 1.0


def kam_reduce_local(c, max_steps=6, n=256, tol=1e-10, dioph=None):
    """Reduce a cocycle close to an elliptic constant by iterated normal-form steps (r = 0).

    Returns B and a rotation A0 with B(th + alpha)^{-1} A(th) B(th) = A0.
    """
    from .contfrac import diophantine_wrt

    th = fourier.grid(n)
    samples = c.map(th)
    mean = sl2.renormalize(np.mean(samples, axis=0))
    q, psi = elliptic_frame(mean)
    if dioph is not None:
        kap, tau, K = dioph
        cert = diophantine_wrt(psi, c.alpha, kap, tau, K)
        if cert.rational_k0 is not None:
            raise ResonanceHit(f"rotation angle rational w.r.t. alpha (k0 = {cert.rational_k0})", k=cert.rational_k0)
    qi = np.linalg.inv(q)
    W = sl2.to_su11((qi @ samples @ q).astype(complex))
    zs = []
    defects = []
    for step in range(max_steps + 1):
        D = np.diag([np.exp(2j * np.pi * psi), np.exp(-2j * np.pi * psi)])
        defect = float(np.max(sl2.opnorm(W - D)))
        defects.append(defect)
        if defect <= tol or step == max_steps:
            break
        if len(defects) >= 3 and defects[-1] > defects[-2] > defects[-3]:
            raise Diverged("defect grew on two consecutive steps", defects=defects)
        N = truncation(step + 1, n // 2 - 1)
        U = sl2.logm(sl2.inv(D) @ W)
        t_s, nu_s = sl2.su11_parts(U)
        f = TrigPoly.from_samples(t_s, N)
        g = TrigPoly.from_samples(nu_s, N)
        y = solve_translation_cohomology(f, c.alpha, N)
        y.coeffs = -y.coeffs
        nu, _ = solve_untwisted(g, c.alpha, psi, N)
        Z = su11_from_parts(np.real(y(th)), nu(th))
        Zs = su11_from_parts(np.real(y(th + c.alpha)), nu(th + c.alpha))
        W = sl2.expm(Zs) @ W @ sl2.expm(-Z)
        psi = (psi + float(np.real(f.coeff(0))) / (2 * np.pi)) % 1.0
        zs.append(Z)
    factors = [Const(q)]
    for Z in zs:
        real_gen = sl2.coords(sl2.from_su11(-Z))
        factors.append(ExpTrig.from_samples(real_gen, tol=1e-18))
    B = Sl2Map(Product(factors))
    A0 = sl2.rotation_turns(psi)
    thv = (np.arange(n) + 0.5) / n
    final = float(np.max(sl2.opnorm(sl2.inv(B(thv + c.alpha)) @ c.map(thv) @ B(thv) - A0)))
    if final > max(tol, 1e-8) and defects[-1] > tol:
        raise Diverged(f"no convergence in {max_steps} steps (defect {defects[-1]:.2e})", defects=defects)
    return KamResult(B, A0, psi, len(zs), defects, final)


# ---------------------------------------------------------------- rigidity


def rigidity_conjugacy(D, A0, alpha, tol=1e-6):
    """Constant value of D given D(th + alpha) = A0 D(th) A0^{-1}; raises if a mode survives."""
    D = np.asarray(D)
    n = D.shape[0]
    c = fourier.coefficients(D)
    k = fourier.modes(n)
    size = np.linalg.norm(c.reshape(n, -1), axis=1)
    scale = max(size[0], np.max(size), 1e-300)
    rel = size / scale
    rel[0] = 0
    worst = int(np.argmax(rel))
    if rel[worst] > tol:
        raise Nonconstant(f"mode {k[worst]} has relative size {rel[worst]:.2e}", mode=int(k[worst]))
    a0i = np.linalg.inv(A0)
    resid = max(
        float(np.linalg.norm(A0 @ c[j] @ a0i - np.exp(2j * np.pi * k[j] * alpha) * c[j])) for j in range(n)
    )
    out = c[0]
    return (out.real if np.allclose(out.imag, 0) else out), resid


# ---------------------------------------------------------------- perturbations


@dataclass
class HyperbolicNeighbor:
    map: Sl2Map
    k: int
    H: np.ndarray
    eta: float
    distance: float
    frame: np.ndarray = field(repr=False, default=None)

    @property
    def expected_lyapunov(self):
        return float(np.log(np.max(np.abs(np.linalg.eigvals(self.H)))))


def hyperbolic_neighbor(A0, alpha, eps, s=0, n=1024, kmax=10**6):
    """A(th) = Q R_{k(th+alpha)} H R_{-k th} Q^{-1}, C^s-close to A0, with H hyperbolic.

    k is the smallest |k| with |R_{k alpha} - R_phi| <= eps/2 (phi the
    rotation angle of A0); H = diag(e^eta, e^-eta) starts at
    eta = eps / (20 max(|k|,1)^s) and is halved until the grid C^s distance
    to A0 is at most eps.
    """
    q, phi = elliptic_frame(A0)
    k = None
    for j in range(0, kmax):
        for cand in ((j, -j) if j else (0,)):
            if 2 * abs(math.sin(math.pi * (phi - cand * alpha))) <= eps / 2:
                k = cand
                break
        if k is not None:
            break
    if k is None:
        raise NotElliptic("no admissible k found")
    qi = np.linalg.inv(q)
    th = fourier.grid(n)
    eta = eps / (20 * max(abs(k), 1) ** s)
    a0 = np.broadcast_to(np.asarray(A0, dtype=float), (n, 2, 2))
    while True:
        H = np.diag([math.exp(eta), math.exp(-eta)])
        node = Product([Const(q), Shift(RotPath(k), alpha), Const(H), RotPath(-k), Const(qi)])
        m = Sl2Map(node)
        dist = c_s_norm(m(th) - a0, 1.0, s)
        if dist <= eps:
            return HyperbolicNeighbor(m, k, H, eta, dist, q)
        eta /= 2
        if eta < 1e-300:
            raise NotElliptic("could not meet the C^s budget")


def cone_field_certificate(nb, alpha, n=512):
    """Largest |v|/|u| of images of cone-boundary vectors in the moving frame (< 1 certifies)."""
    th = fourier.grid(n)
    frame = nb.frame @ sl2.rotation_turns(nb.k * th)  # Q B(th)^{-1}
    frame_next = nb.frame @ sl2.rotation_turns(nb.k * (th + alpha))
    worst = 0.0
    for w in (np.array([1.0, 1.0]), np.array([1.0, -1.0])):
        img = sl2.inv(frame_next) @ nb.map(th) @ frame @ w
        worst = max(worst, float(np.max(np.abs(img[..., 1]) / np.abs(img[..., 0]))))
    return worst


# ---------------------------------------------------------------- destabilizer

CHI_NORM = 315.0 / 256.0


def chi(u):
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) < 1, CHI_NORM * (1 - u * u) ** 4, 0.0)


@dataclass
class DestabilizerResult:
    x: float
    y: float
    lam: float
    mu: float
    nu: float
    delta: float
    limits: tuple

    @property
    def margin(self):
        return self.lam**2 - self.mu * self.nu

    def w(self, theta):
        theta = np.asarray(theta, dtype=float)
        d = self.delta

        def wrap(v):
            return (v + 0.5) % 1.0 - 0.5

        return (chi(wrap(self.x - theta) / d) - chi(wrap(self.y - theta) / d)) / d


def _zeros(f, n):
    th = np.linspace(0.0, 1.0, n + 1)
    v = f(th)
    out = []
    for i in range(n):
        if v[i] == 0:
            out.append(th[i])
        elif v[i] * v[i + 1] < 0:
            out.append(brentq(lambda t: float(f(np.array([t]))[0]), th[i], th[i + 1], xtol=1e-14))
    return sorted({round(z % 1.0, 13) for z in out})


def schrodinger_destabilizer(B, delta, n=4096, quad=64):
    """Bump difference w at a zero x of c and a zero y of d, and the integrals
    lambda = int w c d, mu = int w d^2, nu = int w c^2 (B = [[a, c], [b, d]])."""

    def c(t):
        return B(t)[..., 0, 1]

    def d(t):
        return B(t)[..., 1, 1]

    xs, ys = _zeros(c, n), _zeros(d, n)
    if not xs or not ys:
        raise NoZeroFound("c or d has no zero on the circle")
    pairs = []
    for x in xs:
        for y in ys:
            gap = abs((x - y + 0.5) % 1.0 - 0.5)
            if gap > 2 * delta:
                dx = float(d(np.array([x]))[0])
                cy = float(c(np.array([y]))[0])
                pairs.append((abs(dx) * abs(cy), x, y))
    if not pairs:
        raise ZerosCoincide("zeros of c and d are closer than the bump support")
    _, x, y = max(pairs)
    u, wts = np.polynomial.legendre.leggauss(quad)
    wts = wts * chi(u)

    def bump_integral(h):
        return float(np.sum(wts * h(x - delta * u)) - np.sum(wts * h(y - delta * u)))

    lam = bump_integral(lambda t: c(t) * d(t))
    mu = bump_integral(lambda t: d(t) ** 2)
    nu = bump_integral(lambda t: c(t) ** 2)
    limits = (float(d(np.array([x]))[0] ** 2), -float(c(np.array([y]))[0] ** 2))
    return DestabilizerResult(x, y, lam, mu, nu, delta, limits)


__all__ = [name for name in dir() if not name.startswith("_")]
_ = degree  # re-exported for callers checking the degree precondition
