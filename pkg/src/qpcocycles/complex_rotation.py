"""Complexified cocycles A(theta) C_z, their invariant sections and the
complex rotation number zeta(z).

In the su(1,1) picture ``U_z(theta) = P A(theta) C_z P^{-1}`` acts on the
unit disk; for 0 < |z| < 1 it is a strict contraction and the invariant disk
section is obtained by pulling the constant section 0 along exact orbits.
The real part of zeta is the Lyapunov exponent of the complexified cocycle
and ``(-Im zeta / 2 pi) mod 1`` is the fibered rotation number on |z| = 1.
Half-plane coordinates are ``m = i (tau + 1) / (tau - 1)``, so the disk
corresponds to the lower half-plane.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import fourier, sl2
from .cocycle import Const, Product, QpCocycle, Schrodinger, Sl2Map, degree
from .config import DEFAULTS
from .errors import BranchFault, GridTooCoarse, NoContraction, SectionCollapse
from .invariants import fibered_rotation_number, lyapunov_exponent

# ---------------------------------------------------------------- complexification


def complexify(c, z):
    """(alpha, A(.) C_z); on |z| = 1 this is A(.) rotated by arg z."""
    cz = sl2.c_matrix(complex(z))
    if abs(abs(z) - 1) < 1e-14:
        cz = sl2.rotation(np.angle(z))
    return QpCocycle(c.alpha, Sl2Map(Product([c.map.node, Const(cz)]), c.map.period))


def z_of_lambda(lam):
    return (lam - 1j) / (lam + 1j)


def lambda_of_z(z):
    return 1j * (1 + z) / (1 - z)


def disk_to_half_plane(tau):
    return 1j * (tau + 1) / (tau - 1)


def half_plane_to_disk(m):
    return (m + 1j) / (m - 1j)


class SpectralMap:
    """Trigonometric interpolant of a 1-periodic matrix map on a uniform grid.

    ``at(s)`` returns the values on ``grid + s``; the grid is doubled until
    the top quarter of the spectrum is negligible.
    """

    def __init__(self, func, n=256, max_n=8192, tol=1e-14):
        while True:
            th = fourier.grid(n)
            samples = np.asarray(func(th), dtype=complex)
            coef = np.fft.fft(samples, axis=0) / n
            k = fourier.modes(n)
            tail = np.max(np.abs(coef[np.abs(k) > n // 4]), initial=0.0)
            scale = max(np.max(np.abs(coef)), 1.0)
            if tail <= tol * scale or n >= max_n:
                break
            n *= 2
        if tail > 1e-10 * scale:
            raise GridTooCoarse(f"map not resolved on {n} nodes (tail {tail:.1e})", n=n)
        self.n = n
        self.theta = th
        self.coef = coef * n
        self.k = k.reshape((n, 1, 1))

    def at(self, s):
        return np.fft.ifft(self.coef * np.exp(2j * np.pi * self.k * s), axis=0)


def _moebius(m, w):
    a, b, c, d = m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]
    return (a * w + b) / (c * w + d)


# ---------------------------------------------------------------- sections


@dataclass
class DiskSection:
    theta: np.ndarray = field(repr=False)
    tau: np.ndarray = field(repr=False)
    sweeps: int = 0
    residual: float = 0.0
    uniqueness: float = 0.0
    z: complex = 0j
    alpha: float = 0.0


def _pull(smap, alpha, steps, x0, offset=0.0, forward=True):
    """Image at grid + offset of the constant section x0 after ``steps`` transfers.

    Forward: tau(th) = M(th - alpha) ... M(th - steps alpha) x0.
    Backward: m(th) = M(th)^{-1} ... M(th + (steps - 1) alpha)^{-1} x0.
    """
    x = np.broadcast_to(np.asarray(x0, dtype=complex), (smap.n,)).copy()
    if forward:
        for j in range(steps, 0, -1):
            x = _moebius(smap.at(offset - j * alpha), x)
    else:
        for j in range(steps - 1, -1, -1):
            x = _moebius(sl2.inv(smap.at(offset + j * alpha)), x)
    return x


def _steps_for(rate, tol):
    rate = min(max(rate, 1e-300), 1 - 1e-15)
    return int(math.ceil(math.log(tol) / math.log(rate))) + 32


def _converged_section(smap, alpha, x0, rate, tol, forward, max_steps):
    steps = min(_steps_for(rate, tol), max_steps)
    while True:
        x = _pull(smap, alpha, steps, x0, 0.0, forward)
        if forward:
            prev = _pull(smap, alpha, steps, x0, -alpha, True)
            resid = float(np.max(np.abs(_moebius(smap.at(-alpha), prev) - x)))
        else:
            nxt = _pull(smap, alpha, steps, x0, alpha, False)
            resid = float(np.max(np.abs(_moebius(sl2.inv(smap.at(0.0)), nxt) - x)))
        if resid <= tol:
            return x, steps, resid
        if steps >= max_steps:
            raise NoContraction(f"residual {resid:.2e} after {steps} transfers", residual=resid)
        steps = min(2 * steps, max_steps)


def _disk_smap(c, z, n):
    cz = sl2.c_matrix(complex(z))
    return SpectralMap(lambda th: sl2.P @ (c.map(th) @ cz) @ sl2.P_INV, n)


def invariant_section(c, z, n=DEFAULTS.section_grid, tol=1e-11, max_sweeps=DEFAULTS.max_sweeps, seed=0):
    """Disk-valued section with U_z(th) . tau(th) = tau(th + alpha), for 0 < |z| < 1."""
    z = complex(z)
    if not 0 < abs(z) < 1:
        raise ValueError("invariant_section needs 0 < |z| < 1")
    smap = _disk_smap(c, z, n)
    tau, steps, resid = _converged_section(smap, c.alpha, 0.0, abs(z) ** 2, tol, True, max_sweeps)
    rng = np.random.default_rng(seed)
    start = 0.9 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
    other = _pull(smap, c.alpha, steps, start)
    out = DiskSection(smap.theta, tau, steps, resid, float(np.max(np.abs(other - tau))), z, c.alpha)
    out.smap = smap
    return out


# ---------------------------------------------------------------- zeta


@dataclass
class ZetaResult:
    zeta: complex
    re_check: float = math.nan
    im_check: float = math.nan
    winding: int = 0

    @property
    def rotation(self):
        return rotation_from_zeta(self.zeta)


def rotation_from_zeta(zeta):
    """Fibered rotation number (turns, mod 1) carried by Im zeta."""
    return (-complex(zeta).imag / (2 * np.pi)) % 1.0


def _rho(smap, tau, s=0.0):
    u = smap.at(s)
    return u[..., 1, 0] * tau + u[..., 1, 1]


def _branch_table(rho):
    p = np.angle(rho)
    steps = (np.diff(np.concatenate([p, p[:1]])) + np.pi) % (2 * np.pi) - np.pi
    if np.max(np.abs(steps)) > np.pi / 2:
        raise BranchFault("phase of rho jumps by more than a quarter turn between nodes; refine the grid")
    table = p[0] + np.concatenate([[0.0], np.cumsum(steps[:-1])])
    winding = int(round((table[-1] + steps[-1] - table[0]) / (2 * np.pi)))
    return table, winding


def zeta(c, z, section=None, check=True, lyap_n=4000, orbit_len=2000):
    """Grid mean of Log rho(z, th, tau(th)), the phase unwrapped from th = 0."""
    section = section or invariant_section(c, z)
    if section.residual > 1e-8:
        raise NoContraction(f"section residual {section.residual:.2e} above 1e-8", residual=section.residual)
    smap = section.smap
    rho = _rho(smap, section.tau)
    table, winding = _branch_table(rho)
    val = complex(np.mean(np.log(np.abs(rho))), np.mean(table))
    res = ZetaResult(val, winding=winding)
    if check:
        res.re_check = lyapunov_exponent(complexify(c, z), n=lyap_n, samples=32).value
        res.im_check = _birkhoff_phase(smap, section.tau, table, winding, c.alpha, orbit_len)
    return res


def _birkhoff_phase(smap, tau, table, winding, alpha, length):
    """Orbit average of the lifted phase of rho, started on the section at every node."""
    n = smap.n
    th = smap.theta
    x = tau.copy()
    total = 0.0
    for j in range(length):
        s = j * alpha
        u = smap.at(s)
        rho = u[..., 1, 0] * x + u[..., 1, 1]
        pts = th + s
        k = np.floor(pts)
        approx = np.interp(pts - k, np.append(th, 1.0), np.append(table, table[0] + 2 * np.pi * winding))
        approx = approx + 2 * np.pi * winding * k
        p = np.angle(rho)
        total += float(np.mean(p + 2 * np.pi * np.round((approx - p) / (2 * np.pi))))
        x = _moebius(u, x)
    return total / length


def cauchy_riemann_residual(c, z, h=1e-4, n=256):
    """|d zeta / d conj(z)| from a four-point stencil."""

    def zf(w):
        return zeta(c, w, invariant_section(c, w, n), check=False).zeta

    dx = (zf(z + h) - zf(z - h)) / (2 * h)
    dy = (zf(z + 1j * h) - zf(z - 1j * h)) / (2 * h)
    return abs(0.5 * (dx + 1j * dy))


# ---------------------------------------------------------------- boundary scans


def _extrapolate(radii, values):
    x = 1 - np.asarray(radii, dtype=float)
    deg = len(x) - 1
    coef = np.polyfit(x, np.asarray(values), deg)
    return complex(np.polyval(coef, 0.0))


def _align(values):
    """Shift imaginary parts by multiples of 2 pi to follow the first entry."""
    out = [complex(values[0])]
    for v in values[1:]:
        im = v.imag + 2 * np.pi * round((out[-1].imag - v.imag) / (2 * np.pi))
        out.append(complex(v.real, im))
    return out


def boundary_value(c, beta, radii=(0.9, 0.99, 0.999), n=256, tol=1e-10):
    vals = []
    for r in radii:
        z = r * np.exp(1j * beta)
        vals.append(zeta(c, z, invariant_section(c, z, n, tol), check=False).zeta)
    vals = _align(vals)
    return _extrapolate(radii, vals), vals


def rotated(c, beta):
    return QpCocycle(c.alpha, Sl2Map(Product([c.map.node, Const(sl2.rotation(beta))]), c.map.period))


def boundary_scan(c, betas, radii=(0.9, 0.99, 0.999), n=256, direct=True, rot_n=100_000, lyap_n=4000):
    """Rows (beta, r, Re zeta, Im zeta, boundary rotation, direct Lyapunov, direct rotation)."""
    rows = []
    for beta in betas:
        limit, vals = boundary_value(c, beta, radii, n)
        lyap = rot = math.nan
        if direct:
            cb = rotated(c, beta)
            lyap = lyapunov_exponent(cb, n=lyap_n, samples=32).value
            if degree(cb.map, 1024) == 0:
                rot = fibered_rotation_number(cb, rot_n, grid=1024, check_degree=False).value
        for r, v in zip(radii, vals):
            rows.append({"beta": beta, "r": r, "re": v.real, "im": v.imag, "rotation": rotation_from_zeta(v),
                         "lyap_direct": lyap, "rot_direct": rot})
        rows.append({"beta": beta, "r": 1.0, "re": limit.real, "im": limit.imag,
                     "rotation": rotation_from_zeta(limit), "lyap_direct": lyap, "rot_direct": rot})
    return rows


def scan_summary(rows, zero_tol=1e-3):
    """Flags beta with vanishing boundary exponent and the spread of the rotation number there."""
    edge = [r for r in rows if r["r"] == 1.0]
    flagged = [r for r in edge if abs(r["re"]) < zero_tol]
    rots = np.unwrap(2 * np.pi * np.array([r["rotation"] for r in flagged])) / (2 * np.pi) if flagged else []
    spread = float(np.max(rots) - np.min(rots)) if len(rots) else 0.0
    return {"zero_exponent_betas": [r["beta"] for r in flagged], "rotation_spread": spread}


# ---------------------------------------------------------------- I / J identity


@dataclass
class IJResult:
    I: float
    J: complex
    defect: float
    pointwise_min: float
    z: complex
    m_plus: np.ndarray = field(repr=False, default=None)
    m_minus: np.ndarray = field(repr=False, default=None)


def _half_plane_sections(func, alpha, forward_start, rate, n, tol, max_steps):
    smap = SpectralMap(func, n)
    fwd, _, _ = _converged_section(smap, alpha, forward_start, rate, tol, True, max_steps)
    bwd, _, _ = _converged_section(smap, alpha, np.conj(forward_start), rate, tol, False, max_steps)
    if np.all(fwd.imag > 0) and np.all(bwd.imag < 0):
        return fwd, bwd
    if np.all(fwd.imag < 0) and np.all(bwd.imag > 0):
        return bwd, fwd
    raise SectionCollapse("sections do not separate into the two half-planes")


def ij_defect(c, lam, n=256, tol=1e-12, max_steps=DEFAULTS.max_sweeps):
    """I, J and I - 4 Im J for A(.) C_z with z = (lam - i)/(lam + i)."""
    z = z_of_lambda(complex(lam))
    cz = sl2.c_matrix(z)
    rate = min(abs(z) ** 2, abs(z) ** -2)
    start = -1j if abs(z) < 1 else 1j
    mp, mm = _half_plane_sections(lambda th: c.map(th) @ cz, c.alpha, start, rate, n, tol, max_steps)
    gap = np.abs(mp - mm)
    if np.min(gap) < 1e-8:
        raise SectionCollapse(f"|m+ - m-| = {np.min(gap):.2e}")
    ip = (1 + np.abs(mp) ** 2) / mp.imag
    im_ = (1 + np.abs(mm) ** 2) / mm.imag
    jj = (1 + mm * mp) / (mm - mp)
    I = float(np.mean(ip - im_))
    J = complex(np.mean(jj))
    pointwise = ip - im_ - 4 * jj.imag
    return IJResult(I, J, I - 4 * J.imag, float(np.min(pointwise)), z, mp, mm)


# ---------------------------------------------------------------- Schroedinger


def schrodinger_complexify(c, lam):
    """[[V - E - lam, 1], [-1, 0]] for a Schroedinger cocycle c."""
    node = c.map.node
    if not isinstance(node, Schrodinger):
        raise ValueError("schrodinger_complexify needs a Schroedinger cocycle")
    shift = node.energy_shift + lam
    return QpCocycle(c.alpha, Sl2Map(Schrodinger(node.terms, shift), c.map.period))


def inverse_identity_residual(c, n=256):
    """sup |A^{-1} - Q A^T Q^{-1}| with Q the quarter-turn rotation."""
    s = c.map(fourier.grid(n))
    q = sl2.J2
    rhs = q @ np.swapaxes(s, -1, -2) @ np.linalg.inv(q)
    return float(np.max(np.abs(sl2.inv(s) - rhs)))


def schrodinger_ij_defect(c, lam, n=256, tol=1e-12, max_steps=DEFAULTS.max_sweeps):
    """I = int (1/Im m+ - 1/Im m-), J = int 1/(m- - m+), defect = I - 4 Im J."""
    lam = complex(lam)
    if lam.imag == 0:
        raise ValueError("Im lambda must be nonzero")
    cl = schrodinger_complexify(c, lam)
    start = -1j if lam.imag < 0 else 1j
    probe = SpectralMap(cl.map, n)
    rate = _contraction_estimate(probe, c.alpha, start)
    mp, mm = _half_plane_sections(cl.map, c.alpha, start, rate, n, tol, max_steps)
    gap = np.abs(mp - mm)
    if np.min(gap) < 1e-8:
        raise SectionCollapse(f"|m+ - m-| = {np.min(gap):.2e}")
    ip, im_ = 1 / mp.imag, 1 / mm.imag
    jj = 1 / (mm - mp)
    I = float(np.mean(ip - im_))
    J = complex(np.mean(jj))
    return IJResult(I, J, I - 4 * J.imag, float(np.min(ip - im_ - 4 * jj.imag)), lam, mp, mm)


def _contraction_estimate(smap, alpha, start, steps=64):
    """Empirical per-step contraction of the forward transfer (for step budgeting)."""
    a = _pull(smap, alpha, steps, start)
    b = _pull(smap, alpha, steps, start + 0.1 * start)
    a2 = _pull(smap, alpha, 2 * steps, start)
    b2 = _pull(smap, alpha, 2 * steps, start + 0.1 * start)
    d1 = max(float(np.max(np.abs(a - b))), 1e-300)
    d2 = max(float(np.max(np.abs(a2 - b2))), 1e-300)
    return min(max((d2 / d1) ** (1 / steps), 1e-6), 0.999999)


def dw_dlambda(c, lam, h=1e-5, n=256):
    """Central difference of zeta(z(lam)) in lam, for Im lam > 0 (|z| < 1)."""
    lam = complex(lam)

    def w(l):
        z = z_of_lambda(l)
        return zeta(c, z, invariant_section(c, z, n), check=False).zeta

    return (w(lam + h) - w(lam - h)) / (2 * h)
