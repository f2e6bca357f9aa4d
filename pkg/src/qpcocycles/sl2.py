"""Linear algebra of SL(2,R), sl(2,R) and su(1,1).

Matrices are numpy arrays of shape ``(..., 2, 2)``; every function broadcasts
over leading axes.  Elements of sl(2,R) are stored as arrays of shape
``(..., 3)`` holding the coordinates ``(x, y, z)`` of

    {x, y, z} = [[x, y - z], [y + z, -x]]

so that ``det = -x**2 - y**2 + z**2`` and the generator of positive rotations
``[[0, -1], [1, 0]]`` is ``{0, 0, 1}``.  With this orientation the loop of
rotations ``E_r`` has logarithmic derivative ``{0, 0, 2*pi*r}`` in the future
cone ``z >= sqrt(x**2 + y**2)``.
"""

from typing import NamedTuple

import numpy as np

from .config import TOL
from .errors import ConeViolation, NotUnimodular, PoleError

ID2 = np.eye(2)
J2 = np.array([[0.0, -1.0], [1.0, 0.0]])

P = np.array([[-1.0, -1.0j], [-1.0, 1.0j]])
P_INV = np.linalg.inv(P)

INFINITY = complex("inf")


# ---------------------------------------------------------------- matrices


def rotation(beta):
    """Rotation by ``beta`` radians; broadcasts over ``beta``."""
    beta = np.asarray(beta, dtype=float)
    c, s = np.cos(beta), np.sin(beta)
    out = np.empty(beta.shape + (2, 2))
    out[..., 0, 0] = c
    out[..., 0, 1] = -s
    out[..., 1, 0] = s
    out[..., 1, 1] = c
    return out


def rotation_turns(x):
    """Rotation by ``2*pi*x``."""
    return rotation(2 * np.pi * np.asarray(x, dtype=float))


def det(m):
    m = np.asarray(m)
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def inv(m):
    """Inverse of 2x2 matrices (any determinant)."""
    m = np.asarray(m)
    out = np.empty_like(m)
    d = det(m)
    out[..., 0, 0] = m[..., 1, 1] / d
    out[..., 0, 1] = -m[..., 0, 1] / d
    out[..., 1, 0] = -m[..., 1, 0] / d
    out[..., 1, 1] = m[..., 0, 0] / d
    return out


def opnorm(m):
    """Largest singular value of 2x2 matrices, closed form."""
    m = np.asarray(m)
    fro = np.sum(np.abs(m) ** 2, axis=(-2, -1))
    ad = np.abs(det(m))
    disc = np.sqrt(np.maximum(fro * fro - 4 * ad * ad, 0.0))
    return np.sqrt(0.5 * (fro + disc))


def is_unimodular(m, tol=TOL.unimodular):
    return bool(np.all(np.abs(det(m) - 1) <= tol))


def check_unimodular(m, tol=TOL.unimodular):
    if not is_unimodular(m, tol):
        worst = float(np.max(np.abs(det(m) - 1)))
        raise NotUnimodular(f"|det - 1| = {worst:.3e}", defect=worst)


def renormalize(m):
    """Divide by sqrt(det) where det > 0."""
    m = np.asarray(m, dtype=float)
    d = det(m)
    return m / np.sqrt(d)[..., None, None]


def expm(x):
    """Exponential of traceless 2x2 matrices (real or complex)."""
    x = np.asarray(x)
    d = det(x)
    s = np.sqrt(-d.astype(complex))
    small = np.abs(s) < 1e-4
    s_safe = np.where(small, 1.0, s)
    ch = np.where(small, 1 + s * s / 2 + s**4 / 24, np.cosh(s_safe))
    sh = np.where(small, 1 + s * s / 6 + s**4 / 120, np.sinh(s_safe) / s_safe)
    out = ch[..., None, None] * np.eye(2) + sh[..., None, None] * x
    if not np.iscomplexobj(x):
        out = out.real
    return out


def logm(m):
    """Principal logarithm of unimodular 2x2 matrices with half-trace > -1.

    Returns a traceless matrix ``X`` with ``expm(X) = m``.  Real input gives
    real output; raises ``ValueError`` where no real logarithm exists.
    """
    m = np.asarray(m)
    c = 0.5 * (m[..., 0, 0] + m[..., 1, 1])
    if not np.iscomplexobj(m) and np.any(c <= -1):
        raise ValueError("no real logarithm (half-trace <= -1)")
    cc = c.astype(complex)
    u = np.arccosh(cc)
    sh = np.sinh(u)
    small = np.abs(u) < 1e-4
    factor = np.where(small, 1 - u * u / 6 + 7 * u**4 / 360, u / np.where(small, 1.0, sh))
    traceless = m - c[..., None, None] * np.eye(2)
    out = factor[..., None, None] * traceless
    if not np.iscomplexobj(m):
        out = out.real
    return out


def has_real_log(m):
    m = np.asarray(m)
    return np.real(0.5 * (m[..., 0, 0] + m[..., 1, 1])) > -1


def polar_angle(m):
    """Angle (radians) of the rotation factor in the polar decomposition m = R S."""
    m = np.asarray(m)
    return np.arctan2(m[..., 1, 0] - m[..., 0, 1], m[..., 0, 0] + m[..., 1, 1])


def polar(m):
    """Return (phi, S) with m = rotation(phi) @ S, S symmetric positive."""
    phi = polar_angle(m)
    s = rotation(-phi) @ np.asarray(m)
    s = 0.5 * (s + np.swapaxes(s, -1, -2))
    return phi, s


# ---------------------------------------------------------------- sl(2,R)


class AlgebraVector(NamedTuple):
    """Coordinates of ``{x, y, z}``; fields may be scalars or arrays."""

    x: float
    y: float
    z: float

    @classmethod
    def from_array(cls, a):
        a = np.asarray(a)
        return cls(a[..., 0], a[..., 1], a[..., 2])

    @classmethod
    def from_matrix(cls, m):
        return cls.from_array(coords(m))

    def array(self):
        return np.stack(np.broadcast_arrays(self.x, self.y, self.z), axis=-1)

    def matrix(self):
        return matrix(self.array())

    def q(self):
        return quad_form(self.array())

    def norm(self):
        return minkowski_norm(self.array())


def _arr(v):
    if isinstance(v, AlgebraVector):
        return v.array()
    return np.asarray(v)


def matrix(v):
    v = _arr(v)
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    out = np.empty(v.shape[:-1] + (2, 2), dtype=v.dtype)
    out[..., 0, 0] = x
    out[..., 0, 1] = y - z
    out[..., 1, 0] = y + z
    out[..., 1, 1] = -x
    return out


def coords(m):
    """Coordinates of the traceless part of ``m``."""
    m = np.asarray(m)
    x = 0.5 * (m[..., 0, 0] - m[..., 1, 1])
    y = 0.5 * (m[..., 0, 1] + m[..., 1, 0])
    z = 0.5 * (m[..., 1, 0] - m[..., 0, 1])
    return np.stack([x, y, z], axis=-1)


def quad_form(v):
    v = _arr(v)
    return -v[..., 0] ** 2 - v[..., 1] ** 2 + v[..., 2] ** 2


def kappa(v, w):
    v, w = _arr(v), _arr(w)
    return -v[..., 0] * w[..., 0] - v[..., 1] * w[..., 1] + v[..., 2] * w[..., 2]


def euclid_norm(v):
    return np.linalg.norm(_arr(v), axis=-1)


def in_future_cone(v, tol=TOL.cone):
    v = _arr(v)
    return (quad_form(v) >= -tol) & (v[..., 2] >= -tol)


def minkowski_norm(v, tol=TOL.cone):
    """N(v) = sqrt(q(v)) on the future cone."""
    v = _arr(v)
    q = quad_form(v)
    if np.any(q < -tol) or np.any(v[..., 2] < -tol):
        raise ConeViolation("vector outside the future cone")
    return np.sqrt(np.maximum(q, 0.0))


def ad_action(a, v, check=True):
    """Coordinates of ``a v a^{-1}``."""
    a = np.asarray(a)
    if check:
        check_unimodular(a, TOL.sample_unimodular)
    return coords(a @ matrix(_arr(v)) @ inv(a))


def bracket(v, w):
    vm, wm = matrix(_arr(v)), matrix(_arr(w))
    return coords(vm @ wm - wm @ vm)


def cone_membership(v, delta=0.0):
    """True where ``z >= (1 + delta) sqrt(x^2 + y^2)`` up to the cone tolerance."""
    v = _arr(v)
    return v[..., 2] >= (1 + delta) * np.hypot(v[..., 0], v[..., 1]) - TOL.cone


def cone_margin(v):
    """Largest delta with v in E+_delta (inf on the axis)."""
    v = _arr(v)
    r = np.hypot(v[..., 0], v[..., 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(r > 0, v[..., 2] / np.where(r > 0, r, 1.0) - 1, np.inf)


class CommutatorDefect(NamedTuple):
    bracket_norm: float
    bound: float
    acs_residual: float
    anti_cs_defect: float


def commutator_defect(v, w):
    """Norm of [v, w] against the bound 2 sqrt(kappa^2 - q q) |v|^2 / q(v).

    Also returns the relative residual of ``q(v) q(w) = kappa^2 + q(b)`` with
    ``b = [v, w] / 2`` (the matrix commutator carries a factor 2 in these
    coordinates) and ``kappa - N(v) N(w)`` (nonnegative on the future cone).
    """
    v, w = _arr(v).astype(float), _arr(w).astype(float)
    if not (np.all(in_future_cone(v)) and np.all(in_future_cone(w))):
        raise ConeViolation("commutator_defect needs future-cone arguments")
    qv, qw = quad_form(v), quad_form(w)
    if np.any(qv < TOL.light_cone * np.sum(v * v, axis=-1)):
        raise ConeViolation("first argument too close to the light cone")
    k = kappa(v, w)
    b = bracket(v, w)
    bn = euclid_norm(b)
    bound = 2 * np.sqrt(np.maximum(k * k - qv * qw, 0.0)) * np.sum(v * v, axis=-1) / qv
    scale = np.maximum(np.abs(qv * qw) + k * k, 1e-300)
    acs = (qv * qw - k * k - quad_form(b) / 4) / scale
    anti = k - np.sqrt(np.maximum(qv, 0)) * np.sqrt(np.maximum(qw, 0))
    return CommutatorDefect(bn, bound, acs, anti)


# ---------------------------------------------------------------- su(1,1)


class Su11Vector(NamedTuple):
    """``{t, nu} = [[i t, nu], [conj(nu), -i t]]``."""

    t: float
    nu: complex

    def matrix(self):
        return su11_matrix(self.t, self.nu)


def su11_matrix(t, nu):
    t = np.asarray(t, dtype=float)
    nu = np.asarray(nu, dtype=complex)
    t, nu = np.broadcast_arrays(t, nu)
    out = np.empty(t.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = 1j * t
    out[..., 0, 1] = nu
    out[..., 1, 0] = np.conj(nu)
    out[..., 1, 1] = -1j * t
    return out


def su11_parts(m):
    """(t, nu) of an su(1,1) matrix (traceless part)."""
    m = np.asarray(m)
    t = np.imag(0.5 * (m[..., 0, 0] - m[..., 1, 1]))
    return t, m[..., 0, 1]


def to_su11(a):
    """P a P^{-1}; sends SL(2,R) to SU(1,1) and rotations to diagonal matrices."""
    return P @ np.asarray(a) @ P_INV


def from_su11(b, real=True):
    out = P_INV @ np.asarray(b) @ P
    return out.real if real else out


def algebra_to_su11(v):
    """su(1,1) coordinates (t, nu) of the sl(2,R) vector v."""
    return su11_parts(to_su11(matrix(_arr(v)).astype(complex)))


def su11_to_algebra(t, nu):
    return coords(from_su11(su11_matrix(t, nu)))


def c_matrix(z):
    """C_z = [[e, -f], [f, e]] with e = (z + 1/z)/2, f = (z - 1/z)/(2i)."""
    z = np.asarray(z, dtype=complex)
    e = 0.5 * (z + 1 / z)
    f = (z - 1 / z) / 2j
    out = np.empty(z.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = e
    out[..., 0, 1] = -f
    out[..., 1, 0] = f
    out[..., 1, 1] = e
    return out


def d_matrix(z):
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = z
    out[..., 1, 1] = 1 / z
    return out


# ---------------------------------------------------------------- Moebius


def moebius_act(m, w, projective=False):
    """(a w + b) / (c w + d); ``w`` may be ``INFINITY``."""
    m = np.asarray(m)
    a, b, c, d = m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]
    w = np.asarray(w, dtype=complex)
    at_inf = np.isinf(w)
    w_safe = np.where(at_inf, 0, w)
    num = np.where(at_inf, a, a * w_safe + b)
    den = np.where(at_inf, c, c * w_safe + d)
    pole = np.abs(den) < TOL.pole
    if np.any(pole) and not projective:
        raise PoleError("Moebius image at infinity")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(pole, INFINITY, num / np.where(pole, 1, den))
    return out[()] if out.ndim == 0 else out


def im_moebius_c(z, w):
    """Imaginary part of C_z . w from the closed form in |z| and Im w."""
    z = complex(z)
    w = np.asarray(w, dtype=complex)
    e = 0.5 * (z + 1 / z)
    f = (z - 1 / z) / 2j
    num = (abs(e) ** 2 + abs(f) ** 2) * w.imag + (1 + np.abs(w) ** 2) * 0.25 * (
        abs(z) ** 2 - abs(z) ** -2
    )
    return num / np.abs(f * w + e) ** 2
