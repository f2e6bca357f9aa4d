"""Fibered rotation number, Lyapunov exponent and Oseledec directions."""

import math
from dataclasses import dataclass, field

import numpy as np

from . import fourier, sl2
from .cocycle import degree, fibered_product
from .config import DEFAULTS
from .errors import NoHyperbolicity, NonzeroDegree


class Lift:
    """Continuous lift of the action of a map on unit vectors.

    The polar angle of the map is unwrapped on a fine grid; the symmetric
    factor moves directions by less than a quarter turn, so its displacement
    is read off the principal branch.  Angles are in radians.
    """

    def __init__(self, m, n=DEFAULTS.grid):
        self.map = m
        self.period = m.period
        theta = np.linspace(0.0, m.period, n + 1)
        phi = np.unwrap(sl2.polar_angle(m(theta)))
        self.theta = theta
        self.table = phi
        self.winding = phi[-1] - phi[0]

    def base_angle(self, theta):
        theta = np.asarray(theta, dtype=float)
        k = np.floor(theta / self.period)
        approx = np.interp(theta - k * self.period, self.theta, self.table) + k * self.winding
        p = sl2.polar_angle(self.map(theta))
        return p + 2 * np.pi * np.round((approx - p) / (2 * np.pi))

    def displacement(self, theta, x):
        """Lifted angle increment of the unit vector at angle x under A(theta)."""
        theta = np.asarray(theta, dtype=float)
        phi = self.base_angle(theta)
        _, s = sl2.polar(self.map(theta))
        v = np.stack([np.cos(x), np.sin(x)], axis=-1)
        w = np.einsum("...ij,...j->...i", s, v)
        d = np.arctan2(v[..., 0] * w[..., 1] - v[..., 1] * w[..., 0], np.sum(v * w, axis=-1))
        return phi + d


@dataclass
class RotationNumberResult:
    value: float
    iterations: int
    residual: float
    raw: float = 0.0


@dataclass
class LyapunovResult:
    value: float
    samples: np.ndarray = field(repr=False)
    n: int
    median: float = 0.0
    backward: float = 0.0
    residual: float = 0.0


def fibered_rotation_number(c, n=100_000, theta0=0.0, x0=0.0, grid=DEFAULTS.grid, check_degree=True):
    """Average lifted angular displacement along one orbit, in turns mod 1."""
    if check_degree:
        r = degree(c.map, grid)
        if r != 0:
            raise NonzeroDegree(f"map has degree {r}", degree=r)
    lift = Lift(c.map, grid)
    theta = theta0 + c.alpha * np.arange(n)
    phi = lift.base_angle(theta)
    _, s = sl2.polar(c.map(theta))
    s = s.reshape(n, 4).tolist()
    cos_phi, sin_phi = np.cos(phi).tolist(), np.sin(phi).tolist()
    cum_phi = np.concatenate([[0.0], np.cumsum(phi)])
    vx, vy = math.cos(x0), math.sin(x0)
    total = 0.0
    cum_d = [0.0] * (n + 1)
    atan2, hypot = math.atan2, math.hypot
    for k in range(n):
        a, b, cc, d = s[k]
        wx = a * vx + b * vy
        wy = cc * vx + d * vy
        total += atan2(vx * wy - vy * wx, vx * wx + vy * wy)
        h = hypot(wx, wy)
        wx, wy = wx / h, wy / h
        co, si = cos_phi[k], sin_phi[k]
        vx, vy = co * wx - si * wy, si * wx + co * wy
        cum_d[k + 1] = total
    cum = cum_phi + np.asarray(cum_d)
    raw = cum[n] / (2 * np.pi * n)
    late = (cum[n] - cum[n // 2]) / (n - n // 2)
    early = (cum[n // 2] - cum[n // 4]) / max(n // 2 - n // 4, 1)
    residual = abs(late - early) / (2 * np.pi)
    return RotationNumberResult(raw % 1.0, n, float(residual), float(raw))


def _log_norm_growth(c, n, theta, forward=True):
    m = np.broadcast_to(np.eye(2, dtype=c.map(theta[:1]).dtype), theta.shape + (2, 2)).copy()
    logs = np.zeros(theta.shape)
    for j in range(n):
        if forward:
            m = c.map(theta + j * c.alpha) @ m
        else:
            m = sl2.inv(c.map(theta - (j + 1) * c.alpha)) @ m
        nm = sl2.opnorm(m)
        logs += np.log(nm)
        m = m / nm[..., None, None]
    return (logs + np.log(sl2.opnorm(m))) / n


def lyapunov_exponent(c, n=10_000, samples=DEFAULTS.lyapunov_samples, offset=0.0):
    """theta-average of (1/n) log |A_n(theta)| with per-step renormalization."""
    theta = offset + fourier.grid(samples)
    fwd = _log_norm_growth(c, n, theta, True)
    bwd = _log_norm_growth(c, n, theta, False)
    value = float(np.mean(fwd))
    back = float(np.mean(bwd))
    return LyapunovResult(
        value=max(value, 0.0) if value > -1e-9 else value,
        samples=fwd,
        n=n,
        median=float(np.median(fwd)),
        backward=back,
        residual=abs(value - back),
    )


def _direction(v):
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    return v if (v[0] > 0 or (v[0] == 0 and v[1] > 0)) else -v


def projective_distance(u, v):
    u, v = _direction(u), _direction(v)
    return float(abs(u[0] * v[1] - u[1] * v[0]))


def _stable(c, theta, n):
    m = fibered_product(c, n, np.array([theta]))[0]
    _, sv, vt = np.linalg.svd(m)
    return _direction(vt[1]), sv[0] / sv[1]


def _unstable(c, theta, n):
    m = fibered_product(c, n, np.array([theta - n * c.alpha]))[0]
    u, sv, _ = np.linalg.svd(m)
    return _direction(u[:, 0]), sv[0] / sv[1]


def oseledec_directions(c, theta, n=1000):
    """Stable and unstable directions at theta and the stable equivariance defect."""
    es, ratio_s = _stable(c, theta, n)
    eu, ratio_u = _unstable(c, theta, n)
    if min(ratio_s, ratio_u) < 10:
        raise NoHyperbolicity("singular value ratio below 10", ratio=min(ratio_s, ratio_u))
    es_next, _ = _stable(c, theta + c.alpha, n)
    image = c.map(np.array([theta]))[0] @ es
    return es, eu, projective_distance(image, es_next)
