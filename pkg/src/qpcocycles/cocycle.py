"""Quasi-periodic cocycles over circle rotations.

An :class:`Sl2Map` is a closed-form expression tree evaluated on demand; a
:class:`QpCocycle` pairs it with a frequency.  The tree serializes to JSON
with node kinds ``const, rot_path, exp_trig, schrodinger, product, inverse,
shift, conj``.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import fourier, sl2
from .config import DEFAULTS, TOL
from .errors import ConfigInvalid, GridTooCoarse, UnboundedOverflow


# ---------------------------------------------------------------- nodes


def _encode_matrix(m):
    m = np.asarray(m)
    if np.iscomplexobj(m) and np.any(m.imag != 0):
        return {"re": m.real.tolist(), "im": m.imag.tolist()}
    return np.real(m).tolist()


def _decode_matrix(obj):
    if isinstance(obj, dict):
        return np.asarray(obj["re"], float) + 1j * np.asarray(obj["im"], float)
    return np.asarray(obj, dtype=float)


class Node:
    kind = "node"

    def __call__(self, theta):
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError


class Const(Node):
    kind = "const"

    def __init__(self, matrix):
        self.matrix = np.asarray(matrix)

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        return np.broadcast_to(self.matrix, theta.shape + (2, 2)).copy()

    def to_dict(self):
        return {"kind": self.kind, "matrix": _encode_matrix(self.matrix)}


class RotPath(Node):
    """E_r: theta -> rotation by 2 pi r theta."""

    kind = "rot_path"

    def __init__(self, r):
        self.r = r

    def __call__(self, theta):
        return sl2.rotation_turns(self.r * np.asarray(theta, dtype=float))

    def to_dict(self):
        return {"kind": self.kind, "r": self.r}


class ExpTrig(Node):
    """exp of sum_j {x_j, y_j, z_j} cos(2 pi (k_j theta + phase_j))."""

    kind = "exp_trig"

    def __init__(self, terms):
        self.terms = [(int(k), [float(v) for v in c]) for k, c in terms]

    def generator(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape + (3,))
        for k, (x, y, z, ph) in self.terms:
            out += np.cos(2 * np.pi * (k * theta + ph))[..., None] * np.array([x, y, z])
        return out

    def __call__(self, theta):
        return sl2.expm(sl2.matrix(self.generator(theta)))

    @classmethod
    def from_samples(cls, vectors, cutoff=None, tol=0.0):
        """Real trigonometric interpolant of sl(2,R) samples on a uniform grid."""
        vectors = np.asarray(vectors, dtype=float)
        n = vectors.shape[0]
        c = fourier.coefficients(vectors)
        kmax = n // 2 - 1 if cutoff is None else min(cutoff, n // 2 - 1)
        terms = []
        if np.max(np.abs(c[0])) > tol:
            terms.append((0, list(c[0].real) + [0.0]))
        for k in range(1, kmax + 1):
            a = 2 * c[k].real
            b = -2 * c[k].imag
            if np.max(np.abs(a)) > tol:
                terms.append((k, list(a) + [0.0]))
            if np.max(np.abs(b)) > tol:
                terms.append((k, list(b) + [-0.25]))
        return cls(terms)

    def negated(self):
        return ExpTrig([(k, [-c[0], -c[1], -c[2], c[3]]) for k, c in self.terms])

    def to_dict(self):
        return {"kind": self.kind, "terms": [[k, c] for k, c in self.terms]}


class Schrodinger(Node):
    """[[V(theta) - E, 1], [-1, 0]] with V = sum a_k cos 2 pi k theta + b_k sin 2 pi k theta."""

    kind = "schrodinger"

    def __init__(self, terms, energy_shift=0.0):
        self.terms = [(int(k), [float(v) for v in c]) for k, c in terms]
        self.energy_shift = energy_shift

    def potential(self, theta):
        theta = np.asarray(theta, dtype=float)
        v = np.zeros(theta.shape)
        for k, c in self.terms:
            a, b = (list(c) + [0.0, 0.0])[:2]
            v = v + a * np.cos(2 * np.pi * k * theta) + b * np.sin(2 * np.pi * k * theta)
        return v

    def __call__(self, theta):
        v = self.potential(theta) - self.energy_shift
        out = np.zeros(np.shape(v) + (2, 2), dtype=np.result_type(v, float))
        out[..., 0, 0] = v
        out[..., 0, 1] = 1
        out[..., 1, 0] = -1
        return out

    def to_dict(self):
        e = self.energy_shift
        enc = {"re": e.real, "im": e.imag} if isinstance(e, complex) else e
        return {"kind": self.kind, "terms": [[k, c] for k, c in self.terms], "energy_shift": enc}


class Product(Node):
    kind = "product"

    def __init__(self, factors):
        self.factors = list(factors)

    def __call__(self, theta):
        out = self.factors[0](theta)
        for f in self.factors[1:]:
            out = out @ f(theta)
        return out

    def to_dict(self):
        return {"kind": self.kind, "factors": [f.to_dict() for f in self.factors]}


class Inverse(Node):
    kind = "inverse"

    def __init__(self, inner):
        self.inner = inner

    def __call__(self, theta):
        return sl2.inv(self.inner(theta))

    def to_dict(self):
        return {"kind": self.kind, "inner": self.inner.to_dict()}


class Shift(Node):
    kind = "shift"

    def __init__(self, inner, c):
        self.inner = inner
        self.c = float(c)

    def __call__(self, theta):
        return self.inner(np.asarray(theta, dtype=float) + self.c)

    def to_dict(self):
        return {"kind": self.kind, "inner": self.inner.to_dict(), "c": self.c}


class Conj(Node):
    """theta -> B(theta + alpha) A(theta) B(theta)^{-1}."""

    kind = "conj"

    def __init__(self, b, a, alpha):
        self.b, self.a, self.alpha = b, a, float(alpha)

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        return self.b(theta + self.alpha) @ self.a(theta) @ sl2.inv(self.b(theta))

    def to_dict(self):
        return {"kind": self.kind, "b": self.b.to_dict(), "a": self.a.to_dict(), "alpha": self.alpha}


class Func(Node):
    """Wraps a vectorized callable; not serializable."""

    kind = "func"

    def __init__(self, f):
        self.f = f

    def __call__(self, theta):
        return self.f(np.asarray(theta, dtype=float))

    def to_dict(self):
        raise ConfigInvalid("callable-backed maps cannot be serialized")


def node_from_dict(d):
    try:
        kind = d["kind"]
        if kind == "const":
            return Const(_decode_matrix(d["matrix"]))
        if kind == "rot_path":
            return RotPath(d["r"])
        if kind == "exp_trig":
            return ExpTrig(d["terms"])
        if kind == "schrodinger":
            e = d.get("energy_shift", 0.0)
            if isinstance(e, dict):
                e = complex(e["re"], e["im"])
            return Schrodinger(d["terms"], e)
        if kind == "product":
            return Product([node_from_dict(f) for f in d["factors"]])
        if kind == "inverse":
            return Inverse(node_from_dict(d["inner"]))
        if kind == "shift":
            return Shift(node_from_dict(d["inner"]), d["c"])
        if kind == "conj":
            return Conj(node_from_dict(d["b"]), node_from_dict(d["a"]), d["alpha"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigInvalid(f"malformed map node: {exc}") from exc
    raise ConfigInvalid(f"unknown node kind {kind!r}")


# ---------------------------------------------------------------- maps


class Sl2Map:
    """Map from R/(period Z) to SL(2,R) (or SL(2,C) after complexification)."""

    def __init__(self, node, period=1):
        self.node = node
        self.period = period
        self._grids = {}

    def __call__(self, theta):
        return self.node(theta)

    def grid(self, n=DEFAULTS.grid):
        """Samples at n equispaced points of one period (cached, read-only)."""
        if n not in self._grids:
            s = self.node(fourier.grid(n, self.period))
            s.setflags(write=False)
            self._grids[n] = s
        return self._grids[n]

    def __matmul__(self, other):
        return Sl2Map(Product([self.node, other.node]), max(self.period, other.period))

    def inverse(self):
        return Sl2Map(Inverse(self.node), self.period)

    def shifted(self, c):
        return Sl2Map(Shift(self.node, c), self.period)

    # constructors
    @classmethod
    def const(cls, m):
        return cls(Const(m))

    @classmethod
    def identity(cls):
        return cls(Const(np.eye(2)))

    @classmethod
    def rot_path(cls, r):
        return cls(RotPath(r))

    @classmethod
    def rotation(cls, psi):
        """Constant rotation by 2 pi psi."""
        return cls(Const(sl2.rotation_turns(psi)))

    @classmethod
    def exp_trig(cls, terms):
        return cls(ExpTrig(terms))

    @classmethod
    def from_callable(cls, f, period=1):
        return cls(Func(f), period)

    # serialization
    def to_dict(self):
        return {"period": self.period, "expression": self.node.to_dict()}

    @classmethod
    def from_dict(cls, d):
        if "expression" not in d:
            return cls(node_from_dict(d))
        return cls(node_from_dict(d["expression"]), d.get("period", 1))

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def check_unimodular(self, n=DEFAULTS.grid):
        sl2.check_unimodular(self.grid(n), TOL.sample_unimodular)


@dataclass
class QpCocycle:
    alpha: float
    map: Sl2Map = field(repr=False)

    def __call__(self, theta):
        return self.map(theta)

    def to_dict(self):
        return {"alpha": self.alpha, "map": self.map.to_dict()}

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(float(d["alpha"]), Sl2Map.from_dict(d["map"]))
        except KeyError as exc:
            raise ConfigInvalid(f"cocycle document lacks {exc}") from exc

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------- operations


def fibered_product(c, n, theta):
    """A_n(theta) = A(theta + (n-1) alpha) ... A(theta); negative n uses inverses."""
    theta = np.asarray(theta, dtype=float)
    sample = c.map(theta)
    out = np.broadcast_to(np.eye(2, dtype=sample.dtype), theta.shape + (2, 2)).copy()
    if n > 0:
        out = sample
        for j in range(1, n):
            out = c.map(theta + j * c.alpha) @ out
    elif n < 0:
        for j in range(1, -n + 1):
            out = sl2.inv(c.map(theta - j * c.alpha)) @ out
    return out


def degree(m, n=DEFAULTS.grid):
    """Winding number of the polar rotation factor along one period."""
    theta = np.linspace(0.0, m.period, n + 1)
    phi = sl2.polar_angle(m(theta))
    steps = np.diff(phi)
    steps = (steps + np.pi) % (2 * np.pi) - np.pi
    if np.max(np.abs(steps)) > np.pi / 2:
        raise GridTooCoarse("polar angle turns more than 1/4 between nodes", n=n)
    return int(round(np.sum(steps) / (2 * np.pi)))


def conjugate(b, c):
    """(alpha, B(. + alpha) A(.) B(.)^{-1})."""
    node = Conj(b.node, c.map.node, c.alpha)
    period = c.map.period
    if b.period != 1:
        t = np.linspace(0, 1, 17)
        one_periodic = np.allclose(node(t), node(t + 1), atol=1e-10)
        period = 1 if one_periodic and c.map.period == 1 else 2
    return QpCocycle(c.alpha, Sl2Map(node, period))


def schrodinger(potential, energy_shift=0.0):
    """Schroedinger block from potential terms [(k, [cos_amp, sin_amp]), ...]."""
    return Sl2Map(Schrodinger(potential, energy_shift))


def l_operator(m, n=1024):
    """(d m) m^{-1} by spectral differentiation; returns (n, 3) coordinates."""
    if n < 256:
        raise ValueError("l_operator needs at least 256 nodes")
    s = m.grid(n)
    ds = fourier.derivative(s, m.period)
    return sl2.coords(ds @ sl2.inv(s))


def c_s_norm(samples, period=1.0, s=0):
    """max_{j<=s} sup |d^j f| on the grid (entrywise operator norm for matrices)."""
    best = 0.0
    for j in range(s + 1):
        d = samples if j == 0 else fourier.derivative(samples, period, order=j)
        if d.ndim >= 3:
            val = np.max(sl2.opnorm(d))
        else:
            val = np.max(np.abs(d))
        best = max(best, float(val))
    return best


def boundedness_probe(c, K, n=64):
    """max over |k| <= K and grid theta of |A_k(theta)|, with the maximizing k."""
    if K < 1:
        raise ValueError("K >= 1 required")
    theta = fourier.grid(n)
    best, arg = 1.0, 0
    for sign in (1, -1):
        m = np.broadcast_to(np.eye(2), (n, 2, 2)).copy()
        for j in range(1, K + 1):
            if sign > 0:
                m = c.map(theta + (j - 1) * c.alpha) @ m
            else:
                m = sl2.inv(c.map(theta - j * c.alpha)) @ m
            val = float(np.max(sl2.opnorm(m)))
            if not np.isfinite(val) or val > TOL.overflow:
                raise UnboundedOverflow("fibered products overflow", k=sign * j)
            if val > best:
                best, arg = val, sign * j
    return best, arg
