"""Acceptance suite: twelve end-to-end checks at fixed tolerances.

Each check returns a :class:`CheckResult`; ``run_all`` runs them in order.
Both the test suite and ``qpcocycles selftest`` drive this module.
"""

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import complex_rotation as zr
from . import cones, contfrac, reducibility, renorm, sl2
from .cocycle import Conj, ExpTrig, Product, QpCocycle, RotPath, Sl2Map, conjugate, degree
from .families import FOURS, GOLDEN, SILVER, bounded_family, hyperbolic_constant, rotation_cocycle
from .invariants import fibered_rotation_number, lyapunov_exponent


def _wrap(x):
    return (x + 0.5) % 1.0 - 0.5


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        detail = " ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        return f"[{status}] {self.number:2d} {self.name} ({self.seconds:.1f}s) {detail}"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.3e}"
    return str(v)


def rotation_law(seed=0):
    base = rotation_cocycle(GOLDEN, 0.25)
    rho0 = fibered_rotation_number(base, 100_000).value
    worst = 0.0
    for r in range(-2, 3):
        c = conjugate(Sl2Map.rot_path(r), base) if r else base
        rho = fibered_rotation_number(c, 100_000).value
        worst = max(worst, abs(_wrap(rho - rho0 - r * GOLDEN)))
    return worst <= 3e-4, {"max_shift_error": worst}


def constant_invariants(seed=0):
    lyap = lyapunov_exponent(hyperbolic_constant(GOLDEN, 1.0), 2000).value
    rot_err = max(
        abs(_wrap(fibered_rotation_number(rotation_cocycle(GOLDEN, psi), 100_000).value - psi))
        for psi in (0.1, 0.25, 0.4)
    )
    ok = abs(lyap - 1.0) <= 1e-6 and rot_err <= 1e-4
    return ok, {"lyapunov_error": abs(lyap - 1.0), "rotation_error": rot_err}


def cf_identities(seed=0):
    rng = random.Random(seed)
    det_ok = bounds_ok = True
    for _ in range(20):
        alpha = Fraction(rng.getrandbits(256) | 1, 2**256)
        cf = contfrac.expand(alpha, 30)
        for k in range(1, 31):
            det_ok &= cf.q[k] * cf.p[k - 1] - cf.q[k - 1] * cf.p[k] == (-1) ** k
        for k in range(30):
            b = cf.exact_beta[k]
            bounds_ok &= Fraction(1, cf.q[k + 1] + cf.q[k]) < b < Fraction(1, cf.q[k + 1])
    eig = 0.0
    for alpha in (GOLDEN, SILVER):
        cf = contfrac.expand(alpha, 12)
        for k, l in ((2, 0), (4, 2), (6, 2)):
            eig = max(eig, contfrac.eigen_relation_residual(cf, k, l))
    ok = det_ok and bounds_ok and eig <= 1e-9
    return ok, {"determinant": det_ok, "beta_bounds": bounds_ok, "eigen_residual": eig}


def _cone_samples(rng, n):
    xy = rng.normal(size=(n, 2))
    z = np.hypot(xy[:, 0], xy[:, 1]) * (1 + rng.uniform(0.01, 2.0, n))
    return np.column_stack([xy, z])


def sl2_geometry(seed=0):
    rng = np.random.default_rng(seed)
    n = 10**6
    v, w = _cone_samples(rng, n), _cone_samples(rng, n)
    d = sl2.commutator_defect(v, w)
    acs = float(np.max(np.abs(d.acs_residual)))
    anti = float(np.min(d.anti_cs_defect))
    excess = float(np.max(d.bracket_norm - d.bound))
    g = sl2.expm(sl2.matrix(rng.normal(size=(n // 10, 3))))
    u = rng.normal(size=(n // 10, 3))
    q0 = sl2.quad_form(u)
    q1 = sl2.quad_form(sl2.ad_action(g, u))
    scale = np.sum(u * u, axis=-1) * sl2.opnorm(g) ** 4
    ad = float(np.max(np.abs(q1 - q0) / scale))
    ok = acs <= 1e-10 and anti >= -1e-12 and ad <= 1e-10 and excess <= 1e-10
    return ok, {"acs_residual": acs, "anti_cs_min": anti, "bound_excess": excess, "ad_invariance": ad}


def renorm_bookkeeping(seed=0):
    c, _ = bounded_family(SILVER, 0.25, 0.1)
    freq = 0.0
    comm = 0.0
    for k in range(9):
        st = renorm.renormalize_to(c, k)
        f1, f2 = st.frequencies
        freq = max(freq, abs(f1 - st.cf.beta_at(k - 1)), abs(f2 - st.cf.beta_at(k)))
        comm = max(comm, renorm.rescaled_pair(st).commutation_defect(nodes=512))
    ok = freq <= 1e-12 and comm <= 1e-7
    return ok, {"frequency_error": freq, "commutation_defect": comm}


def monotone_functionals(seed=0):
    c, _ = bounded_family(FOURS, 0.25, 0.1)
    hist = cones.cone_recursion(cones.decompose_eta0(c, 0.5), c, 6)
    qs = [cones.integrated_quantities(lvl, hist.cf) for lvl in hist.levels]
    worst = min(cones.monotonicity_defects(qs))
    cap = max(max(q.ubar_plus, q.ubar_minus) for q in qs)
    floor = min(min(q.ubar_plus, q.ubar_minus) for q in qs)
    ok = worst >= -1e-8 and cap <= 2 * hist.M and floor >= 0
    return ok, {"min_increment": worst, "max_ubar": cap, "two_M": 2 * hist.M}


def degree_bound(seed=0):
    eq = 0.0
    for r in (1, 2, 3):
        lhs, rhs, _ = cones.degree_bound_check(QpCocycle(GOLDEN, Sl2Map.rot_path(r)), r)
        eq = max(eq, abs(lhs - rhs))
    b = Sl2Map(ExpTrig([(1, [0.02, 0.0, 0.01, 0.0]), (2, [0.0, 0.01, 0.0, 0.3])]))
    c = QpCocycle(GOLDEN, Sl2Map(Conj(b.node, RotPath(1), GOLDEN)))
    lhs, rhs, _ = cones.degree_bound_check(c, degree(c.map))
    gap = lhs - rhs
    ok = eq <= 1e-8 and gap > 1e-6
    return ok, {"equality_error": eq, "conjugated_gap": gap}


def complex_rotation_number(seed=0):
    c, _ = bounded_family(GOLDEN, 0.25, 0.1)
    re_err = 0.0
    for z in (0.9, 0.9 * np.exp(0.3j)):
        res = zr.zeta(c, z, zr.invariant_section(c, z), check=True)
        re_err = max(re_err, abs(res.zeta.real - res.re_check))
    im_err = 0.0
    for beta in np.linspace(0.2, 6.0, 8):
        lim, _ = zr.boundary_value(c, beta)
        rho = fibered_rotation_number(zr.rotated(c, beta), 100_000).value
        im_err = max(im_err, abs(_wrap(zr.rotation_from_zeta(lim) - rho)))
    ij = zr.ij_defect(c, 0.5 - 0.05j).defect
    ok = re_err <= 1e-3 and im_err <= 1e-3 and ij >= -1e-6
    return ok, {"re_error": re_err, "im_error": im_err, "ij_defect": ij}


def _single_mode(size, n=256):
    """su(1,1) picture of the real generator size cos(2 pi th) {1, 0, 0}."""
    th = np.arange(n) / n
    v = np.zeros((n, 3))
    v[:, 0] = size * np.cos(2 * np.pi * th)
    return sl2.to_su11(sl2.matrix(v).astype(complex))


def normal_form_quadratic(seed=0):
    outs = [reducibility.normal_form_step(_single_mode(s), GOLDEN, 1, 32, enforce=False) for s in (1e-2, 1e-3)]
    ratio = outs[0].norms["F_0"] / outs[1].norms["F_0"]
    ident = max(o.identity_residual for o in outs)
    lin = max(abs(o.linear_residual / o.norms["F_0"] - 1) for o in outs)
    ok = 50 <= ratio <= 200 and ident <= 1e-12 and lin <= 0.05
    return ok, {"F_ratio": ratio, "identity_residual": ident, "linear_vs_F": lin}


def kam_loop(seed=0):
    c, _ = bounded_family(GOLDEN, 0.3, 1e-4)
    res = reducibility.kam_reduce_local(c, dioph=(10.0, 2.0, 1000))
    rho = fibered_rotation_number(c, 100_000).value
    err = abs(_wrap(res.psi - rho))
    ok = res.final_defect <= 1e-10 and res.steps <= 6 and err <= 3e-4
    return ok, {"steps": res.steps, "final_defect": res.final_defect, "angle_error": err}


def hyperbolic_neighbor(seed=0):
    nb = reducibility.hyperbolic_neighbor(sl2.rotation(0.3), GOLDEN, 0.1, s=2)
    lyap = lyapunov_exponent(QpCocycle(GOLDEN, nb.map), 4000).value
    err = abs(lyap - nb.expected_lyapunov)
    ok = nb.distance <= 0.1 and err <= 1e-6 and lyap > 0
    return ok, {"c2_distance": nb.distance, "lyapunov": lyap, "lyapunov_error": err}


def destabilizer(seed=0):
    b = Sl2Map(Product([RotPath(1), ExpTrig([(1, [0.05, 0.02, 0.0, 0.1])])]))
    coarse = reducibility.schrodinger_destabilizer(b, 0.05)
    fine = reducibility.schrodinger_destabilizer(b, 0.005)
    lim_mu, lim_nu = fine.limits
    rel = max(abs(fine.mu / lim_mu - 1), abs(fine.nu / lim_nu - 1))
    ok = coarse.margin > 0 and fine.margin > 0 and rel <= 0.05
    return ok, {"margin": coarse.margin, "limit_error": rel}


CHECKS = [
    (1, "rotation-number conjugation law", rotation_law),
    (2, "constant-cocycle invariants", constant_invariants),
    (3, "continued-fraction identities", cf_identities),
    (4, "sl(2,R) cone geometry", sl2_geometry),
    (5, "renormalization bookkeeping", renorm_bookkeeping),
    (6, "monotone integrated functionals", monotone_functionals),
    (7, "degree lower bound", degree_bound),
    (8, "complex rotation number", complex_rotation_number),
    (9, "normal-form step quadraticity", normal_form_quadratic),
    (10, "local KAM reduction", kam_loop),
    (11, "hyperbolic neighbor", hyperbolic_neighbor),
    (12, "Schrodinger destabilizer", destabilizer),
]


def run_check(number, seed=0):
    num, name, fn = CHECKS[number - 1]
    t = time.perf_counter()
    try:
        ok, measured = fn(seed)
    except Exception as exc:  # a raised module error is a failed check, not a crash
        ok, measured = False, {"error": f"{type(exc).__name__}: {exc}"}
    measured = {k: (float(v) if isinstance(v, (np.floating, float)) else v) for k, v in measured.items()}
    return CheckResult(num, name, bool(ok), measured, time.perf_counter() - t)


def run_all(seed=0, numbers=None, emit=None):
    out = []
    for num, _, _ in CHECKS:
        if numbers and num not in numbers:
            continue
        res = run_check(num, seed)
        if emit:
            emit(res.line())
        out.append(res)
    return out


__all__ = ["CHECKS", "CheckResult", "run_all", "run_check"]
