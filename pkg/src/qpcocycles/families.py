"""Reference cocycles used by the checks and the command line."""

import numpy as np

from .cocycle import Conj, Const, ExpTrig, Product, QpCocycle, RotPath, Sl2Map

GOLDEN = (np.sqrt(5.0) - 1) / 2
SILVER = np.sqrt(2.0) - 1
FOURS = np.sqrt(5.0) - 2  # continued fraction [0; 4, 4, 4, ...]

NAMED_ALPHAS = {"golden": GOLDEN, "silver": SILVER, "fours": FOURS}


def parse_alpha(text):
    if isinstance(text, (int, float)):
        return float(text)
    key = str(text).strip().lower()
    if key in NAMED_ALPHAS:
        return float(NAMED_ALPHAS[key])
    return float(key)


def trig_conjugator(amplitude=0.1, modes=(1, 2, 3), seed=0):
    """exp of a real sl(2,R) trigonometric polynomial with the given modes."""
    rng = np.random.default_rng(seed)
    terms = []
    for k in modes:
        vec = rng.normal(size=3)
        vec *= amplitude / np.linalg.norm(vec)
        terms.append((k, list(vec) + [float(rng.uniform())]))
    return Sl2Map(ExpTrig(terms))


def rotation_cocycle(alpha, psi):
    return QpCocycle(alpha, Sl2Map.rotation(psi))


def bounded_family(alpha=GOLDEN, psi=0.25, amplitude=0.1, modes=(1, 2, 3), seed=0):
    """B(. + alpha) R_psi B(.)^{-1} with B the exponential of a 3-mode trig poly."""
    b = trig_conjugator(amplitude, modes, seed)
    a = Sl2Map.rotation(psi)
    return QpCocycle(alpha, Sl2Map(Conj(b.node, a.node, alpha))), b


def rot_path_cocycle(alpha, r, perturbation=None):
    node = RotPath(r)
    if perturbation is not None:
        node = Product([node, perturbation.node])
    return QpCocycle(alpha, Sl2Map(node))


def hyperbolic_constant(alpha, t=1.0):
    return QpCocycle(alpha, Sl2Map(Const(np.diag([np.exp(t), np.exp(-t)]))))
