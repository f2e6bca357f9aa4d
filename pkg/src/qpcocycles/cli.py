"""Command line front end.

Every command produces a list of flat rows written as CSV plus a JSON
envelope ``{command, config_digest, rows, diagnostics}``.  With ``--out``
both files go to ``<out>/<command>.csv`` and ``<out>/<command>.json``;
otherwise the CSV goes to stdout.

Exit status: 0 on success, 1 when ``selftest`` has a failing check,
2 for an invalid configuration, 3 when a command raised a module error.
"""

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import complex_rotation as zr
from . import cones, contfrac, reducibility, renorm, selftest, sl2
from .cocycle import QpCocycle, Sl2Map, degree
from .errors import CocycleError, CommandFailed, ConfigInvalid
from .families import bounded_family, parse_alpha
from .invariants import fibered_rotation_number, lyapunov_exponent

log = logging.getLogger("qpcocycles")

COMMANDS = ("invariants", "cf", "renorm", "monitors", "zeta-scan", "reduce", "perturb", "destabilize", "selftest")

# Column order per command; rows carry exactly these keys.
SCHEMAS = {
    "invariants": ["alpha", "degree", "rotation", "rotation_residual", "lyapunov", "lyapunov_residual"],
    "cf": ["k", "a_k", "p_k", "q_k", "beta_k", "alpha_k"],
    "renorm": ["k", "U_n", "U_m", "V_n", "V_m", "freq_U", "freq_V", "beta_prev", "beta_k", "commutation_defect"],
    "monitors": ["k", "word_n", "word_m", "delta", "e_plus", "e_minus", "f_plus", "f_minus",
                 "ubar_plus", "ubar_minus", "ubar", "epsilon", "in_window"],
    "zeta-scan": ["beta", "r", "re", "im", "rotation", "lyap_direct", "rot_direct"],
    "reduce": ["step", "defect"],
    "perturb": ["k", "eta", "distance", "expected_lyapunov", "lyapunov", "cone_certificate"],
    "destabilize": ["x", "y", "lam", "mu", "nu", "margin", "limit_mu", "limit_nu"],
    "selftest": ["number", "name", "passed", "measured"],
}


@dataclass
class RunConfig:
    command: str
    cocycle: dict = field(default_factory=dict)
    alpha: object = "golden"
    grid: int = 256
    depth: int = 6
    tol: float = 1e-10
    seed: int = 0
    out: str = ""
    jobs: int = 1
    params: dict = field(default_factory=dict)

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigInvalid(f"unknown command {self.command!r}")
        if not (isinstance(self.grid, int) and self.grid >= 2 and self.grid & (self.grid - 1) == 0):
            raise ConfigInvalid(f"grid must be a power of two, got {self.grid}")
        if not self.tol > 0:
            raise ConfigInvalid("tolerances must be positive")
        for k, v in self.params.items():
            if k.endswith("tol") and not float(v) > 0:
                raise ConfigInvalid(f"{k} must be positive")
        if self.depth < 0 or self.jobs < 1:
            raise ConfigInvalid("depth must be >= 0 and jobs >= 1")
        try:
            parse_alpha(self.alpha)
        except ValueError as exc:
            raise ConfigInvalid(f"bad alpha {self.alpha!r}") from exc
        return self

    def digest(self):
        doc = asdict(self)
        doc.pop("out")
        doc.pop("jobs")
        text = json.dumps(doc, sort_keys=True, default=str)
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def build_cocycle(self):
        """The cocycle document if given, else the bounded test family at ``alpha``."""
        alpha = parse_alpha(self.alpha)
        if not self.cocycle:
            return bounded_family(alpha, 0.25, 0.1)[0]
        doc = dict(self.cocycle)
        if "map" not in doc:
            doc = {"alpha": alpha, "map": doc}
        doc.setdefault("alpha", alpha)
        doc["alpha"] = parse_alpha(doc["alpha"])
        return QpCocycle.from_dict(doc)

    def param(self, name, default):
        return type(default)(self.params.get(name, default))


# ---------------------------------------------------------------- commands


def cmd_invariants(cfg):
    c = cfg.build_cocycle()
    deg = degree(c.map, max(cfg.grid, 1024))
    n = cfg.param("n", 100_000)
    rot = fibered_rotation_number(c, n) if deg == 0 else None
    ly = lyapunov_exponent(c, cfg.param("lyap_n", 5000))
    row = {"alpha": c.alpha, "degree": deg,
           "rotation": rot.value if rot else math.nan, "rotation_residual": rot.residual if rot else math.nan,
           "lyapunov": ly.value, "lyapunov_residual": ly.residual}
    return [row], {"iterations": n}


def cmd_cf(cfg):
    cf = contfrac.expand(parse_alpha(cfg.alpha), cfg.depth, partial_ok=True)
    return cf.rows(), {"stop_reason": cf.stop_reason, "depth": cf.depth}


def cmd_renorm(cfg):
    c = cfg.build_cocycle()
    diag = {}
    nu = 0.0
    if cfg.params.get("select_shift"):
        choice = renorm.select_shift(c, cfg.depth)
        nu = choice.nu
        diag = {"nu": nu, "nu_score": choice.score, "nu_heuristic": choice.heuristic}
    state = renorm.renorm_start(c, cfg.depth + 2, nu)
    rows = []
    for k in range(cfg.depth + 1):
        if k:
            state = renorm.renorm_step(state)
        fu, fv = state.frequencies
        comm = renorm.rescaled_pair(state).commutation_defect(nodes=cfg.grid)
        rows.append({"k": k, "U_n": state.U[0], "U_m": state.U[1], "V_n": state.V[0], "V_m": state.V[1],
                     "freq_U": fu, "freq_V": fv, "beta_prev": state.cf.beta_at(k - 1),
                     "beta_k": state.cf.beta_at(k), "commutation_defect": comm})
    return rows, diag


def cmd_monitors(cfg):
    c = cfg.build_cocycle()
    dec = cones.decompose_eta0(c, cfg.param("margin", 0.5), n=cfg.grid)
    hist = cones.cone_recursion(dec, c, cfg.depth)
    decay = {d.k: d for d in cones.decay_monitor(hist)}
    rows = []
    qs = []
    for lvl in hist.levels:
        q = cones.integrated_quantities(lvl, hist.cf)
        qs.append(q)
        rows.append({"k": lvl.k, "word_n": lvl.word[0], "word_m": lvl.word[1], "delta": lvl.delta,
                     "e_plus": q.e_plus, "e_minus": q.e_minus, "f_plus": q.f_plus, "f_minus": q.f_minus,
                     "ubar_plus": q.ubar_plus, "ubar_minus": q.ubar_minus, "ubar": q.ubar,
                     "epsilon": decay[lvl.k].epsilon, "in_window": decay[lvl.k].in_window})
    diag = {"M": hist.M, "sup_bound": hist.sup_bound, "monotonicity_defects": cones.monotonicity_defects(qs)}
    return rows, diag


def _scan_one(doc, beta, radii, grid):
    c = QpCocycle.from_dict(doc)
    return zr.boundary_scan(c, [beta], radii, grid)


def cmd_zeta_scan(cfg):
    c = cfg.build_cocycle()
    count = cfg.param("betas", 8)
    betas = [float(b) for b in np.linspace(0.0, 2 * math.pi, count, endpoint=False)]
    radii = tuple(cfg.params.get("radii", (0.9, 0.99, 0.999)))
    doc = c.to_dict()
    args = ([doc] * count, betas, [radii] * count, [cfg.grid] * count)
    if cfg.jobs > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            parts = list(pool.map(_scan_one, *args))
    else:
        parts = list(map(_scan_one, *args))
    rows = [row for part in parts for row in part]
    return rows, zr.scan_summary(rows)


def cmd_reduce(cfg):
    # the default family sits far from constant rotations; use a small one instead
    c = cfg.build_cocycle() if cfg.cocycle else bounded_family(parse_alpha(cfg.alpha), 0.3, 1e-4)[0]
    res = reducibility.kam_reduce_local(c, max_steps=cfg.param("max_steps", 6), n=cfg.grid, tol=cfg.tol)
    rows = [{"step": i, "defect": d} for i, d in enumerate(res.defects)]
    diag = {"rotation_angle": res.psi, "final_defect": res.final_defect, "steps": res.steps}
    return rows, diag


def cmd_perturb(cfg):
    alpha = parse_alpha(cfg.alpha)
    psi = cfg.param("psi", 0.3)
    eps = cfg.param("eps", 0.1)
    nb = reducibility.hyperbolic_neighbor(sl2.rotation(psi), alpha, eps, s=cfg.param("s", 2))
    ly = lyapunov_exponent(QpCocycle(alpha, nb.map), cfg.param("lyap_n", 4000)).value
    row = {"k": nb.k, "eta": nb.eta, "distance": nb.distance, "expected_lyapunov": nb.expected_lyapunov,
           "lyapunov": ly, "cone_certificate": reducibility.cone_field_certificate(nb, alpha)}
    return [row], {"psi": psi, "eps": eps}


def cmd_destabilize(cfg):
    if cfg.cocycle:
        b = Sl2Map.from_dict(cfg.cocycle.get("map", cfg.cocycle))
    else:
        b = Sl2Map.rot_path(1)
    res = reducibility.schrodinger_destabilizer(b, cfg.param("delta", 0.05))
    row = {"x": res.x, "y": res.y, "lam": res.lam, "mu": res.mu, "nu": res.nu, "margin": res.margin,
           "limit_mu": res.limits[0], "limit_nu": res.limits[1]}
    return [row], {"delta": res.delta}


def cmd_selftest(cfg):
    results = selftest.run_all(cfg.seed, emit=lambda line: print(line, file=sys.stderr))
    # timings go to stderr only so the CSV stays reproducible
    rows = [{"number": r.number, "name": r.name, "passed": r.passed,
             "measured": json.dumps(r.measured, sort_keys=True)} for r in results]
    return rows, {"failed": [r.number for r in results if not r.passed]}


HANDLERS = {
    "invariants": cmd_invariants, "cf": cmd_cf, "renorm": cmd_renorm, "monitors": cmd_monitors,
    "zeta-scan": cmd_zeta_scan, "reduce": cmd_reduce, "perturb": cmd_perturb,
    "destabilize": cmd_destabilize, "selftest": cmd_selftest,
}


# ---------------------------------------------------------------- emission


def _plain(v):
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return None if math.isnan(v) else v
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    return v


def to_csv(command, rows):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SCHEMAS[command], lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: ("nan" if v is None else repr(v) if isinstance(v, float) else v)
                    for k, v in _plain(row).items()})
    return buf.getvalue()


def envelope(command, cfg, rows, diagnostics):
    return {"command": command, "config_digest": cfg.digest(), "rows": _plain(rows),
            "diagnostics": _plain(diagnostics)}


def run(command, cfg):
    """Run one command; returns (exit status, csv text, envelope)."""
    cfg.validate()
    try:
        rows, diag = HANDLERS[command](cfg)
    except ConfigInvalid:
        raise
    except CocycleError as exc:
        raise CommandFailed(f"{command}: {exc.code}: {exc}", cause=exc.code) from exc
    status = 1 if command == "selftest" and diag["failed"] else 0
    text = to_csv(command, rows)
    env = envelope(command, cfg, rows, diag)
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{command}.csv").write_text(text)
        (out / f"{command}.json").write_text(json.dumps(env, indent=2, sort_keys=True) + "\n")
    return status, text, env


# ---------------------------------------------------------------- argument parsing


def _parser():
    p = argparse.ArgumentParser(prog="qpcocycles", description="Invariants and constructions for quasi-periodic SL(2,R) cocycles.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--alpha", help="frequency: golden, silver, fours or a number in (0, 1)")
    p.add_argument("--map", help="JSON cocycle document (or bare map expression)")
    p.add_argument("--config", help="JSON run configuration; flags override its fields")
    p.add_argument("--out", help="directory for <command>.csv and <command>.json")
    p.add_argument("--grid", type=int, help="grid size (power of two)")
    p.add_argument("--depth", type=int, help="continued fraction / renormalization depth")
    p.add_argument("--tol", type=float, help="tolerance")
    p.add_argument("--seed", type=int, help="seed for randomized checks")
    p.add_argument("--jobs", type=int, help="worker processes for sweeps")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE", help="command parameter")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read {path}: {exc}") from exc


def config_from_args(args):
    doc = _load_json(args.config) if args.config else {}
    doc["command"] = args.command
    if args.map:
        doc["cocycle"] = _load_json(args.map)
    for name in ("alpha", "grid", "depth", "tol", "seed", "out", "jobs"):
        val = getattr(args, name)
        if val is not None:
            doc[name] = val
    params = dict(doc.get("params", {}))
    for item in args.param:
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigInvalid(f"--param expects KEY=VALUE, got {item!r}")
        try:
            params[key] = json.loads(val)
        except json.JSONDecodeError:
            params[key] = val
    doc["params"] = params
    try:
        return RunConfig(**doc)
    except TypeError as exc:
        raise ConfigInvalid(str(exc)) from exc


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
        status, text, env = run(args.command, cfg)
    except ConfigInvalid as exc:
        print(f"CONFIG_INVALID: {exc}", file=sys.stderr)
        return 2
    except CommandFailed as exc:
        print(f"COMMAND_FAILED: {exc}", file=sys.stderr)
        return 3
    if cfg.out:
        log.info("wrote %s.csv and %s.json to %s", args.command, args.command, cfg.out)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
