"""Numerical constants shared by all modules.

All tolerances live in one frozen record so that checks and the command
line front end budget against the same numbers.
"""

from dataclasses import asdict, dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    unimodular: float = 1e-12
    sample_unimodular: float = 1e-10
    cone: float = 1e-12
    light_cone: float = 1e-10
    pole: float = 1e-300
    rational_stop: float = 1e-14
    small_divisor: float = 1e-12
    commutation: float = 1e-8
    overflow: float = 1e300


@dataclass(frozen=True)
class Defaults:
    grid: int = 4096
    lyapunov_samples: int = 64
    renorm_nodes: int = 2**14
    renorm_domain: tuple = (-5.0, 6.0)
    nu_grid: int = 64
    section_grid: int = 512
    max_sweeps: int = 20000
    nf_exponent_a: float = 2.0
    nf_eps0: float = 1e-2
    cf_window_K: int = 1000


TOL = Tolerances()
DEFAULTS = Defaults()


def as_dict():
    return {"tolerances": asdict(TOL), "defaults": asdict(DEFAULTS)}


__all__ = ["Tolerances", "Defaults", "TOL", "DEFAULTS", "as_dict", "replace"]
