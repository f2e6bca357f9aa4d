"""Exception hierarchy.

Every error carries a stable upper-case ``code`` so that the command line
front end can report it without parsing messages.
"""


class CocycleError(Exception):
    code = "ERROR"

    def __init__(self, message="", **context):
        super().__init__(message or self.code)
        self.context = context


class ConeViolation(CocycleError):
    code = "CONE_VIOLATION"


class NotUnimodular(CocycleError):
    code = "NOT_UNIMODULAR"


class PoleError(CocycleError):
    code = "POLE"


class GridTooCoarse(CocycleError):
    code = "GRID_TOO_COARSE"


class NonzeroDegree(CocycleError):
    code = "NONZERO_DEGREE"


class NoHyperbolicity(CocycleError):
    code = "NO_HYPERBOLICITY"


class UnboundedOverflow(CocycleError):
    code = "OVERFLOW"


class RationalStop(CocycleError):
    """Expansion hit a (numerically) rational remainder; ``partial`` holds the data."""

    code = "RATIONAL_STOP"

    def __init__(self, message="", partial=None):
        super().__init__(message)
        self.partial = partial


class DepthLimit(RationalStop):
    code = "DEPTH_LIMIT"


class ParityError(CocycleError):
    code = "PARITY"


class NotUnimodularBasis(CocycleError):
    code = "NOT_UNIMODULAR_BASIS"


class DepthExhausted(CocycleError):
    code = "DEPTH_EXHAUSTED"


class Underflow(CocycleError):
    code = "UNDERFLOW"


class Nonconstant(CocycleError):
    code = "NONCONSTANT"

    def __init__(self, message="", mode=None, **context):
        super().__init__(message, **context)
        self.mode = mode


class ConeEscape(CocycleError):
    code = "CONE_ESCAPE"


class NoContraction(CocycleError):
    code = "NO_CONTRACTION"


class BranchFault(CocycleError):
    code = "BRANCH_FAULT"


class SectionCollapse(CocycleError):
    code = "SECTION_COLLAPSE"


class SmallDivisor(CocycleError):
    code = "SMALL_DIVISOR"

    def __init__(self, message="", k=None, **context):
        super().__init__(message, **context)
        self.k = k


class StepTooLarge(CocycleError):
    code = "STEP_TOO_LARGE"


class Diverged(CocycleError):
    code = "DIVERGED"


class ResonanceHit(CocycleError):
    code = "RESONANCE_HIT"


class NotElliptic(CocycleError):
    code = "NOT_ELLIPTIC"


class NoZeroFound(CocycleError):
    code = "NO_ZERO_FOUND"


class ZerosCoincide(CocycleError):
    code = "ZEROS_COINCIDE"


class ConfigInvalid(CocycleError):
    code = "CONFIG_INVALID"


class CommandFailed(CocycleError):
    code = "COMMAND_FAILED"
