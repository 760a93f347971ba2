class NodalLabError(Exception):
    """Base class for every error raised by the nodal app."""


class DimensionMismatch(NodalLabError, ValueError):
    pass


class ManifoldMismatch(NodalLabError, ValueError):
    pass


class InverseOutsideInjectivityRadius(NodalLabError, ValueError):
    pass


class CoercivityViolated(NodalLabError, ValueError):
    pass


class NoConvergence(NodalLabError, RuntimeError):
    def __init__(self, max_iterations, residual):
        self.max_iterations = max_iterations
        self.residual = residual
        super().__init__(
            f"Linear solve did not reach the requested tolerance after {max_iterations} "
            f"iterations (relative residual {residual:.3e}). Reduce the grid/eps mismatch."
        )


class ZeroField(NodalLabError, ValueError):
    pass


class BracketNotFound(NodalLabError, RuntimeError):
    pass


class SubcriticalityViolated(NodalLabError, ValueError):
    pass


class CutoffExceedsInjectivityRadius(NodalLabError, ValueError):
    pass


class OverlappingSupports(NodalLabError, ValueError):
    pass


class StepCollapse(NodalLabError, RuntimeError):
    pass


class NotConcentrated(NodalLabError, ValueError):
    pass


class NegativeValues(NodalLabError, ValueError):
    pass


class NotSignChanging(NodalLabError, ValueError):
    pass


class ConcentrationInvariantError(NodalLabError, RuntimeError):
    """A ball-containment guarantee of the center-of-mass construction failed."""


class MixedEps(NodalLabError, ValueError):
    pass


class ConfigInvalid(NodalLabError, ValueError):
    def __init__(self, detail):
        self.detail = detail
        super().__init__(f"Invalid experiment config: {detail}")


class CorruptArchive(NodalLabError, ValueError):
    pass


class VersionMismatch(CorruptArchive):
    pass
