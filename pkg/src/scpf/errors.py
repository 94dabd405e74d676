"""Exception and warning taxonomy shared across the package."""


class ScpfError(Exception):
    """Base class for all errors raised by this package."""


class SingularRouting(ScpfError):
    """Routing matrix leaves no exit path: I - Q^T is numerically singular."""


class UndefinedRelativeLoad(ScpfError):
    """A slice carries zero total load, so its relative load vector is undefined."""


class ZeroVector(ScpfError):
    """Geometry requested on a zero-norm vector."""


class DegenerateGeometry(ScpfError):
    """An inner product in a denominator underflowed to effectively zero."""


class InfeasibleTarget(ScpfError):
    """BTD target is below the best case achievable even with the full network."""


class SliceOverloaded(ScpfError):
    """A slice's carried load meets or exceeds its admissible limit."""

    def __init__(self, slice_index, load, limit):
        self.slice_index = slice_index
        self.load = load
        self.limit = limit
        super().__init__(
            f"slice {slice_index}: carried load {load:.6g} >= admissible limit {limit:.6g}"
        )


class AllZero(ScpfError):
    """All Poisson intensities are zero; conditional ratio is undefined."""


class HorizonTooShort(ScpfError):
    """Event simulation produced fewer post-warm-up samples than required."""


class SolverStall(ScpfError):
    """Convex subproblem failed to reach its optimality tolerance in budget."""


class LineSearchExhausted(ScpfError):
    """No backtracking step satisfied the sufficient-decrease condition."""


class NoConvergence(ScpfError):
    """Equilibrium iteration hit its iteration cap before the tolerance."""

    def __init__(self, message, trace=None):
        self.trace = trace
        super().__init__(message)


class EmptyPolytope(ScpfError):
    """A slice's admissible relative-load polytope is empty."""


class InfeasibleUnderSS(ScpfError):
    """Static slicing cannot meet the BTD target: s * dtilde <= 1."""


class InsufficientSamples(ScpfError):
    """Calibration run left some sectors with too few visits."""

    def __init__(self, starved):
        self.starved = list(starved)
        super().__init__(f"sectors with too few samples: {self.starved}")


class NonpositiveDistance(ScpfError):
    """Path loss requested at a non-positive distance."""


class ConfigError(ScpfError):
    """Scenario configuration failed schema validation."""


class ZeroLoadSlice(UserWarning):
    """Warning: a slice's solved total load is zero."""
