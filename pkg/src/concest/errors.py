"""Exception hierarchy shared across the package."""


class ConcestError(Exception):
    """Base class for all package errors."""


class FormatError(ConcestError):
    """A data file is malformed (bad magic, shape, value range, ...)."""


class ConfigError(ConcestError):
    """Invalid or inconsistent run configuration."""


class DomainError(ConcestError):
    """An argument is outside its mathematical domain."""


class DimensionError(ConcestError):
    """Vector/matrix dimensions do not agree."""


class EmptyRegionError(ConcestError):
    """A region statistic was requested for an empty member set."""


class EmptyRetainedError(ConcestError):
    """An abstention threshold retained no examples."""


class UnknownIdError(ConcestError):
    """A prediction record references an id not present in the dataset."""


class ConvergenceError(ConcestError):
    """A numerical root-finder failed to converge (should be unreachable)."""


class InfeasibleError(ConcestError):
    """No placement satisfies the label-uncertainty constraint.

    Carries the 1-based iteration at which the search got stuck and the
    maximum region LU achievable by any candidate at that iteration.
    """

    def __init__(self, iteration, max_achievable_lu, balls_placed=0):
        self.iteration = iteration
        self.max_achievable_lu = max_achievable_lu
        self.balls_placed = balls_placed
        super().__init__(
            f"no feasible placement at iteration {iteration} "
            f"(max achievable region LU {max_achievable_lu:.6g}, "
            f"{balls_placed} balls placed so far)"
        )
