"""Exception hierarchy shared by all malthus modules."""


class MalthusError(Exception):
    """Base class for all library errors."""


class InvalidModel(MalthusError):
    """A structural model assumption is violated (message names the first one)."""


class NonPositiveH(MalthusError):
    """The eigenfunction candidate h is not strictly positive at a queried point."""


class IntegrationFailure(MalthusError):
    """The ODE integrator failed (step underflow or solver error)."""


class OffOrbit(MalthusError):
    """The target point does not lie on the orbit of the source point."""


class OffDomain(MalthusError):
    """An orbit query is unreachable along the trajectory."""


class TailBoundExceeded(MalthusError):
    """The certified truncation tail of a time quadrature is too large."""


class NoConvergence(MalthusError):
    """An iterative solver exhausted its iteration budget."""


class BracketFailure(MalthusError):
    """No sign change could be bracketed for the Malthus root find."""


class PopulationCapExceeded(MalthusError):
    """The simulated population hit the configured hard cap."""


class DegenerateData(MalthusError):
    """Trajectory data is unusable for estimation (e.g. all counts zero)."""


class GridMismatch(MalthusError):
    """Two gridded densities do not share a common grid."""


class InsufficientData(MalthusError):
    """Not enough snapshots or replicates for the requested report."""


class EmptyMinorantWarning(UserWarning):
    """The assembled Doeblin minorant is identically zero (diagnostic, not fatal)."""
