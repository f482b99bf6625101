"""Exception hierarchy for vesaea."""


class VesaeaError(Exception):
    """Base class for all errors raised by this package."""


class BudgetExhausted(VesaeaError):
    """Raised when a true evaluation is requested after the budget is spent."""


class OutOfBounds(VesaeaError):
    """Raised when a point outside the search box is sent to the true objective."""


class TooFewPoints(VesaeaError):
    pass


class DegenerateDesign(VesaeaError):
    """The RBF system stayed singular after every ridge retry, or the design
    contains near-duplicate points."""


class EmptyTopRegion(VesaeaError):
    """No Monte-Carlo candidate landed in the selected top Voronoi cells."""


class ConfigError(VesaeaError):
    pass


class MismatchedRuns(VesaeaError):
    pass
