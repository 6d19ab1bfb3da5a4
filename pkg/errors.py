"""
Exception types raised across the proximity toolkit.
"""


class ProximityError(Exception):
    """Base class for every error raised by this package"""


class NormMismatchError(ProximityError):
    """A norm was applied to a point of the wrong variant"""

    def __init__(self, norm, point):
        what = point if isinstance(point, str) else type(point).__name__
        super().__init__(f"norm/point mismatch: {norm} cannot measure {what}")


class DomainError(ProximityError):
    """A parameter lies outside its mathematical domain"""


class RegionError(ProximityError):
    """A region cannot be sampled or estimated"""


class CatalogError(ProximityError):
    """Unknown catalog entry"""

    def __init__(self, kind: str, name: str, valid):
        self.valid = sorted(valid)
        super().__init__(f"unknown {kind} '{name}'; valid names: {', '.join(self.valid)}")


class PreconditionError(ProximityError):
    pass


class MapIntegrityError(ProximityError):
    """An iterate left A ∪ B"""


class BudgetError(ProximityError):
    """Iteration budget exhausted or residual above tolerance"""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class HarnessViolation(ProximityError):
    """A harness observed its premise without its conclusion"""
