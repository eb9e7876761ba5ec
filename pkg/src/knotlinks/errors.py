"""Exception hierarchy shared by every module."""


class KnotLinksError(Exception):
    """Base class for all domain errors raised by knotlinks."""


class InvalidParameterError(KnotLinksError, ValueError):
    pass


class GeometricDegeneracyError(KnotLinksError):
    """Curves touch, or a sampling region holds no tube volume."""


class UnsupportedClassificationError(KnotLinksError):
    pass


class AssignmentError(KnotLinksError):
    pass


class InsufficientDataError(KnotLinksError):
    pass


class SingularFitError(KnotLinksError):
    pass
