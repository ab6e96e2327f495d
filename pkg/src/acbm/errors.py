"""Exception types raised by the toolkit."""


class AcbmError(ValueError):
    """Base class for every error raised by :mod:`acbm`."""


class NearSingular(AcbmError):
    pass


class DegenerateSample(AcbmError):
    """A seeded sampler failed to produce a nondegenerate object after its retries."""


class DegenerateSection(AcbmError):
    pass


class FSymmetryViolation(AcbmError):
    """Input jets give an F that does not have the symmetries of a structural tensor."""


class MetricityViolation(AcbmError):
    pass


class BadParam(AcbmError):
    pass


class NotPhiKaehler(AcbmError):
    pass


class WrongDimension(AcbmError):
    pass


class ZeroModulus(AcbmError):
    """tau**2 + tau_star**2 vanishes, so the polar angle is undefined."""
