"""Exception hierarchy shared by every module of the package."""


class IDNLSError(Exception):
    """Base class for all errors raised by :mod:`idnls`."""

    exit_code = 3


class ConfigError(IDNLSError, ValueError):
    exit_code = 1


class NumericFailure(IDNLSError, ArithmeticError):
    exit_code = 3


class TailOverflow(NumericFailure):
    """The window is too small: amplitudes reached the guard sites."""


class ZeroSpectralParameter(NumericFailure, ZeroDivisionError):
    pass


class AssumptionViolated(IDNLSError):
    """One of the generic spectral assumptions failed.

    ``kind`` is one of ``zero_on_circle``, ``double_zero`` or
    ``velocity_collision``.
    """

    exit_code = 2
    KINDS = ("zero_on_circle", "double_zero", "velocity_collision")

    def __init__(self, kind, message=""):
        if kind not in self.KINDS:
            raise ValueError(f"unknown assumption kind {kind!r}")
        self.kind = kind
        super().__init__(f"{kind}: {message}" if message else kind)


class DegenerateEigenvalue(AssumptionViolated):
    def __init__(self, message=""):
        super().__init__("double_zero", message)


class ZeroNormingConstant(NumericFailure, ValueError):
    pass


class SingularPoleSystem(NumericFailure):
    pass


class OutOfRange(NumericFailure, ValueError):
    pass


class ArcCollision(NumericFailure):
    pass


class PoleHit(NumericFailure, ZeroDivisionError):
    pass


class AmbiguousRegion(ConfigError):
    pass


class NoPeak(NumericFailure):
    pass


class DegenerateFit(NumericFailure):
    pass
