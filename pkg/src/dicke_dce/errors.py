"""Exception types raised by the solvers."""


class DickeError(Exception):
    """Base class for all package errors."""


class PhaseViolation(DickeError):
    """Coupling exceeds the instantaneous critical value (super-radiant phase)."""


class AssemblyError(DickeError):
    pass


class SingularMatrix(DickeError):
    """Sideband matrix could not be inverted to the requested accuracy."""


class QuadratureFailure(DickeError):
    pass


class UndampedError(DickeError):
    """Frequency integrals need gamma0 > 0; otherwise poles sit on the real axis."""


class NoConvergence(DickeError):
    pass


class StiffnessFailure(DickeError):
    pass


class NotConverged(DickeError):
    pass


class NoFreezeOut(DickeError):
    """The freeze-out equation has no root: evolution is adiabatic over the whole period."""


class OddRootCount(DickeError):
    pass


class TruncationError(DickeError):
    pass


class ConfigError(DickeError):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
