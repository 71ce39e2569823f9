"""Exception hierarchy shared by all condvendi modules."""


class CondVendiError(Exception):
    """Base class for every error raised by this package."""


class FormatError(CondVendiError, ValueError):
    """A file does not parse under its declared format."""


class DataError(CondVendiError, ValueError):
    """Input data violates a contract (non-finite entry, empty matrix, bad label)."""


class PairError(CondVendiError, ValueError):
    """Two embedding sets cannot be paired."""

    def __init__(self, n_x, n_t):
        self.n_x = int(n_x)
        self.n_t = int(n_t)
        super().__init__(f"cannot pair embedding sets with {self.n_x} and {self.n_t} rows")


class ParamError(CondVendiError, ValueError):
    """A parameter is outside its documented domain."""


class IoError(CondVendiError, OSError):
    """Reading or writing a file failed."""


class NumericalError(CondVendiError, ArithmeticError):
    """A numerical invariant was violated beyond tolerance (e.g. non-PSD kernel)."""


class OracleFailure(CondVendiError):
    """A brute-force validator found a discrepancy beyond its tolerance."""


class NumericalWarning(UserWarning):
    """A soft numerical invariant was violated (logged, not fatal)."""
