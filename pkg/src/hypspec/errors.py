"""Exception hierarchy.

The CLI maps these onto exit codes: ConfigError -> 2, NumericError -> 3,
CertificateViolation -> 4.
"""


class HypspecError(Exception):
    pass


class ConfigError(HypspecError):
    """Bad input: malformed files, unknown keys, violated preconditions."""


class ParseError(ConfigError):
    pass


class PreconditionError(ConfigError):
    pass


class RegimeError(PreconditionError):
    """Spectral regime gate failed (e.g. p too small for the spectral gap)."""

    def __init__(self, msg, threshold=None):
        super().__init__(msg)
        self.threshold = threshold


class RelationError(ConfigError):
    def __init__(self, msg, residual):
        super().__init__(msg)
        self.residual = residual


class NonHyperbolicGeneratorError(ConfigError):
    pass


class MissingVolumeError(ConfigError):
    pass


class NumericError(HypspecError):
    pass


class DegenerateTransformError(NumericError):
    pass


class QuadratureError(NumericError):
    def __init__(self, msg, estimates=None):
        super().__init__(msg)
        self.estimates = estimates


class BandViolationError(NumericError):
    pass


class BudgetExceededError(NumericError):
    def __init__(self, msg, visited=0, partial=None):
        super().__init__(msg)
        self.visited = visited
        self.partial = partial


class CertificateViolation(HypspecError):
    """A numerically checked inequality failed; carries the witness."""

    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness
