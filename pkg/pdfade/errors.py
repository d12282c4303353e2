"""
Exceptions raised by pdfade
"""


class PdFadeError(Exception):
    """Base class for every error pdfade raises on purpose"""


class DomainError(PdFadeError, ValueError):
    """A scalar input lies outside the function's domain (P <= 0, NaN, gamma < 0)"""


class ConstraintError(PdFadeError, ValueError):
    """A problem constraint is violated (rate bounds, integer counts, m_hat*l_f <= T)"""


class NumericConsistencyError(PdFadeError, ArithmeticError):
    """A computed quantity broke an invariant it must satisfy (e.g. Var(P) <= 0)"""


class ConfigError(PdFadeError, ValueError):
    """A run configuration is malformed; the message names the key"""
